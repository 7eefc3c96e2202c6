# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

"""Run configuration.

A run is described by a line oriented text file:

    # Burgers equation with smooth periodic data
    problem = burgers_smooth
    algorithm = constant_viscosity
    h = 0.005
    seed = 7

Keys are case insensitive, `#` starts a comment. Everything except `problem`
has a default; h and T default to the values of the chosen problem, dt and mu
to 0.2 h / v0 and 0.5 h v0 once the velocity scale v0 is known.
"""

from pathlib import Path
from typing import Dict, Optional, Union

from pydantic import (
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from meshless_claw.exceptions import BadValue, MissingRequired, UnknownKey
from meshless_claw.models.bench import Problem, ProblemId
from meshless_claw.models.geometry import NodeKind
from meshless_claw.models.scheme import Algorithm, SchemeConfig
from meshless_claw.services.bench import Benchmarks

DT_FACTOR = 0.2
MU_FACTOR = 0.5

KEY_ALIASES = {"t": "t_final", "nf": "n_f"}


class RunConfig(BaseSettings):
    # only explicit values count, the environment never changes a run
    model_config = SettingsConfigDict(extra="forbid")

    problem: ProblemId
    algorithm: Algorithm = Algorithm.ADAPTIVE_VISCOSITY
    node_kind: NodeKind = NodeKind.HALTON
    h: Optional[PositiveFloat] = None
    dt: Optional[PositiveFloat] = None
    t_final: Optional[PositiveFloat] = None
    mu: Optional[NonNegativeFloat] = None
    n_min: PositiveInt = 10
    n_max: PositiveInt = 100
    n_f: PositiveInt = 10
    c1: PositiveFloat = 1.0
    c2: PositiveFloat = 2.0
    c3: PositiveFloat = 5.0
    v0: Optional[PositiveFloat] = None
    seed: Optional[NonNegativeInt] = None
    output_dir: Path = Path("output")
    reference_path: Optional[Path] = None
    snapshot_every: NonNegativeInt = 0
    cross_section_x2: Optional[float] = None
    contour_size: NonNegativeInt = 0
    gamma: PositiveFloat = 1.0
    diagnostics: bool = False
    log_level: str = "INFO"

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        return (init_settings,)

    @model_validator(mode="after")
    def apply_problem_defaults(self):
        if self.n_min > self.n_max:
            raise ValueError(f"n_min={self.n_min} exceeds n_max={self.n_max}")
        problem = self.get_problem()
        if self.h is None:
            self.h = problem.h
        if self.t_final is None:
            self.t_final = problem.t_final / self.gamma
        return self

    @classmethod
    def from_mapping(cls, values: Dict[str, object]) -> "RunConfig":
        """Validate raw key/value pairs, mapping validation failures onto the
        configuration errors."""
        values = {normalize_key(key): value for key, value in values.items()}
        try:
            return cls(**values)
        except ValidationError as exc:
            raise _config_error(exc) from exc

    def get_problem(self) -> Problem:
        return Benchmarks.get_problem(self.problem)

    def resolve(self, v0: Optional[float] = None) -> SchemeConfig:
        """Scheme parameters, with dt and mu derived from the velocity scale.

        An explicit `v0` key wins over the value passed in.
        """
        v0 = self.v0 if self.v0 is not None else v0
        if v0 is None or not v0 > 0:
            raise BadValue(f"Cannot derive dt and mu from velocity scale v0={v0}")
        dt = self.dt if self.dt is not None else DT_FACTOR * self.h / v0
        mu = self.mu if self.mu is not None else MU_FACTOR * self.h * v0
        return SchemeConfig(
            algorithm=self.algorithm,
            h=self.h,
            dt=dt,
            t_final=self.t_final,
            mu=mu,
            v0=v0,
            n_min=self.n_min,
            n_max=self.n_max,
            n_f=self.n_f,
            c1=self.c1,
            c2=self.c2,
            c3=self.c3,
        )

    def to_text(self) -> str:
        """Serialize to the `key = value` format read by `parse_config`."""
        lines = []
        for key, value in self.model_dump().items():
            if value is None:
                continue
            lines.append(f"{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


def normalize_key(key: str) -> str:
    key = key.strip().lower()
    return KEY_ALIASES.get(key, key)


def parse_config(path: Union[str, Path]) -> RunConfig:
    """Read a `key = value` configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BadValue(f"Cannot read configuration {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadValue(f"{source}:{number}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = normalize_key(key)
        if not key or not value:
            raise BadValue(f"{source}:{number}: empty key or value")
        if key in values:
            raise BadValue(f"{source}:{number}: duplicate key {key!r}")
        values[key] = value
    return RunConfig.from_mapping(values)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _config_error(exc: ValidationError):
    errors = exc.errors()
    kinds = {error["type"] for error in errors}
    fields = ", ".join(
        ".".join(str(part) for part in error["loc"]) or "config" for error in errors
    )
    if "extra_forbidden" in kinds:
        unknown = [e["loc"][0] for e in errors if e["type"] == "extra_forbidden"]
        return UnknownKey(f"Unknown configuration key(s): {', '.join(unknown)}")
    if "missing" in kinds:
        missing = [e["loc"][0] for e in errors if e["type"] == "missing"]
        return MissingRequired(f"Missing required key(s): {', '.join(missing)}")
    messages = "; ".join(error["msg"] for error in errors)
    return BadValue(f"Invalid value for {fields}: {messages}")
