# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

from pathlib import Path

from setuptools import find_packages, setup

pkg_dir = Path(__file__).parent.absolute()


def read_requirements_from_file():
    with open(pkg_dir / "requirements.txt") as fh:
        requirements = []
        for line in fh:
            line = line.strip()
            if "#" in line:
                line = line[: line.index("#")].strip()
            if len(line) == 0:
                continue
            requirements.append(line)
        return requirements


def read_long_description_from_readme():
    with open("README.md", "r", encoding="utf-8") as fh:
        return fh.read()


setup(
    name="meshless_claw",
    version="0.3.0",
    packages=find_packages(include=["meshless_claw", "meshless_claw.*"]),
    description="Positive meshless finite difference schemes for conservation laws",
    long_description=read_long_description_from_readme(),
    long_description_content_type="text/markdown",
    author="meshless_claw contributors",
    license="MPL-2.0",
    keywords=["meshless", "finite differences", "conservation laws", "burgers"],
    python_requires=">=3.9.0",
    install_requires=read_requirements_from_file(),
    setup_requires=["wheel"],
    entry_points={"console_scripts": ["meshless-claw = meshless_claw.cli:main"]},
    tests_require=["pytest", "pytest-cov", "flake8"],
    classifiers=[
        r"Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        r"License :: OSI Approved :: Mozilla Public License 2.0 (MPL 2.0)",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
