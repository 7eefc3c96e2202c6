# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0
import itertools
from typing import Iterable, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from meshless_claw.exceptions import (
    DimensionMismatch,
    EmptyInput,
    InvalidSpacing,
    KTooLarge,
    OutOfBounds,
)
from meshless_claw.log import logging
from meshless_claw.models.geometry import MAX_DIM, Domain, Face, NodeKind, NodeSet
from meshless_claw.utils import minimum_image

# Candidates closer than TRIM_FACTOR * h to a face are removed
TRIM_FACTOR = 0.25
# Ghost copies are kept up to GHOST_FACTOR * h past a periodic seam
GHOST_FACTOR = 10.0


class NodeGenerator:
    def __init__(self):
        self.logger = logging.get_logger(self.__class__.__name__)

    @staticmethod
    def halton_points(count: int, dim: int) -> np.ndarray:
        """First `count` points of the unscrambled Halton sequence.

        Bases are the first `dim` primes and the sequence starts at index 1,
        so the origin is skipped: halton_points(1, 2) == [[1/2, 1/3]].
        """
        if count < 1:
            raise ValueError(f"count should be positive, got {count}")
        if not 1 <= dim <= MAX_DIM:
            raise ValueError(f"dim should be between 1 and {MAX_DIM}, got {dim}")
        sampler = qmc.Halton(d=dim, scramble=False)
        sampler.fast_forward(1)
        return sampler.random(count)

    def generate_nodes(
        self,
        kind: NodeKind,
        h: float,
        domain: Domain,
        seed: Optional[int] = None,
        decorated_faces: Iterable[Face] = (),
    ) -> NodeSet:
        """Generate a node set with spacing h in `domain`.

        grid: lattice with step h, the upper face of periodic axes excluded.
        halton / random: round(prod(l_k / h)) candidates, those within 0.25 h
        of a face removed, then every candidate closer than h to a decorated
        face projected onto it.
        """
        kind = NodeKind(kind)
        if not 0 < h < float(np.min(domain.lengths)):
            raise InvalidSpacing(
                f"h={h} should be positive and below the smallest side "
                f"{float(np.min(domain.lengths))}"
            )

        if kind == NodeKind.GRID:
            coords = self._lattice(h, domain)
        elif kind in (NodeKind.HALTON, NodeKind.RANDOM):
            candidates = self._candidates(kind, h, domain, seed)
            candidates = self._trim(candidates, h, domain)
            projected = self._project(candidates, h, domain, decorated_faces)
            coords = np.vstack([candidates, projected])
        else:
            raise ValueError(f"Cannot generate nodes of kind {kind.value}")

        boundary_flag = np.zeros(len(coords), dtype=bool)
        for face in domain.faces():
            boundary_flag |= domain.on_face(coords, face)

        nodes = NodeSet(coords, h, boundary_flag, domain, kind)
        self.logger.info(
            "Generated node set",
            kind=kind.value,
            h=h,
            nodes=nodes.size,
            boundary_nodes=int(boundary_flag.sum()),
        )
        return nodes

    def from_coordinates(
        self, coords, h: float, domain: Optional[Domain] = None
    ) -> NodeSet:
        """Wrap an existing point cloud, by default in its non-periodic
        bounding box."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if coords.shape[0] == 0:
            raise EmptyInput("No coordinates given")
        if domain is None:
            lower, upper = coords.min(axis=0), coords.max(axis=0)
            upper = np.where(upper > lower, upper, lower + h)
            domain = Domain(lower, upper, (False,) * coords.shape[1])
        if coords.shape[1] != domain.dim:
            raise DimensionMismatch(
                f"{coords.shape[1]}D coordinates in a {domain.dim}D domain"
            )
        outside = ~domain.contains(coords)
        if np.any(outside):
            raise OutOfBounds(f"Node {int(np.argmax(outside))} lies outside the domain")
        boundary_flag = np.zeros(len(coords), dtype=bool)
        for face in domain.faces():
            boundary_flag |= domain.on_face(coords, face)
        return NodeSet(coords, h, boundary_flag, domain, NodeKind.SCATTERED)

    def build_index(self, nodes: NodeSet, ghost_width: Optional[float] = None):
        return SpatialIndex(nodes, ghost_width)

    @staticmethod
    def _lattice(h, domain):
        axes = []
        for lower, upper, length, periodic in zip(
            domain.lower, domain.upper, domain.lengths, domain.periodic
        ):
            steps = int(round(length / h))
            if abs(steps * h - length) > 1e-9 * length:
                raise InvalidSpacing(f"Side {length} is not a multiple of h={h}")
            axis = np.linspace(lower, upper, steps + 1)
            axes.append(axis[:-1] if periodic else axis)
        # first coordinate runs fastest
        mesh = np.meshgrid(*axes[::-1], indexing="ij")[::-1]
        return np.stack([m.ravel() for m in mesh], axis=1)

    def _candidates(self, kind, h, domain, seed):
        count = int(round(np.prod(domain.lengths / h)))
        if kind == NodeKind.HALTON:
            unit = self.halton_points(count, domain.dim)
        else:
            if seed is None:
                raise ValueError("Random nodes need a seed")
            unit = np.random.default_rng(seed).random((count, domain.dim))
        return np.array(domain.lower) + unit * domain.lengths

    @staticmethod
    def _trim(candidates, h, domain):
        margin = TRIM_FACTOR * h
        keep = np.all(
            (candidates - np.array(domain.lower) >= margin)
            & (np.array(domain.upper) - candidates >= margin),
            axis=1,
        )
        return candidates[keep]

    @staticmethod
    def _project(candidates, h, domain, decorated_faces):
        projected = {}
        for face in decorated_faces:
            position = face.position(domain)
            near = np.abs(candidates[:, face.axis] - position) < h
            copies = candidates[near].copy()
            copies[:, face.axis] = position
            for point in copies:
                projected.setdefault(tuple(point), point)
        if not projected:
            return np.empty((0, domain.dim))
        return np.array(list(projected.values()))


class SpatialIndex:
    """k-nearest-neighbor queries in the periodic metric of a node set.

    Nodes within `ghost_width` of a periodic seam are copied across it, the
    kd-tree holds the nodes followed by these ghosts and `ghost_map` maps every
    tree entry back to its node id.
    """

    def __init__(self, nodes: NodeSet, ghost_width: Optional[float] = None):
        self.logger = logging.get_logger(self.__class__.__name__)
        self.nodes = nodes
        self.domain = nodes.domain
        half_sides = [
            0.5 * length
            for length, periodic in zip(self.domain.lengths, self.domain.periodic)
            if periodic
        ]
        if ghost_width is None:
            ghost_width = min([GHOST_FACTOR * nodes.h] + half_sides)
        if ghost_width < 0 or any(ghost_width > half for half in half_sides):
            raise ValueError(
                f"ghost_width={ghost_width} should be in [0, half a periodic side]"
            )
        self.ghost_width = float(ghost_width)

        ghost_coords, ghost_ids = self._ghosts()
        self.extended = np.vstack([nodes.coords, ghost_coords])
        self.ghost_map = np.concatenate([np.arange(nodes.size), ghost_ids])
        self.tree = cKDTree(self.extended)
        self.logger.debug(
            "Built spatial index", nodes=nodes.size, ghosts=len(ghost_ids)
        )

    @property
    def ghost_count(self):
        return len(self.ghost_map) - self.nodes.size

    def _ghosts(self):
        coords = self.nodes.coords
        axes = [k for k, periodic in enumerate(self.domain.periodic) if periodic]
        lower = np.array(self.domain.lower)
        upper = np.array(self.domain.upper)
        lengths = self.domain.lengths
        copies, ids = [], []
        for shift in itertools.product((-1, 0, 1), repeat=len(axes)):
            if not any(shift):
                continue
            keep = np.ones(len(coords), dtype=bool)
            offset = np.zeros(self.domain.dim)
            for axis, direction in zip(axes, shift):
                if direction > 0:
                    keep &= coords[:, axis] - lower[axis] < self.ghost_width
                elif direction < 0:
                    keep &= upper[axis] - coords[:, axis] <= self.ghost_width
                offset[axis] = direction * lengths[axis]
            copies.append(coords[keep] + offset)
            ids.append(np.flatnonzero(keep))
        if not copies:
            return np.empty((0, self.domain.dim)), np.empty(0, dtype=int)
        return np.vstack(copies), np.concatenate(ids)

    def nearest(self, x, k):
        """Ids and distances of the k nearest nodes to point x, sorted by
        (distance, id)."""
        if not 1 <= k <= self.nodes.size:
            raise KTooLarge(f"k={k} should be between 1 and N={self.nodes.size}")
        total = len(self.extended)
        fetch = min(total, k + 8)
        while True:
            dist, idx = self.tree.query(x, k=fetch)
            dist, idx = np.atleast_1d(dist), np.atleast_1d(idx)
            ids = self.ghost_map[idx]
            # a node reached through several copies keeps its closest one
            _, first = np.unique(ids, return_index=True)
            first = np.sort(first)
            ids, node_dist = ids[first], dist[first]
            if fetch == total or (
                len(ids) >= k and dist[-1] > np.sort(node_dist)[k - 1]
            ):
                break
            fetch = min(total, 2 * fetch)
        order = np.lexsort((ids, node_dist))[:k]
        return ids[order], node_dist[order]

    def knn(self, center: int, k: int) -> np.ndarray:
        """The k nearest node ids of node `center`, the center first."""
        ids, dist = self.nearest(self.nodes.coords[center], k)
        if ids[0] != center:
            # coincident nodes: the center still goes first
            rest = ids[ids != center]
            ids = np.concatenate([[center], rest])[:k]
        return ids

    def wrapped_displacement(self, center: int, ids) -> np.ndarray:
        """x_j - x_center for every j in ids, wrapped across periodic seams."""
        displacement = self.nodes.coords[np.asarray(ids)] - self.nodes.coords[center]
        return minimum_image(displacement, self.domain.lengths, self.domain.periodic)

    def distance_to_set(self, x, targets) -> float:
        """Periodic distance from x to the nearest target node, inf if none."""
        targets = np.asarray(targets, dtype=int)
        if targets.size == 0:
            return np.inf
        displacement = minimum_image(
            self.nodes.coords[targets] - np.asarray(x, dtype=float),
            self.domain.lengths,
            self.domain.periodic,
        )
        return float(np.min(np.linalg.norm(displacement, axis=1)))

    def distances_to_set(self, targets) -> np.ndarray:
        """distance_to_set for every node at once."""
        targets = np.asarray(targets, dtype=int)
        if targets.size == 0:
            return np.full(self.nodes.size, np.inf)
        points = self.nodes.coords[targets]
        axes = [k for k, periodic in enumerate(self.domain.periodic) if periodic]
        copies = []
        for shift in itertools.product((-1, 0, 1), repeat=len(axes)):
            offset = np.zeros(self.domain.dim)
            offset[axes] = np.array(shift) * self.domain.lengths[axes]
            copies.append(points + offset)
        dist, _ = cKDTree(np.vstack(copies)).query(self.nodes.coords, k=1)
        return dist
