"""Uniform 2D deployments with a target expected node degree.

The radio range is fixed at one distance unit and the square side is derived
from the requested degree, ``L**2 = n * pi * r**2 / d``, so that a node far
from the border has ``d`` neighbours on average.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError
from .seeding import substream

MAX_NODE_ID = 0xFFFF


@dataclass(frozen=True)
class Topology:
    n: int
    positions: np.ndarray
    radio_range: float
    area_side: float
    adjacency: tuple[tuple[int, ...], ...]
    target_degree: float
    seed: int
    torus: bool = False
    _degree: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_degree", np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n))

    @property
    def degrees(self) -> np.ndarray:
        return self._degree

    @property
    def edge_count(self) -> int:
        return int(self._degree.sum()) // 2

    def edges(self):
        """Yield every undirected edge once as ``(u, v)`` with ``u < v``."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def distance(self, u: int, v: int) -> float:
        delta = np.abs(self.positions[u] - self.positions[v])
        if self.torus:
            delta = np.minimum(delta, self.area_side - delta)
        return float(math.hypot(delta[0], delta[1]))

    def interior_mask(self) -> np.ndarray:
        """Nodes farther than one radio range from every border."""
        if self.torus:
            return np.ones(self.n, dtype=bool)
        p = self.positions
        r, side = self.radio_range, self.area_side
        return np.all((p > r) & (p < side - r), axis=1)

    def mean_degree(self) -> float:
        return float(self._degree.mean()) if self.n else 0.0

    def interior_mean_degree(self) -> float:
        mask = self.interior_mask()
        if not mask.any():
            return float("nan")
        return float(self._degree[mask].mean())


def deploy(n: int, d: float, seed: int, *, torus: bool = False, radio_range: float = 1.0) -> Topology:
    """Place ``n`` nodes uniformly at random and connect those within range.

    Raises:
        ParameterError: for ``n < 1``, ``d <= 0``, ids beyond 16 bits, or a
            degenerate request ``d >= n - 1`` when ``n >= 2``.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if n - 1 > MAX_NODE_ID:
        raise ParameterError(f"node ids are 16-bit; n={n} is too large")
    if not d > 0:
        raise ParameterError(f"target degree must be positive, got {d}")
    if n >= 2 and d >= n - 1:
        raise ParameterError(f"target degree {d} is degenerate for n={n}")

    side = math.sqrt(n * math.pi * radio_range**2 / d)
    rng = substream(seed, "deploy")
    positions = rng.uniform(0.0, side, size=(n, 2))

    neighbours: list[list[int]] = [[] for _ in range(n)]
    if n > 1:
        if torus:
            tree = cKDTree(positions, boxsize=side)
        else:
            tree = cKDTree(positions)
        pairs = tree.query_pairs(radio_range, output_type="ndarray")
        for u, v in pairs.tolist():
            neighbours[u].append(v)
            neighbours[v].append(u)
    adjacency = tuple(tuple(sorted(a)) for a in neighbours)
    return Topology(
        n=n,
        positions=positions,
        radio_range=radio_range,
        area_side=side,
        adjacency=adjacency,
        target_degree=d,
        seed=seed,
        torus=torus,
    )


def neighbors(t: Topology, v: int) -> tuple[int, ...]:
    if not 0 <= v < t.n:
        raise ParameterError(f"node id {v} out of range for n={t.n}")
    return t.adjacency[v]


def write_topology(t: Topology, directory: str | Path) -> tuple[Path, Path]:
    """Dump ``nodes.csv`` (``id,x,y``) and ``edges.csv`` (``id,neighbor_id``, u<v)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nodes_path = directory / "nodes.csv"
    edges_path = directory / "edges.csv"
    with nodes_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y"])
        for i, (x, y) in enumerate(t.positions.tolist()):
            w.writerow([i, f"{x:.6g}", f"{y:.6g}"])
    with edges_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "neighbor_id"])
        w.writerows(t.edges())
    return nodes_path, edges_path
