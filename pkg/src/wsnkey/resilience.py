"""Node-capture resilience of an established key graph.

A link is compromised when one of its endpoints is captured, or when any
pool key that protected it (the shared key itself, or the keys that carried
a path key in transit) sits in a captured node's ring.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .links import SecureLink
from .seeding import substream


@dataclass(frozen=True)
class CaptureScenario:
    captured: frozenset[int]
    trials: int = 1
    seed: int = 0


class LinkTable:
    """Column view of a link set for fast repeated capture evaluation.

    Args:
        links: established links.
        rings: per-node sorted index arrays (BS) or None (pairwise keys).
        n: number of deployed nodes.
        P: pool size, required with ``rings``.
    """

    def __init__(self, links: Iterable[SecureLink], n: int, rings: Sequence[np.ndarray] | None = None, P: int | None = None):
        links = list(links)
        if not links:
            raise ParameterError("compromise fraction is undefined for an empty link set")
        self.n = n
        self.u = np.fromiter((l.u for l in links), dtype=np.int64, count=len(links))
        self.v = np.fromiter((l.v for l in links), dtype=np.int64, count=len(links))
        if max(self.u.max(), self.v.max()) >= n:
            raise ParameterError("link endpoint outside the deployment")
        width = max(len(l.protecting_indexes()) for l in links) if rings is not None else 0
        self.keys = np.full((len(links), width), -1, dtype=np.int64)
        for i, l in enumerate(links):
            idx = l.protecting_indexes() if rings is not None else ()
            self.keys[i, : len(idx)] = idx
        self.rings = None
        if rings is not None:
            if P is None:
                raise ParameterError("pool size needed to evaluate ring compromise")
            k = max((len(r) for r in rings), default=0)
            mat = np.full((n, k), P, dtype=np.int64)  # P is a sentinel slot
            for i, r in enumerate(rings):
                mat[i, : len(r)] = r
            self.rings = mat
            self.P = P

    def __len__(self) -> int:
        return len(self.u)

    def compromised(self, captured: np.ndarray) -> np.ndarray:
        """Boolean per link for a captured-node mask."""
        hit = captured[self.u] | captured[self.v]
        if self.rings is not None and self.keys.shape[1]:
            exposed = np.zeros(self.P + 1, dtype=bool)
            exposed[self.rings[captured].ravel()] = True
            exposed[self.P] = False
            exposed_keys = exposed[self.keys]  # -1 maps to the sentinel slot
            exposed_keys &= self.keys >= 0
            hit |= exposed_keys.any(axis=1)
        return hit

    def fraction(self, captured: np.ndarray) -> float:
        return float(self.compromised(captured).mean())


def _mask(n: int, captured: Iterable[int]) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    idx = np.fromiter(captured, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ParameterError("captured node outside the deployment")
    m[idx] = True
    return m


def compromise_fraction(links, rings, captured, n: int | None = None, P: int | None = None) -> float:
    """Fraction of ``links`` compromised once ``captured`` nodes are read out.

    ``rings`` is a per-node list of KeyRing (or index arrays) for BS links, or
    None for pairwise links.  ``links`` may also be a prebuilt LinkTable.
    """
    if isinstance(links, LinkTable):
        table = links
    else:
        links = list(links)
        if n is None:
            n = len(rings) if rings is not None else 1 + max((l.v for l in links), default=-1)
        idx_rings = None
        if rings is not None:
            idx_rings = [getattr(r, "indexes", r) for r in rings]
            if P is None:
                P = 1 + max((int(r.max()) for r in idx_rings if len(r)), default=0)
        table = LinkTable(links, n, idx_rings, P)
    return table.fraction(_mask(table.n, captured))


def resilience_curve(table: LinkTable, capture_counts: Sequence[int], trials: int, seed: int):
    """Mean and standard deviation of the compromised fraction per capture count.

    Each trial draws a fresh uniform capture set from a dedicated stream.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    out = []
    for m in capture_counts:
        if not 0 <= m <= table.n:
            raise ParameterError(f"cannot capture {m} of {table.n} nodes")
        rng = substream(seed, "capture", m)
        vals = np.empty(trials)
        for i in range(trials):
            captured = np.zeros(table.n, dtype=bool)
            captured[rng.choice(table.n, size=m, replace=False)] = True
            vals[i] = table.fraction(captured)
        out.append((int(m), float(vals.mean()), float(vals.std(ddof=1)) if trials > 1 else 0.0))
    return out


def ecdh_expected_fraction(n: int, m: int) -> float:
    """Closed form for pairwise keys: a link survives iff both endpoints do."""
    if n < 2:
        return float(m >= 1)
    return 1.0 - (n - m) * (n - m - 1) / (n * (n - 1))


def write_curve(rows, path: str | Path, trials: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "mean_fraction", "stddev", "trials"])
        for m, mean, sd in rows:
            w.writerow([m, f"{mean:.6g}", f"{sd:.6g}", trials])
    return path
