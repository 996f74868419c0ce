"""Established pairwise keys and their provenance."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class LinkKind(Enum):
    SHARED = "shared_pool"  # common ring key
    PATH = "path_key"  # fresh key relayed through a helper
    PAIRWISE = "pairwise"  # ECDH


@dataclass(frozen=True, slots=True)
class SecureLink:
    """One link key between ``u < v``.

    ``pool_index`` is set for shared-pool links.  For path keys ``transit``
    lists every pool index whose key protected the token on its way to the
    endpoints (originator-helper link key first, helper-target key last).
    """

    u: int
    v: int
    kind: LinkKind
    phase: str
    pool_index: int | None = None
    transit: tuple[int, ...] = ()
    token: int | None = None

    @classmethod
    def between(cls, a: int, b: int, kind: LinkKind, phase: str, **kw) -> "SecureLink":
        if a == b:
            raise ValueError("a link needs two distinct endpoints")
        u, v = (a, b) if a < b else (b, a)
        return cls(u, v, kind, phase, **kw)

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.u, self.v

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u

    def protecting_indexes(self) -> tuple[int, ...]:
        """Pool indexes whose disclosure exposes this link key."""
        if self.kind is LinkKind.SHARED:
            return (self.pool_index,)
        return self.transit
