"""Basic Scheme random key pre-distribution.

Rings are stored both as sorted index arrays and as Python integer bitmasks,
so the lowest common index of two rings is one ``&`` and a bit trick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .costmodel import ASK_KEY_BITS, FORWARD_KEY_BITS, ID_BITS, KEY_BITS
from .errors import ParameterError
from .links import LinkKind, SecureLink
from .netconfig import Selection
from .seeding import substream
from .topology import Topology

SHARED_PHASE = "shared-discovery"


def path_phase(round_no: int) -> str:
    return f"path-discovery-{round_no}"


@dataclass(frozen=True, eq=False)
class KeyPool:
    P: int
    index_bits: int
    keys: np.ndarray = field(repr=False)  # (P, 2) uint64 halves of 128-bit tokens
    seed: int = 0

    def key(self, index: int) -> int:
        hi, lo = self.keys[index]
        return (int(hi) << 64) | int(lo)


def build_pool(P: int, index_bits: int, seed: int) -> KeyPool:
    """Generate ``P`` distinct opaque 128-bit key identities."""
    if P < 1:
        raise ParameterError(f"pool size must be >= 1, got {P}")
    if index_bits < 1 or 2**index_bits < P:
        raise ParameterError(f"{index_bits}-bit indexes cannot address a pool of {P}")
    rng = substream(seed, "pool")
    keys = rng.integers(0, 2**64, size=(P, 2), dtype=np.uint64)
    if len(np.unique(keys, axis=0)) != P:  # 2^-128 territory, but the invariant is cheap
        raise RuntimeError("key identity collision")
    keys.setflags(write=False)
    return KeyPool(P=P, index_bits=index_bits, keys=keys, seed=seed)


def default_index_bits(P: int) -> int:
    return max(16, math.ceil(math.log2(P))) if P > 1 else 16


def _to_mask(indexes: np.ndarray, P: int) -> int:
    bits = np.zeros(P, dtype=bool)
    bits[indexes] = True
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


@dataclass(frozen=True, eq=False)
class KeyRing:
    owner: int
    indexes: np.ndarray  # sorted, read-only
    mask: int = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.indexes)

    def __contains__(self, index: int) -> bool:
        return index >= 0 and (self.mask >> index) & 1 == 1

    def storage_bits(self) -> int:
        return self.k * KEY_BITS


def make_ring(owner: int, indexes, P: int) -> KeyRing:
    idx = np.unique(np.asarray(indexes, dtype=np.int64))
    if len(idx) and (idx[0] < 0 or idx[-1] >= P):
        raise ParameterError("ring index outside the pool")
    idx.setflags(write=False)
    return KeyRing(owner=owner, indexes=idx, mask=_to_mask(idx, P))


def draw_ring(pool: KeyPool, k: int, node: int, seed: int) -> KeyRing:
    """Uniform ``k``-subset of the pool for ``node``, without replacement."""
    if not 0 <= k <= pool.P:
        raise ParameterError(f"ring size {k} not in [0, {pool.P}]")
    rng = substream(seed, "ring", node)
    idx = np.sort(rng.choice(pool.P, size=k, replace=False))
    idx.setflags(write=False)
    return KeyRing(owner=node, indexes=idx, mask=_to_mask(idx, pool.P))


def lowest_common_index(a: int, b: int) -> int:
    """Lowest set bit shared by two ring masks, or -1."""
    both = a & b
    if not both:
        return -1
    return (both & -both).bit_length() - 1


def shared_key_probability(P: int, k: int) -> float:
    """Probability that two random ``k``-rings from a pool of ``P`` intersect.

    Stirling-form closed expression, evaluated in log space.
    """
    if P < 1 or k < 0:
        raise ParameterError(f"invalid pool/ring sizes P={P}, k={k}")
    if k == 0:
        return 0.0
    if 2 * k >= P:
        raise ParameterError(f"formula is singular for 2k >= P (P={P}, k={k})")
    log_num = 2.0 * (P - k + 0.5) * math.log1p(-k / P)
    log_den = (P - 2 * k + 0.5) * math.log1p(-2 * k / P)
    return float(-math.expm1(log_num - log_den))


def expected_secure_neighbors(p: float, d: float) -> tuple[float, float]:
    """Expected neighbours secured by shared keys and by one path-key round."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability out of range: {p}")
    if d < 0:
        raise ParameterError(f"negative degree: {d}")
    return p * d, (1 - p) * (1 - (1 - p * p) ** d) * d


class Match(NamedTuple):
    index: int


class NoMatch(NamedTuple):
    ring: KeyRing


def shared_key_discovery(a: KeyRing, neighbor_rings: list[KeyRing]) -> list[Match | NoMatch]:
    out: list[Match | NoMatch] = []
    for ring in neighbor_rings:
        j = lowest_common_index(a.mask, ring.mask)
        out.append(Match(j) if j >= 0 else NoMatch(ring))
    return out


@dataclass(frozen=True)
class BasicScheme:
    """Basic Scheme policy: pool size, ring size and message index width.

    ``index_bits`` sizes the pool's addressing; frames carry 16-bit indexes
    unless ``strict_index_bits`` is set.
    """

    P: int
    k: int
    index_bits: int | None = None
    strict_index_bits: bool = False

    def __post_init__(self):
        if self.P is None or self.k is None:
            raise ParameterError("bs requires both P and k")
        if self.P < 1:
            raise ParameterError(f"pool size must be >= 1, got {self.P}")
        if not 0 <= self.k <= self.P:
            raise ParameterError(f"ring size {self.k} not in [0, {self.P}]")
        bits = self.pool_index_bits
        if 2**bits < self.P:
            raise ParameterError(f"{bits}-bit indexes cannot address a pool of {self.P}")

    @property
    def pool_index_bits(self) -> int:
        return self.index_bits if self.index_bits is not None else default_index_bits(self.P)

    @property
    def message_index_bits(self) -> int:
        return self.pool_index_bits if self.strict_index_bits else ID_BITS

    @property
    def p(self) -> float:
        return shared_key_probability(self.P, self.k)

    def supports(self, selection: Selection) -> bool:
        return True

    def build(self, t: Topology, seed: int) -> "BSLayer":
        pool = build_pool(self.P, self.pool_index_bits, seed)
        rings = [draw_ring(pool, self.k, v, seed) for v in range(t.n)]
        return BSLayer(self, pool, rings, seed)


class BSLayer:
    """Per-run key material plus the discovery hook called by the configuration loop."""

    name = "bs"

    def __init__(self, scheme: BasicScheme, pool: KeyPool, rings: list[KeyRing], seed: int):
        self.scheme = scheme
        self.pool = pool
        self.rings = rings
        self.masks = [r.mask for r in rings]
        self.seed = seed
        self.w = scheme.message_index_bits
        self._helper_rng: dict[int, np.random.Generator] = {}

    def fresh_token(self, helper: int) -> int:
        rng = self._helper_rng.get(helper)
        if rng is None:
            rng = self._helper_rng[helper] = substream(self.seed, "pathkey", helper)
        hi, lo = rng.integers(0, 2**64, size=2, dtype=np.uint64)
        return (int(hi) << 64) | int(lo)

    def establish_links(self, world, a: int) -> list[SecureLink]:
        return bs_establish_links(self, world, a)


def bs_establish_links(layer: BSLayer, world, a: int, cascade: bool | None = None) -> list[SecureLink]:
    """Poll, shared-key discovery and (mode permitting) path-key rounds for ``a``.

    Returns the links created during this call.
    """
    mode = world.selection
    if cascade is None:
        cascade = world.cascade
    w = layer.w
    list_bits = w * layer.scheme.k
    nbrs = world.topo.adjacency[a]
    if mode is Selection.REACTIVE:
        receivers = [v for v in nbrs if world.is_floating(v)]
    else:
        receivers = list(nbrs)
    world.broadcast(a, list_bits, receivers, "poll")

    created: list[SecureLink] = []
    unsecured: list[int] = []
    ma = layer.masks[a]
    for v in receivers:
        if world.link(a, v) is not None:
            world.unicast(v, a, w, "reply_short")
            world.register(a, v, True)
            continue
        j = lowest_common_index(ma, layer.masks[v])
        if j >= 0:
            link = SecureLink.between(a, v, LinkKind.SHARED, SHARED_PHASE, pool_index=j)
            world.add_link(link)
            created.append(link)
            world.unicast(v, a, w, "reply_short")
            world.register(a, v, True)
        elif mode is not Selection.STRAIGHT:
            world.unicast(v, a, list_bits, "reply_ring")
            world.register(a, v, False)
            unsecured.append(v)

    if mode is Selection.STRAIGHT:
        return created
    round_no = 0
    targets = unsecured
    while targets:
        round_no += 1
        helpers = [h for h in nbrs if world.link(a, h) is not None]
        if not helpers:
            break
        new, _ = path_key_round(layer, world, a, helpers, targets, round_no)
        created.extend(new)
        targets = [t for t in targets if world.link(a, t) is None]
        if not cascade or not new:
            break
    return created


def path_key_round(layer: BSLayer, world, a: int, helpers: list[int], targets: list[int], round_no: int = 1):
    """One path-key discovery round from ``a`` through its secured neighbours.

    Returns ``(new links, message trace)``; the trace lists
    ``(kind, src, dst_or_None, body_bits)`` tuples.
    """
    trace: list[tuple] = []
    if not targets:
        return [], trace
    w = layer.w
    body = len(targets) * (w * layer.scheme.k + ID_BITS)
    # only secured neighbours can act on the request, so only they process it
    world.broadcast(a, body, helpers, "pk_request")
    trace.append(("pk_request", a, None, body))

    masks = layer.masks
    offers: dict[int, tuple[int, int, int]] = {}  # target -> (helper, index, token)
    for h in sorted(helpers):
        mh = masks[h]
        for t in targets:
            if t == h:
                continue
            j = lowest_common_index(mh, masks[t])
            if j < 0:
                continue
            token = layer.fresh_token(h)
            world.ledger(h).enc_ops += 2  # one copy under K(a,h), one under K(h,t)
            world.unicast(h, a, ASK_KEY_BITS, "ask_key")
            trace.append(("ask_key", h, a, ASK_KEY_BITS))
            if t not in offers:
                offers[t] = (h, j, token)

    created: list[SecureLink] = []
    for t in targets:
        if t not in offers:
            continue
        h, j, token = offers[t]
        world.ledger(a).dec_ops += 1
        world.unicast(a, t, FORWARD_KEY_BITS, "path_key")
        trace.append(("path_key", a, t, FORWARD_KEY_BITS))
        world.ledger(t).dec_ops += 1
        via = world.link(a, h).protecting_indexes()
        transit = tuple(dict.fromkeys(via + (j,)))
        link = SecureLink.between(a, t, LinkKind.PATH, path_phase(round_no), transit=transit, token=token)
        world.add_link(link)
        world.register(a, t, True)
        created.append(link)
    return created, trace
