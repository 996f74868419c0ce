"""Abstract ECDH pairwise keys with an optional RSA signature overlay.

No curve arithmetic is performed.  Each node holds a random private token and
a public token derived from it by hashing; the link key of a pair is a hash of
both private tokens in node-id order, which gives the symmetry of
``P_u * Pu_v == P_v * Pu_u`` without the math.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

from .costmodel import ECC_PUBLIC_BITS, RSA_SIGNATURE_BITS, EnergyLedger
from .errors import ParameterError
from .links import LinkKind, SecureLink
from .netconfig import Selection
from .seeding import substream
from .topology import Topology

log = logging.getLogger(__name__)

ECDH_PHASE = "ecdh"


@dataclass(frozen=True)
class KeyPair:
    owner: int
    private_token: bytes = field(repr=False)
    public_bits: int = ECC_PUBLIC_BITS

    @property
    def public_token(self) -> bytes:
        return hashlib.blake2b(self.private_token, digest_size=20, person=b"ecdh-pub").digest()


@dataclass(frozen=True)
class SignatureCredential:
    owner: int
    valid: bool = True
    bits: int = RSA_SIGNATURE_BITS


def generate_keypair(node: int, seed: int) -> KeyPair:
    rng = substream(seed, "ecdh-key", node)
    return KeyPair(owner=node, private_token=rng.bytes(20))


def pairwise_token(u: KeyPair, v: KeyPair) -> int:
    lo, hi = (u, v) if u.owner < v.owner else (v, u)
    digest = hashlib.blake2b(lo.private_token + hi.private_token, digest_size=16, person=b"ecdh-link").digest()
    return int.from_bytes(digest, "big")


def ecdh_establish(
    u: KeyPair,
    v: KeyPair,
    u_ledger: EnergyLedger | None = None,
    v_ledger: EnergyLedger | None = None,
) -> SecureLink:
    """Derive the link key on both sides; one point multiplication each."""
    if u.owner == v.owner:
        raise ParameterError("cannot pair a node with itself")
    if u_ledger is not None:
        u_ledger.pointmuls += 1
    if v_ledger is not None:
        v_ledger.pointmuls += 1
    return SecureLink.between(u.owner, v.owner, LinkKind.PAIRWISE, ECDH_PHASE, token=pairwise_token(u, v))


def authenticated_establish(
    u: KeyPair,
    v: KeyPair,
    credentials: dict[int, SignatureCredential],
    u_ledger: EnergyLedger | None = None,
    v_ledger: EnergyLedger | None = None,
) -> SecureLink | None:
    """ECDH after each side verifies the other's RSA signature.

    Returns None (and logs) when either credential is invalid; verification
    energy is spent regardless, point multiplications only on success.
    """
    cu, cv = credentials[u.owner], credentials[v.owner]
    if u_ledger is not None:
        u_ledger.verifies += 1
    if v_ledger is not None:
        v_ledger.verifies += 1
    if not (cu.valid and cv.valid):
        bad = [c.owner for c in (cu, cv) if not c.valid]
        log.info("link %d-%d refused: invalid credential from %s", u.owner, v.owner, bad)
        return None
    return ecdh_establish(u, v, u_ledger, v_ledger)


@dataclass(frozen=True)
class ECDHScheme:
    """ECDH policy; ``rsa_overlay`` appends and verifies RSA-1024 signatures.

    ``invalid_credentials`` marks nodes whose credential fails verification.
    """

    rsa_overlay: bool = False
    invalid_credentials: frozenset[int] = frozenset()

    def supports(self, selection: Selection) -> bool:
        return selection is not Selection.STRAIGHT

    def build(self, t: Topology, seed: int) -> "ECDHLayer":
        keys = [generate_keypair(v, seed) for v in range(t.n)]
        creds = {v: SignatureCredential(v, valid=v not in self.invalid_credentials) for v in range(t.n)}
        return ECDHLayer(self, keys, creds)


class ECDHLayer:
    name = "ecdh"

    def __init__(self, scheme: ECDHScheme, keys: list[KeyPair], credentials: dict[int, SignatureCredential]):
        self.scheme = scheme
        self.keys = keys
        self.credentials = credentials
        self.refused: list[tuple[int, int]] = []

    @property
    def message_bits(self) -> int:
        return ECC_PUBLIC_BITS

    @property
    def signature_bits(self) -> int:
        return RSA_SIGNATURE_BITS if self.scheme.rsa_overlay else 0

    def establish_links(self, world, a: int) -> list[SecureLink]:
        return ecdh_establish_links(self, world, a)


def ecdh_establish_links(layer: ECDHLayer, world, a: int) -> list[SecureLink]:
    """Broadcast ``a``'s public key and pair with every neighbour that answers.

    Proactive: every neighbour answers; reactive: floating neighbours only.
    Signatures ride outside the MAC, so they add radio bits but no hashing.
    """
    if world.selection is Selection.STRAIGHT:
        raise ParameterError("ECDH has no straight link-selection mode")
    rsa = layer.scheme.rsa_overlay
    sig = layer.signature_bits
    body = layer.message_bits
    nbrs = world.topo.adjacency[a]
    if world.selection is Selection.REACTIVE:
        receivers = [v for v in nbrs if world.is_floating(v)]
    else:
        receivers = list(nbrs)
    world.broadcast(a, body, receivers, "poll", extra_bits=sig)

    created: list[SecureLink] = []
    ka = layer.keys[a]
    la = world.ledger(a)
    for v in receivers:
        if world.link(a, v) is not None:
            world.unicast(v, a, body, "reply", extra_bits=sig)
            world.register(a, v, True)
            continue
        lv = world.ledger(v)
        if rsa:
            lv.verifies += 1
            if not layer.credentials[a].valid:
                layer.refused.append((a, v))
                log.info("node %d rejects poll from %d: invalid credential", v, a)
                continue
        world.unicast(v, a, body, "reply", extra_bits=sig)
        if rsa:
            la.verifies += 1
            if not layer.credentials[v].valid:
                layer.refused.append((a, v))
                log.info("node %d rejects reply from %d: invalid credential", a, v)
                world.register(a, v, False)
                continue
        link = ecdh_establish(ka, layer.keys[v], la, lv)
        world.add_link(link)
        world.register(a, v, True)
        created.append(link)
    return created


@dataclass(frozen=True)
class NoSecurity:
    """Reference layer: every physical link counts as secure and costs nothing."""

    def supports(self, selection: Selection) -> bool:
        return True

    def build(self, t: Topology, seed: int) -> "NullLayer":
        return NullLayer()


class NullLayer:
    name = "none"

    def establish_links(self, world, a: int) -> list[SecureLink]:
        created = []
        for v in world.topo.adjacency[a]:
            if world.link(a, v) is None:
                link = SecureLink.between(a, v, LinkKind.PAIRWISE, "unsecured")
                world.add_link(link)
                created.append(link)
            world.register(a, v, True)
        return created

