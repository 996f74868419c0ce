"""Energy constants, frame layout, the per-node energy ledger and the
closed-form per-node cost expressions for both key-establishment schemes.

Units: radio costs in uJ/bit, symmetric crypto in uJ/byte, asymmetric
operations in mJ/op.  Every function that returns an energy returns joules.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, NamedTuple

ID_BITS = 16
HEADER_BITS = 2 * ID_BITS  # ID_A, ID_B
MAC_BITS = 160  # SHA-1 output
FRAME_OVERHEAD_BITS = HEADER_BITS + MAC_BITS
KEY_BITS = 128  # AES-128 keys and path-key tokens
AES_BLOCK_BYTES = KEY_BITS // 8
ECC_PUBLIC_BITS = 160
RSA_SIGNATURE_BITS = 1024
ASK_KEY_BITS = 2 * (ID_BITS + KEY_BITS)  # two (index/id, encrypted key) pieces
FORWARD_KEY_BITS = ASK_KEY_BITS // 2

_UJ = 1e-6
_MJ = 1e-3


@dataclass(frozen=True)
class EnergyConstants:
    """Mica2dot unit costs; any field may be overridden per scenario."""

    c_tx: float = 1.984  # uJ/bit
    c_rx: float = 0.750  # uJ/bit
    aes_enc: float = 1.62  # uJ/byte
    aes_dec: float = 2.49  # uJ/byte
    sha1: float = 5.9  # uJ/byte
    ecdh_pointmul_160: float = 22.3  # mJ
    rsa1024_verify: float = 11.9  # mJ
    # report-only
    ecdsa160_sign: float = 22.82  # mJ
    ecdsa160_verify: float = 45.09  # mJ
    rsa1024_sign: float = 304.0  # mJ

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ValueError(f"energy constant {f.name} must be strictly positive, got {value!r}")

    def with_overrides(self, **overrides: float) -> "EnergyConstants":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"unknown energy constants: {sorted(unknown)}")
        return replace(self, **overrides)


DEFAULT_CONSTANTS = EnergyConstants()


def frame_bits(body_bits: int) -> int:
    """Bits on air for ``ID_A, ID_B, M, MAC{ID_A, ID_B, M}``."""
    return FRAME_OVERHEAD_BITS + body_bits


def mac_input_bytes(body_bits: int) -> int:
    """Bytes hashed for the MAC (IDs plus body, rounded up to whole bytes)."""
    return -(-(HEADER_BITS + body_bits) // 8)


@dataclass(slots=True)
class EnergyLedger:
    tx_bits: int = 0
    rx_bits: int = 0
    enc_ops: int = 0  # 16-byte AES blocks
    dec_ops: int = 0
    sha1_bytes: int = 0
    pointmuls: int = 0
    verifies: int = 0

    def charge_tx(self, body_bits: int, trailer_bits: int = 0) -> None:
        """Transmit one frame: radio bits plus MAC generation.

        ``trailer_bits`` ride on air outside the MAC (e.g. a signature).
        """
        self.tx_bits += FRAME_OVERHEAD_BITS + body_bits + trailer_bits
        self.sha1_bytes += mac_input_bytes(body_bits)

    def charge_rx(self, body_bits: int, trailer_bits: int = 0) -> None:
        """Receive one frame: radio bits plus MAC verification."""
        self.rx_bits += FRAME_OVERHEAD_BITS + body_bits + trailer_bits
        self.sha1_bytes += mac_input_bytes(body_bits)

    def energy(self, constants: EnergyConstants = DEFAULT_CONSTANTS) -> float:
        """Total energy in joules."""
        c = constants
        micro = (
            c.c_tx * self.tx_bits
            + c.c_rx * self.rx_bits
            + AES_BLOCK_BYTES * (c.aes_enc * self.enc_ops + c.aes_dec * self.dec_ops)
            + c.sha1 * self.sha1_bytes
        )
        milli = c.ecdh_pointmul_160 * self.pointmuls + c.rsa1024_verify * self.verifies
        return micro * _UJ + milli * _MJ

    def breakdown(self, constants: EnergyConstants = DEFAULT_CONSTANTS) -> dict[str, float]:
        c = constants
        return {
            "tx": c.c_tx * self.tx_bits * _UJ,
            "rx": c.c_rx * self.rx_bits * _UJ,
            "sha1": c.sha1 * self.sha1_bytes * _UJ,
            "aes": AES_BLOCK_BYTES * (c.aes_enc * self.enc_ops + c.aes_dec * self.dec_ops) * _UJ,
            "pointmul": c.ecdh_pointmul_160 * self.pointmuls * _MJ,
            "verify": c.rsa1024_verify * self.verifies * _MJ,
        }

    def __iadd__(self, other: "EnergyLedger") -> "EnergyLedger":
        self.tx_bits += other.tx_bits
        self.rx_bits += other.rx_bits
        self.enc_ops += other.enc_ops
        self.dec_ops += other.dec_ops
        self.sha1_bytes += other.sha1_bytes
        self.pointmuls += other.pointmuls
        self.verifies += other.verifies
        return self

    def __add__(self, other: "EnergyLedger") -> "EnergyLedger":
        out = EnergyLedger(**asdict(self))
        out += other
        return out

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


def merge_ledgers(ledgers: Iterable[EnergyLedger]) -> EnergyLedger:
    total = EnergyLedger()
    for ledger in ledgers:
        total += ledger
    return total


class Event(NamedTuple):
    """One chargeable occurrence: ``kind`` in {tx, rx, enc, dec, sha1, pointmul, verify}."""

    kind: str
    amount: int = 1


def charge(ledger: EnergyLedger, events: Iterable[Event | tuple[str, int]]) -> EnergyLedger:
    """Apply events to ``ledger`` in place and return it.

    ``tx``/``rx`` amounts are frame body sizes in bits and include the MAC
    hash; ``sha1`` amounts are raw bytes; the others are operation counts.
    """
    for kind, amount in events:
        if amount < 0:
            raise ValueError(f"negative event size: {kind}={amount}")
        if kind == "tx":
            ledger.charge_tx(amount)
        elif kind == "rx":
            ledger.charge_rx(amount)
        elif kind == "enc":
            ledger.enc_ops += amount
        elif kind == "dec":
            ledger.dec_ops += amount
        elif kind == "sha1":
            ledger.sha1_bytes += amount
        elif kind == "pointmul":
            ledger.pointmuls += amount
        elif kind == "verify":
            ledger.verifies += amount
        else:
            raise ValueError(f"unknown ledger event {kind!r}")
    return ledger


# ---------------------------------------------------------------------------
# Closed-form per-node costs
# ---------------------------------------------------------------------------


class BSMessageLengths(NamedTuple):
    L_poll_sk: float
    L_poll_reply: float
    L_poll_reply_s: float
    L_poll_pk: float
    L_ask_key: float


def bs_message_lengths(k: int, d: float, p: float, index_bits: int = 16) -> BSMessageLengths:
    """Body lengths (bits, framing excluded) of the Basic Scheme messages."""
    poll = index_bits * k
    return BSMessageLengths(
        L_poll_sk=poll,
        L_poll_reply=poll,
        L_poll_reply_s=index_bits,
        L_poll_pk=d * (1 - p) * (poll + ID_BITS),
        L_ask_key=ASK_KEY_BITS,
    )


@dataclass(frozen=True)
class CostBreakdown:
    """Per-node energy split, joules; bit and op counts kept for inspection."""

    tx: float
    rx: float
    sha1: float
    computation: float
    tx_bits: float
    rx_bits: float
    sha1_bytes: float
    enc_ops: float = 0.0
    dec_ops: float = 0.0
    pointmuls: float = 0.0
    verifies: float = 0.0

    @property
    def messaging(self) -> float:
        return self.tx + self.rx

    @property
    def total(self) -> float:
        return self.tx + self.rx + self.sha1 + self.computation


def bs_per_node_cost(
    k: int,
    d: float,
    p: float,
    index_bits: int = 16,
    constants: EnergyConstants = DEFAULT_CONSTANTS,
) -> CostBreakdown:
    """Per-node Basic Scheme cost for cascade-off path-key discovery.

    Transmit and receive bit counts follow the framed message sums (the
    literal 16-bit index width is generalised to ``index_bits``).  The MAC
    term hashes the IDs and body of every frame sent and received, i.e. the
    framed bits minus 160 per frame.
    """
    w = index_bits
    F = FRAME_OVERHEAD_BITS
    poll = w * k + F
    pk_bcast = d * (1 - p) * (w * k + ID_BITS) + F
    reply_s = w + F
    reply = w * k + F
    offer = ASK_KEY_BITS + F
    forward = FORWARD_KEY_BITS + F
    offers_per_target = p * p * d

    unicast = p * reply_s + (1 - p) * (reply + offers_per_target * offer + forward)
    tx_bits = poll + pk_bcast + d * unicast
    rx_bits = d * (poll + pk_bcast + unicast)

    unicast_frames = 1 + (1 - p) * (offers_per_target + 1)
    tx_frames = 2 + d * unicast_frames
    rx_frames = d * (2 + unicast_frames)
    sha1_bytes = ((tx_bits - MAC_BITS * tx_frames) + (rx_bits - MAC_BITS * rx_frames)) / 8

    enc_ops = 2 * p * p * (1 - p) * d * d
    dec_ops = 2 * (1 - p) * d
    c = constants
    return CostBreakdown(
        tx=c.c_tx * tx_bits * _UJ,
        rx=c.c_rx * rx_bits * _UJ,
        sha1=c.sha1 * sha1_bytes * _UJ,
        computation=AES_BLOCK_BYTES * (c.aes_enc * enc_ops + c.aes_dec * dec_ops) * _UJ,
        tx_bits=tx_bits,
        rx_bits=rx_bits,
        sha1_bytes=sha1_bytes,
        enc_ops=enc_ops,
        dec_ops=dec_ops,
    )


def ecdh_per_node_cost(
    d: float,
    constants: EnergyConstants = DEFAULT_CONSTANTS,
    rsa_overlay: bool = False,
) -> CostBreakdown:
    """Per-node ECDH cost: one poll, ``d`` replies, ``d`` point multiplications.

    With the RSA overlay each message carries a 1024-bit signature (outside
    the MAC) and every link costs one signature verification per side.
    """
    sig = RSA_SIGNATURE_BITS if rsa_overlay else 0
    msg = ECC_PUBLIC_BITS + FRAME_OVERHEAD_BITS + sig  # 352 (+1024)
    tx_bits = msg * (1 + d)
    rx_bits = msg * 2 * d
    sha1_bytes = (HEADER_BITS + ECC_PUBLIC_BITS) * (1 + 3 * d) / 8  # (192 + 576 d) / 8
    c = constants
    pointmuls = d
    verifies = d if rsa_overlay else 0.0
    return CostBreakdown(
        tx=c.c_tx * tx_bits * _UJ,
        rx=c.c_rx * rx_bits * _UJ,
        sha1=c.sha1 * sha1_bytes * _UJ,
        computation=(c.ecdh_pointmul_160 * pointmuls + c.rsa1024_verify * verifies) * _MJ,
        tx_bits=tx_bits,
        rx_bits=rx_bits,
        sha1_bytes=sha1_bytes,
        pointmuls=pointmuls,
        verifies=verifies,
    )
