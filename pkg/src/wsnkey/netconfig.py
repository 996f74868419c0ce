"""Self-organising multi-hop clustering with key establishment folded into
neighbour discovery.

A cluster starts at an initiator and grows breadth-first over secure links
until it holds ``max_cluster_size`` members.  Members admitted once the
cluster is full become gateway candidates; when a cluster closes, each
candidate competes with adjacent candidates and winners hand off to a new
initiator outside the cluster.  The run ends when no cluster can grow.

The event loop is a FIFO of configuration messages.  Delivering one runs the
receiver's state change, its discovery poll (the key layer's hook) and its
follow-up action as a single step, so nodes that are invited but not yet
reached still look Floating to everyone else.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .costmodel import FRAME_OVERHEAD_BITS, EnergyLedger, merge_ledgers
from .errors import ParameterError
from .links import SecureLink
from .topology import Topology


class Selection(Enum):
    STRAIGHT = "straight"
    REACTIVE = "reactive"
    PROACTIVE = "proactive"

    @classmethod
    def parse(cls, value: "Selection | str") -> "Selection":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ParameterError(f"unknown selection mode {value!r}") from None

    @property
    def default_cascade(self) -> bool:
        return self is Selection.PROACTIVE


class NodeState(Enum):
    FLOATING = "floating"
    INITIATOR = "initiator"
    NODE = "node"
    GATEWAY_C = "gateway_c"
    GATEWAY = "gateway"


LEGAL_TRANSITIONS = {
    NodeState.FLOATING: frozenset({NodeState.INITIATOR, NodeState.NODE, NodeState.GATEWAY_C}),
    NodeState.GATEWAY_C: frozenset({NodeState.GATEWAY, NodeState.NODE}),
    NodeState.INITIATOR: frozenset(),
    NodeState.NODE: frozenset(),
    NodeState.GATEWAY: frozenset(),
}


class ConfigKind(Enum):
    START = "start"  # become the initiator of a new cluster
    INNER = "inner"
    BORDER = "border"


class Action(Enum):
    DISCOVER = "discover"  # one neighbour-discovery broadcast
    EXTEND = "extend"
    CONTEND = "contend"
    SELECT_INITIATOR = "select_initiator"


@dataclass(frozen=True)
class ConfigMessage:
    dst: int
    kind: ConfigKind
    cluster: int
    src: int | None = None


@dataclass(frozen=True)
class DiscoveryDone:
    """Reply-collection timer expiry after the poll."""

    dst: int


@dataclass(frozen=True)
class ContentionResult:
    dst: int
    won: bool


@dataclass
class NodeRuntime:
    id: int
    state: NodeState = NodeState.FLOATING
    cluster_id: int | None = None
    role: ConfigKind | None = None
    neighbor_registry: dict[int, tuple[NodeState, bool]] = field(default_factory=dict)
    secure_links: dict[int, SecureLink] = field(default_factory=dict)
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    polls: int = 0

    def _move(self, new: NodeState) -> None:
        assert new in LEGAL_TRANSITIONS[self.state], f"illegal transition {self.state} -> {new}"
        self.state = new


def step_node(rt: NodeRuntime, event) -> tuple[NodeRuntime, list[Action]]:
    """Advance one node's state machine; ``rt`` is updated in place."""
    assert getattr(event, "dst", None) == rt.id, f"event {event!r} not addressed to node {rt.id}"
    if isinstance(event, ConfigMessage):
        if rt.state is not NodeState.FLOATING:
            return rt, []
        if event.kind is ConfigKind.START:
            rt._move(NodeState.INITIATOR)
        elif event.kind is ConfigKind.INNER:
            rt._move(NodeState.NODE)
        else:
            rt._move(NodeState.GATEWAY_C)
        rt.cluster_id = event.cluster
        rt.role = event.kind
        return rt, [Action.DISCOVER]
    if isinstance(event, DiscoveryDone):
        assert rt.state is not NodeState.FLOATING, "discovery finished on a floating node"
        if rt.role is ConfigKind.BORDER:
            return rt, [Action.CONTEND]
        return rt, [Action.EXTEND]
    if isinstance(event, ContentionResult):
        assert rt.state is NodeState.GATEWAY_C, f"contention result sent to {rt.state}"
        if event.won:
            rt._move(NodeState.GATEWAY)
            return rt, [Action.SELECT_INITIATOR]
        rt._move(NodeState.NODE)
        return rt, []
    raise AssertionError(f"malformed event {event!r}")


def gateway_contention(candidates: list[tuple[int, int]]) -> int:
    """Largest floating-neighbour count wins; ties go to the smallest id."""
    assert candidates, "gateway contention needs at least one candidate"
    return min(candidates, key=lambda c: (-c[1], c[0]))[0]


def select_initiator(gw, responders: list[tuple[int, float, int]]) -> int | None:
    """Closest responder that itself has a floating neighbour, else the closest."""
    if not responders:
        return None
    suitable = [r for r in responders if r[2] >= 1]
    pool = suitable or responders
    return min(pool, key=lambda r: (r[1], r[0]))[0]


@dataclass
class _Cluster:
    id: int
    members: list[int] = field(default_factory=list)
    pending: int = 0
    candidates: list[int] = field(default_factory=list)


class World:
    """Mutable state of one configuration run, seen by the key layer."""

    def __init__(self, t: Topology, selection: Selection, cascade: bool, trace: bool = False):
        self.topo = t
        self.selection = selection
        self.cascade = cascade
        self.nodes = [NodeRuntime(i) for i in range(t.n)]
        self.links: dict[tuple[int, int], SecureLink] = {}
        self.pending: set[int] = set()
        self.trace: list[tuple] | None = [] if trace else None
        self.bcast_tx_bits = 0
        self.bcast_rx_bits = 0
        self.ucast_tx_bits = 0
        self.ucast_rx_bits = 0

    def is_floating(self, v: int) -> bool:
        return self.nodes[v].state is NodeState.FLOATING

    def link(self, u: int, v: int) -> SecureLink | None:
        return self.nodes[u].secure_links.get(v)

    def ledger(self, v: int) -> EnergyLedger:
        return self.nodes[v].ledger

    def add_link(self, link: SecureLink) -> None:
        key = (link.u, link.v)
        assert key not in self.links, f"duplicate link {key}"
        self.links[key] = link
        self.nodes[link.u].secure_links[link.v] = link
        self.nodes[link.v].secure_links[link.u] = link

    def register(self, a: int, v: int, secured: bool) -> None:
        self.nodes[a].neighbor_registry[v] = (self.nodes[v].state, secured)

    def broadcast(self, src: int, body_bits: int, receivers, kind: str, extra_bits: int = 0) -> None:
        """One frame from ``src``; only ``receivers`` process (and pay for) it."""
        nodes = self.nodes
        nodes[src].ledger.charge_tx(body_bits, extra_bits)
        if kind == "poll":
            nodes[src].polls += 1
        for r in receivers:
            nodes[r].ledger.charge_rx(body_bits, extra_bits)
        framed = self._framed(body_bits, extra_bits)
        self.bcast_tx_bits += framed
        self.bcast_rx_bits += framed * len(receivers)
        if self.trace is not None:
            self.trace.append((kind, src, tuple(receivers), body_bits + extra_bits))

    def unicast(self, src: int, dst: int, body_bits: int, kind: str, extra_bits: int = 0) -> None:
        self.nodes[src].ledger.charge_tx(body_bits, extra_bits)
        self.nodes[dst].ledger.charge_rx(body_bits, extra_bits)
        framed = self._framed(body_bits, extra_bits)
        self.ucast_tx_bits += framed
        self.ucast_rx_bits += framed
        if self.trace is not None:
            self.trace.append((kind, src, dst, body_bits + extra_bits))

    @staticmethod
    def _framed(body_bits: int, extra_bits: int) -> int:
        return FRAME_OVERHEAD_BITS + body_bits + extra_bits

    # helpers for the configuration logic
    def open_secure_neighbors(self, v: int) -> list[int]:
        """Floating, not yet invited neighbours holding a link key with ``v``."""
        links = self.nodes[v].secure_links
        return [
            u
            for u in self.topo.adjacency[v]
            if u in links and self.nodes[u].state is NodeState.FLOATING and u not in self.pending
        ]

    def floating_count(self, v: int) -> int:
        return sum(
            1 for u in self.topo.adjacency[v] if self.nodes[u].state is NodeState.FLOATING and u not in self.pending
        )


@dataclass
class ConfigOutcome:
    n: int
    states: tuple[NodeState, ...]
    node_cluster: tuple[int | None, ...]
    clusters: dict[int, tuple[int, ...]]
    links: dict[tuple[int, int], SecureLink]
    ledgers: tuple[EnergyLedger, ...]
    ledger: EnergyLedger
    configured_count: int
    polls: tuple[int, ...]
    tree_edges: tuple[tuple[int, int, str], ...]  # (parent, child, "member" | "handoff")
    transitions: tuple[tuple[int, NodeState, NodeState], ...]
    registries: tuple[dict, ...] = ()
    traffic: dict[str, int] = field(default_factory=dict)
    trace: list[tuple] | None = None

    def connectivity(self) -> float:
        return self.configured_count / self.n if self.n else 0.0

    def secure_degree(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.links:
            deg[u] += 1
            deg[v] += 1
        return deg


def global_connectivity(o: ConfigOutcome, n: int | None = None) -> float:
    n = o.n if n is None else n
    return o.configured_count / n if n else 0.0


def default_first_initiator(t: Topology) -> int:
    """Smallest id whose degree reaches the target degree, else any with a neighbour.

    A start on a sparse border node can leave the whole run stuck at one node.
    """
    degrees = t.degrees
    for need in (math.ceil(t.target_degree), 1):
        hits = (degrees >= need).nonzero()[0]
        if hits.size:
            return int(hits[0])
    return 0


def run_configuration(
    t: Topology,
    key_layer,
    selection: Selection | str = Selection.PROACTIVE,
    cascade: bool | None = None,
    max_cluster_size: int = 32,
    seed: int = 0,
    *,
    first_initiator: int | None = None,
    trace: bool = False,
    layer=None,
) -> ConfigOutcome:
    """Configure the whole network and return final states, links and ledgers.

    Args:
        key_layer: a scheme object with ``supports(selection)`` and
            ``build(topology, seed)``.
        cascade: repeat path-key rounds while they make progress; defaults
            to on for proactive and off otherwise.
        layer: prebuilt key material (skips ``key_layer.build``).
    """
    selection = Selection.parse(selection)
    if max_cluster_size < 2:
        raise ParameterError(f"max_cluster_size must be >= 2, got {max_cluster_size}")
    if not key_layer.supports(selection):
        raise ParameterError(f"{type(key_layer).__name__} does not support {selection.value} selection")
    if cascade is None:
        cascade = selection.default_cascade
    if first_initiator is not None and not 0 <= first_initiator < t.n:
        raise ParameterError(f"first initiator {first_initiator} out of range")
    if layer is None:
        layer = key_layer.build(t, seed)

    w = World(t, selection, bool(cascade), trace=trace)
    nodes = w.nodes
    transitions: list[tuple[int, NodeState, NodeState]] = []
    tree: list[tuple[int, int, str]] = []
    clusters: list[_Cluster] = []
    queue: deque[ConfigMessage] = deque()

    def step(v: int, event) -> list[Action]:
        rt = nodes[v]
        before = rt.state
        _, actions = step_node(rt, event)
        if rt.state is not before:
            transitions.append((v, before, rt.state))
        return actions

    def invite(dst: int, kind: ConfigKind, cl: _Cluster, src: int | None) -> None:
        cl.pending += 1
        w.pending.add(dst)
        queue.append(ConfigMessage(dst, kind, cl.id, src))

    def new_cluster(start: int, gw: int | None) -> None:
        cl = _Cluster(len(clusters))
        clusters.append(cl)
        invite(start, ConfigKind.START, cl, gw)
        if gw is not None:
            tree.append((gw, start, "handoff"))

    def close(cl: _Cluster) -> None:
        cands = sorted(cl.candidates)
        if not cands:
            return
        cset = set(cands)
        reach = {g: set(w.open_secure_neighbors(g)) for g in cands}
        counts = {g: len(r) for g, r in reach.items()}
        winners = []
        for g in cands:
            # rivals are adjacent candidates that could serve the same floating nodes
            rivals = [c for c in t.adjacency[g] if c in cset and reach[c] & reach[g]]
            local = [(g, counts[g])] + [(c, counts[c]) for c in rivals]
            won = counts[g] > 0 and gateway_contention(local) == g
            if won:
                winners.append(g)
            else:
                step(g, ContentionResult(g, False))
        for g in winners:
            step(g, ContentionResult(g, True))
            gdist = t.distance
            responders = [(u, gdist(g, u), w.floating_count(u)) for u in w.open_secure_neighbors(g)]
            chosen = select_initiator(nodes[g], responders)
            if chosen is not None:
                new_cluster(chosen, g)

    if first_initiator is None:
        first_initiator = default_first_initiator(t)
    new_cluster(first_initiator, None)

    while queue:
        msg = queue.popleft()
        v = msg.dst
        cl = clusters[msg.cluster]
        cl.pending -= 1
        w.pending.discard(v)
        if nodes[v].state is not NodeState.FLOATING:
            if cl.pending == 0:
                close(cl)
            continue
        kind = msg.kind
        if kind is not ConfigKind.START:
            room = max_cluster_size - (len(cl.members) + 1) - cl.pending
            kind = ConfigKind.INNER if room > 0 else ConfigKind.BORDER
        actions = step(v, ConfigMessage(v, kind, cl.id, msg.src))
        cl.members.append(v)
        if msg.src is not None and kind is not ConfigKind.START:
            tree.append((msg.src, v, "member"))
        assert actions == [Action.DISCOVER]
        layer.establish_links(w, v)
        for action in step(v, DiscoveryDone(v)):
            if action is Action.EXTEND:
                room = max_cluster_size - len(cl.members) - cl.pending
                if room > 0:
                    cands = w.open_secure_neighbors(v)
                    cands.sort(key=lambda u: (t.distance(v, u), u))
                    for u in cands[:room]:
                        invite(u, ConfigKind.INNER, cl, v)
            elif action is Action.CONTEND:
                cl.candidates.append(v)
        if cl.pending == 0:
            close(cl)

    states = tuple(rt.state for rt in nodes)
    ledgers = tuple(rt.ledger for rt in nodes)
    return ConfigOutcome(
        n=t.n,
        states=states,
        node_cluster=tuple(rt.cluster_id for rt in nodes),
        clusters={c.id: tuple(c.members) for c in clusters},
        links=w.links,
        ledgers=ledgers,
        ledger=merge_ledgers(ledgers),
        configured_count=sum(s is not NodeState.FLOATING for s in states),
        polls=tuple(rt.polls for rt in nodes),
        tree_edges=tuple(tree),
        transitions=tuple(transitions),
        registries=tuple(rt.neighbor_registry for rt in nodes),
        traffic={
            "broadcast_tx_bits": w.bcast_tx_bits,
            "broadcast_rx_bits": w.bcast_rx_bits,
            "unicast_tx_bits": w.ucast_tx_bits,
            "unicast_rx_bits": w.ucast_rx_bits,
        },
        trace=w.trace,
    )
