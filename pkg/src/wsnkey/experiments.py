"""Scenario files, replicated runs, sweeps and CSV output.

Scenario files are ``key = value`` lines with ``#`` comments; lists are
comma separated.  Energy-constant overrides use the constant's field name,
e.g. ``c_tx = 2.0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .costmodel import DEFAULT_CONSTANTS, EnergyConstants, bs_per_node_cost, ecdh_per_node_cost
from .errors import ConfigError, ParameterError
from .keys_bs import BasicScheme, shared_key_probability
from .keys_ecdh import ECDHScheme, NoSecurity
from .netconfig import ConfigOutcome, Selection, run_configuration
from .resilience import LinkTable, resilience_curve
from .seeding import derive_seed
from .topology import Topology, deploy

PROTOCOLS = ("bs", "ecdh", "ecdh_rsa", "none")
_CONSTANT_FIELDS = {f.name for f in fields(EnergyConstants)}


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"expected on/off, got {value!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 2000
    d: float = 8.0
    protocol: str = "bs"
    selection: str = "proactive"
    cascade: bool | None = None  # None -> mode default
    P: int | None = None
    k: int | None = None
    index_bits: int | None = None
    strict_index_bits: bool = False
    max_cluster_size: int = 32
    runs: int = 10
    seed: int = 1
    capture_counts: tuple[int, ...] = ()
    trials: int = 200
    torus: bool = False
    first_initiator: int | None = None
    constants: EnergyConstants = DEFAULT_CONSTANTS
    name: str = "scenario"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        try:
            sel = Selection.parse(self.selection)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        if self.protocol == "bs":
            missing = [f for f in ("P", "k") if getattr(self, f) is None]
            if missing:
                raise ConfigError(f"protocol bs requires {', '.join(missing)}")
        elif self.protocol.startswith("ecdh") and sel is Selection.STRAIGHT:
            raise ConfigError("ecdh has no straight selection mode")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.max_cluster_size < 2:
            raise ConfigError(f"max_cluster_size must be >= 2, got {self.max_cluster_size}")
        if self.n < 1 or not self.d > 0:
            raise ConfigError(f"invalid deployment n={self.n}, d={self.d}")
        try:
            self.scheme()
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def mode(self) -> Selection:
        return Selection.parse(self.selection)

    def scheme(self):
        if self.protocol == "bs":
            return BasicScheme(self.P, self.k, self.index_bits, self.strict_index_bits)
        if self.protocol == "none":
            return NoSecurity()
        return ECDHScheme(rsa_overlay=self.protocol == "ecdh_rsa")

    def with_param(self, name: str, value) -> "ScenarioConfig":
        if name not in ("k", "P", "d", "n"):
            raise ConfigError(f"cannot sweep {name!r}; choose k, P, d or n")
        if name in ("k", "P") and self.protocol != "bs":
            raise ConfigError(f"parameter {name} only applies to bs")
        cast = float if name == "d" else int
        try:
            return replace(self, **{name: cast(value)})
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None


_INT_KEYS = {"n", "P", "k", "index_bits", "max_cluster_size", "runs", "seed", "trials", "first_initiator"}


def parse_config(text: str, name: str = "scenario") -> ScenarioConfig:
    values: dict = {"name": name}
    overrides: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key_l = key.lower()
        try:
            if key in _CONSTANT_FIELDS:
                overrides[key] = float(value)
            elif key in ("P", "pool_size"):
                values["P"] = int(value)
            elif key in ("k", "ring_size"):
                values["k"] = int(value)
            elif key_l in _INT_KEYS:
                values[key_l] = int(value)
            elif key_l in ("d", "degree"):
                values["d"] = float(value)
            elif key_l in ("protocol", "selection", "name"):
                values[key_l] = value.lower() if key_l != "name" else value
            elif key_l in ("cascade", "strict_index_bits", "torus"):
                values[key_l] = _parse_bool(value)
            elif key_l == "capture_counts":
                values[key_l] = tuple(int(v) for v in value.split(",") if v.strip())
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    if overrides:
        try:
            values["constants"] = DEFAULT_CONSTANTS.with_overrides(**overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return ScenarioConfig(**values)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, name=path.stem)


@dataclass
class ResultRow:
    scenario: str
    run: int | str
    connectivity: float
    total_energy: float
    tx_bits: float
    rx_bits: float
    enc_ops: float
    dec_ops: float
    sha1_bytes: float
    pointmuls: float
    verifies: float
    links_secured: float
    mean_secure_degree: float


ROW_FIELDS = [f.name for f in fields(ResultRow)]
_NUMERIC = ROW_FIELDS[2:]


@lru_cache(maxsize=64)
def _deploy_cached(n: int, d: float, seed: int, torus: bool) -> Topology:
    return deploy(n, d, seed, torus=torus)


def run_seed(cfg: ScenarioConfig, i: int) -> int:
    return derive_seed(cfg.seed, "run", i)


def run_once(cfg: ScenarioConfig, i: int) -> tuple[Topology, ConfigOutcome, object]:
    """Deploy and configure replicate ``i``; returns (topology, outcome, key layer)."""
    s = run_seed(cfg, i)
    t = _deploy_cached(cfg.n, cfg.d, s, cfg.torus)
    scheme = cfg.scheme()
    layer = scheme.build(t, s)
    o = run_configuration(
        t,
        scheme,
        cfg.mode,
        cascade=cfg.cascade,
        max_cluster_size=cfg.max_cluster_size,
        seed=s,
        first_initiator=cfg.first_initiator,
        layer=layer,
    )
    return t, o, layer


def outcome_row(cfg: ScenarioConfig, i: int, o: ConfigOutcome) -> ResultRow:
    L = o.ledger
    return ResultRow(
        scenario=cfg.name,
        run=i,
        connectivity=o.connectivity(),
        total_energy=L.energy(cfg.constants),
        tx_bits=L.tx_bits,
        rx_bits=L.rx_bits,
        enc_ops=L.enc_ops,
        dec_ops=L.dec_ops,
        sha1_bytes=L.sha1_bytes,
        pointmuls=L.pointmuls,
        verifies=L.verifies,
        links_secured=len(o.links),
        mean_secure_degree=2 * len(o.links) / o.n,
    )


def summarize(rows: Sequence[ResultRow], scenario: str) -> tuple[ResultRow, ResultRow]:
    """Mean and sample standard deviation rows (std is 0 for a single run)."""
    data = np.array([[getattr(r, f) for f in _NUMERIC] for r in rows], dtype=float)
    mean = data.mean(axis=0)
    std = data.std(axis=0, ddof=1) if len(rows) > 1 else np.zeros_like(mean)
    return (
        ResultRow(scenario, "mean", *mean.tolist()),
        ResultRow(scenario, "std", *std.tolist()),
    )


def run_scenario(cfg: ScenarioConfig) -> tuple[list[ResultRow], ResultRow, ResultRow]:
    rows = [outcome_row(cfg, i, run_once(cfg, i)[1]) for i in range(cfg.runs)]
    mean, std = summarize(rows, cfg.name)
    return rows, mean, std


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) or (isinstance(value, float) and value.is_integer() and abs(value) < 1e15):
        return str(int(value))
    return f"{value:.6g}"


def write_rows(path: str | Path, rows: Sequence[ResultRow], extra: dict[str, object] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    extra = extra or {}
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(extra) + ROW_FIELDS)
        for r in rows:
            w.writerow([_fmt(v) for v in extra.values()] + [_fmt(getattr(r, f)) for f in ROW_FIELDS])
    return path


def _network_total(cfg: ScenarioConfig, d: float) -> float:
    if cfg.protocol == "bs":
        p = shared_key_probability(cfg.P, cfg.k)
        bits = cfg.scheme().message_index_bits
        per = bs_per_node_cost(cfg.k, d, p, bits, cfg.constants).total
    elif cfg.protocol == "none":
        per = 0.0
    else:
        per = ecdh_per_node_cost(d, cfg.constants, rsa_overlay=cfg.protocol == "ecdh_rsa").total
    return per * cfg.n


def analyze(cfg: ScenarioConfig) -> dict[str, float]:
    """Closed-form per-node breakdown and network total (joules)."""
    d = cfg.d
    if cfg.protocol == "bs":
        p = shared_key_probability(cfg.P, cfg.k)
        c = bs_per_node_cost(cfg.k, d, p, cfg.scheme().message_index_bits, cfg.constants)
        extra = {"p": p}
    elif cfg.protocol == "none":
        return {"network_total": 0.0}
    else:
        c = ecdh_per_node_cost(d, cfg.constants, rsa_overlay=cfg.protocol == "ecdh_rsa")
        extra = {}
    out = dict(extra)
    out.update(
        per_node_tx=c.tx,
        per_node_rx=c.rx,
        per_node_sha1=c.sha1,
        per_node_computation=c.computation,
        per_node_total=c.total,
        network_total=c.total * cfg.n,
    )
    return out


@dataclass
class Comparison:
    value: float
    analytic: float
    simulated: float
    per_run: list[float] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.analytic / self.simulated if self.simulated else math.inf


def compare_analysis_vs_sim(cfg: ScenarioConfig, param: str = "k", values: Sequence | None = None) -> list[Comparison]:
    """Analytic network total (nominal degree, times n) against simulation.

    BS analysis assumes a single path-key round, so cascade defaults to off.
    """
    if cfg.protocol == "bs" and cfg.cascade is None:
        cfg = replace(cfg, cascade=False)
    if values is None:
        values = [getattr(cfg, param)]
    out = []
    for value in values:
        c = cfg.with_param(param, value)
        rows, mean, _ = run_scenario(c)
        out.append(Comparison(float(value), _network_total(c, c.d), mean.total_energy, [r.total_energy for r in rows]))
    return out


def sweep(cfg: ScenarioConfig, param: str, values: Sequence) -> list[tuple[object, ResultRow, ResultRow, list[ResultRow]]]:
    out = []
    for value in values:
        c = cfg.with_param(param, value)
        rows, mean, std = run_scenario(c)
        out.append((value, mean, std, rows))
    return out


def threshold(points: Sequence[tuple[float, float]], target: float = 0.99) -> float | None:
    """Smallest swept value whose mean connectivity reaches ``target``."""
    for value, conn in sorted(points):
        if conn >= target:
            return value
    return None


def write_sweep(path: str | Path, param: str, results) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([param, "stat"] + ROW_FIELDS[2:])
        for value, mean, std, _ in results:
            for r in (mean, std):
                w.writerow([_fmt(value), r.run] + [_fmt(getattr(r, f)) for f in ROW_FIELDS[2:]])
    return path


def run_resilience(cfg: ScenarioConfig, captures: Sequence[int], trials: int) -> list[tuple[int, float, float]]:
    """Resilience curve pooled over the scenario's replicated networks."""
    per_run = []
    for i in range(cfg.runs):
        t, o, layer = run_once(cfg, i)
        if not o.links:
            continue
        if cfg.protocol == "bs":
            table = LinkTable(o.links.values(), t.n, [r.indexes for r in layer.rings], cfg.P)
        else:
            table = LinkTable(o.links.values(), t.n)
        per_run.append(resilience_curve(table, captures, trials, derive_seed(cfg.seed, "capture-run", i)))
    if not per_run:
        raise ParameterError("no links established; resilience is undefined")
    out = []
    for j, m in enumerate(captures):
        means = np.array([c[j][1] for c in per_run])
        sds = np.array([c[j][2] for c in per_run])
        pooled = math.sqrt(float(np.mean(sds**2) + (means.var() if len(means) > 1 else 0.0)))
        out.append((int(m), float(means.mean()), pooled))
    return out


def config_dict(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    d["constants"] = asdict(cfg.constants)
    return d
