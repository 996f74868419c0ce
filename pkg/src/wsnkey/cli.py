"""Command-line entry: ``python -m wsnkey <verb> ...``.

Exit status is 0 on success and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError, ParameterError
from .resilience import write_curve


def _split(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in _split(text)]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wsnkey", description="Key establishment energy and resilience simulator.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="replicated simulation of one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=["k", "P", "d", "n"])
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--out", required=True)
    p.add_argument("--target", type=float, default=0.99, help="connectivity threshold to report")

    p = sub.add_parser("analyze", help="closed-form costs only")
    p.add_argument("--config", required=True)

    p = sub.add_parser("resilience", help="node-capture resilience curve")
    p.add_argument("--config", required=True)
    p.add_argument("--captures", required=True, help="comma-separated capture counts")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out", required=True)
    return ap


def _run(args) -> None:
    cfg = ex.load_config(args.config)
    out = Path(args.out)
    if args.verb == "run":
        rows, mean, std = ex.run_scenario(cfg)
        path = ex.write_rows(out / f"{cfg.name}.csv", rows + [mean, std])
        print(f"{cfg.name}: connectivity {mean.connectivity:.4f}, energy {mean.total_energy / 1e3:.4g} kJ -> {path}")
    elif args.verb == "sweep":
        values = _split(args.values)
        if not values:
            raise ConfigError("--values is empty")
        results = ex.sweep(cfg, args.param, values)
        path = ex.write_sweep(out / f"{cfg.name}_{args.param}.csv", args.param, results)
        for value, mean, _, _ in results:
            print(f"{args.param}={value}: connectivity {mean.connectivity:.4f}, energy {mean.total_energy / 1e3:.4g} kJ")
        thr = ex.threshold([(float(v), m.connectivity) for v, m, _, _ in results], args.target)
        print(f"smallest {args.param} reaching {args.target:.0%}: {thr if thr is not None else 'none'} -> {path}")
    elif args.verb == "resilience":
        if args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        captures = _ints(args.captures)
        curve = ex.run_resilience(cfg, captures, args.trials)
        path = write_curve(curve, out / f"{cfg.name}_resilience.csv", args.trials * cfg.runs)
        for m, mean, sd in curve:
            print(f"m={m}: {mean:.4f} +/- {sd:.4f}")
        print(f"-> {path}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "analyze":
            cfg = ex.load_config(args.config)
            for key, value in ex.analyze(cfg).items():
                print(f"{key} = {value:.6g}")
        else:
            _run(args)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
