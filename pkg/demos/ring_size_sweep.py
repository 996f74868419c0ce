"""How large must a key ring be before the network configures itself?

Sweeps the ring size for each link-selection mode and reports the smallest
size whose mean connectivity reaches 99%.  Uses fewer runs than the
acceptance suite so it finishes in about a minute.

    python3 demos/ring_size_sweep.py
"""

from wsnkey.experiments import ScenarioConfig, sweep, threshold

RUNS = 4


def main():
    for selection, ks in (("straight", range(120, 201, 20)), ("reactive", range(60, 141, 20))):
        base = ScenarioConfig(protocol="bs", P=10000, k=100, selection=selection, runs=RUNS)
        results = sweep(base, "k", list(ks))
        print(f"\n{selection}")
        for k, mean, std, _ in results:
            print(f"  k={k:3d}  conn {mean.connectivity:.4f} +/- {std.connectivity:.4f}  "
                  f"energy {mean.total_energy:.1f} J")
        thr = threshold([(k, m.connectivity) for k, m, _, _ in results])
        print(f"  smallest k reaching 99%: {thr}")


if __name__ == "__main__":
    main()
