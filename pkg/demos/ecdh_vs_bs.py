"""Energy and connectivity of the two key-establishment schemes on one deployment.

Runs ECDH and the Basic Scheme in each link-selection mode over the same
2000-node network and prints where the energy goes.

    python3 demos/ecdh_vs_bs.py
"""

from wsnkey.keys_bs import BasicScheme
from wsnkey.keys_ecdh import ECDHScheme
from wsnkey.netconfig import run_configuration
from wsnkey.topology import deploy

SEED = 7


def show(label, outcome):
    parts = outcome.ledger.breakdown()
    split = ", ".join(f"{k} {v:.1f}" for k, v in parts.items() if v)
    print(f"{label:<28} conn {outcome.connectivity():.4f}  links {len(outcome.links):5d}  "
          f"energy {outcome.ledger.energy() / 1e3:.4f} kJ  ({split} J)")


def main():
    t = deploy(2000, 8, SEED)
    print(f"deployment: n={t.n}, mean degree {t.mean_degree():.2f} (interior {t.interior_mean_degree():.2f})\n")

    for sel in ("proactive", "reactive"):
        show(f"ecdh {sel}", run_configuration(t, ECDHScheme(), sel, seed=SEED))
    show("ecdh+rsa reactive", run_configuration(t, ECDHScheme(rsa_overlay=True), "reactive", seed=SEED))

    # the same rings are reused across modes so only the selection policy differs
    scheme = BasicScheme(P=10000, k=100)
    layer = scheme.build(t, SEED)
    for sel in ("straight", "reactive", "proactive"):
        show(f"bs P=10000 k=100 {sel}", run_configuration(t, scheme, sel, seed=SEED, layer=layer))


if __name__ == "__main__":
    main()
