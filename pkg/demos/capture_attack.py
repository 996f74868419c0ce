"""Fraction of links an attacker learns by capturing random nodes.

Pool keys are shared by many nodes, so each captured ring also exposes links
between nodes that were never touched.  Pairwise ECDH keys only fall with
their endpoints.

    python3 demos/capture_attack.py
"""

from wsnkey.keys_bs import BasicScheme
from wsnkey.keys_ecdh import ECDHScheme
from wsnkey.netconfig import run_configuration
from wsnkey.resilience import LinkTable, ecdh_expected_fraction, resilience_curve
from wsnkey.topology import deploy

SEED = 3
CAPTURES = [0, 50, 100, 200, 300, 500, 1000]


def main():
    t = deploy(2000, 8, SEED)

    tables = {}
    for label, P, k, sel in (("bs P=10k k=100", 10000, 100, "proactive"), ("bs P=100k k=300", 100000, 300, "proactive")):
        scheme = BasicScheme(P, k)
        layer = scheme.build(t, SEED)
        o = run_configuration(t, scheme, sel, seed=SEED, layer=layer)
        tables[label] = LinkTable(o.links.values(), t.n, [r.indexes for r in layer.rings], P)
    o = run_configuration(t, ECDHScheme(), "proactive", seed=SEED)
    tables["ecdh"] = LinkTable(o.links.values(), t.n)

    print("m     " + "".join(f"{name:>18}" for name in tables) + "   ecdh closed form")
    curves = {name: resilience_curve(tab, CAPTURES, 100, SEED) for name, tab in tables.items()}
    for i, m in enumerate(CAPTURES):
        row = "".join(f"{curves[name][i][1]:18.4f}" for name in tables)
        print(f"{m:<6}{row}   {ecdh_expected_fraction(t.n, m):.4f}")


if __name__ == "__main__":
    main()
