"""Small builders shared by the unit tests."""

import numpy as np

from wsnkey.netconfig import Selection, World
from wsnkey.topology import Topology


def graph(n, edges, positions=None):
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    if positions is None:
        positions = np.column_stack([np.arange(n, dtype=float) * 0.1, np.zeros(n)])
    return Topology(
        n=n,
        positions=np.asarray(positions, dtype=float),
        radio_range=1.0,
        area_side=10.0,
        adjacency=tuple(tuple(sorted(a)) for a in nbrs),
        target_degree=2.0,
        seed=0,
    )


def star(d):
    return graph(d + 1, [(0, i) for i in range(1, d + 1)])


def world(t, selection="proactive", cascade=None):
    sel = Selection.parse(selection)
    return World(t, sel, sel.default_cascade if cascade is None else cascade, trace=True)


ACCEPTANCE_LINES = []


def report(label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
