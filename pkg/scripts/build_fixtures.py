"""Regenerate the network fixtures in fixtures/.

Each fixture is written in canonical form (the same bytes ``hetnet validate``
would re-serialize), so the files double as round-trip snapshots.

    python scripts/build_fixtures.py
"""
from pathlib import Path

from hetnet.model import Connection, Equilibrium, Network, Roles, dumps

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def axial(n, table, edges, roles=None, axes=None):
    """Build a network from {id: row} and [(i, j, subspace)]; dim = |S| - 1."""
    axes = axes or {j: j for j in table}
    eqs = tuple(Equilibrium(j, axes[j]) for j in sorted(table))
    conns = tuple(Connection(i, j, len(s) - 1, frozenset(s)) for i, j, s in edges)
    return Network(n, eqs, {j: tuple(map(float, r)) for j, r in table.items()}, conns, roles)


def clique4(l14=-3.0, l31=-2.0, l32=-2.0, l34=1.0, l43=-2.0, l41=1.0, l42=-1.0):
    table = {
        1: [-1, 1, 1, l14],
        2: [-1.5, -1, 0.8, -0.7],
        3: [l31, l32, -1, l34],
        4: [l41, l42, l43, -1],
    }
    edges = [(1, 2, {1, 2}), (1, 3, {1, 2, 3}), (2, 3, {2, 3}), (3, 4, {3, 4}), (4, 1, {4, 1})]
    return axial(4, table, edges)


def five_node():
    table = {
        1: [-1, 0.5, 0.5, -3, -2],
        2: [-3, -1, 0.5, -4, 0.8],
        3: [-3, -3, -1, 0.5, -3],
        4: [1, -30, -30, -1, -30],
        5: [0.8, -3, 0.5, -4, -1],
    }
    edges = [
        (1, 2, {1, 2}), (1, 3, {1, 2, 3}), (2, 3, {2, 3, 5}), (2, 5, {2, 5}),
        (5, 1, {5, 1}), (5, 3, {5, 1, 3}), (3, 4, {3, 4}), (4, 1, {4, 1}),
    ]
    return axial(5, table, edges)


def planar_node(with_51=False):
    # xi_5 lies on the coordinate plane P34: slot 1 is e_1, slot 2 is e_2,
    # slot 3 the unstable in-plane direction and slot 4 the radial one.
    table = {
        1: [-1, 1, -2, -2],
        2: [-2, -1, 1, 1],
        3: [1, -1, -1, -1],
        4: [1, -1, -1, -1],
        5: [1 if with_51 else -1, -2, 1, -1],
    }
    edges = [
        (1, 2, {1, 2}), (2, 3, {2, 3}), (2, 4, {2, 4}), (2, 5, {2, 3, 4}),
        (5, 3, {3, 4}), (5, 4, {3, 4}), (3, 1, {3, 1}), (4, 1, {4, 1}),
    ]
    fs = frozenset
    roles = {
        1: Roles(fs({1}), fs({3, 4}), fs({2}), fs()),
        2: Roles(fs({2}), fs({1}), fs({3, 4}), fs()),
        3: Roles(fs({3}), fs({2, 4}), fs({1}), fs(), ((4, 1),) if with_51 else ()),
        4: Roles(fs({4}), fs({2, 3}), fs({1}), fs(), ((3, 1),) if with_51 else ()),
        5: Roles(fs({4}), fs({2}), fs({1, 3}) if with_51 else fs({3}),
                 fs() if with_51 else fs({1}), ((2, 3),)),
    }
    if with_51:
        edges.append((5, 1, {1, 3, 4}))
    axes = {1: 1, 2: 2, 3: 3, 4: 4, 5: None}
    return axial(4, table, edges, roles, axes)


def y5():
    table = {}
    edges = []
    for j in range(1, 6):
        nxt, far = j % 5 + 1, (j + 2) % 5 + 1
        row = [0.0] * 5
        row[j - 1] = -1
        row[nxt - 1] = 1
        row[far - 1] = 0.5
        for src in ((j - 2) % 5 + 1, (j + 1) % 5 + 1):
            row[src - 1] = -2
        table[j] = row
        edges.append((j, nxt, {j, nxt, far}))
        edges.append((j, far, {j, far}))
    return axial(5, table, edges)


def ladder(J=3):
    """Nodes (j, 0) -> id j and (j, 1) -> id J + j."""
    base = lambda j: (j - 1) % J + 1
    top = lambda j: J + (j - 1) % J + 1
    edges = []
    for j in range(1, J + 1):
        edges += [
            (base(j), base(j + 1), {base(j), base(j + 1), top(j)}),
            (base(j), top(j), {base(j), top(j)}),
            (top(j), base(j + 1), {top(j), base(j + 1)}),
            (top(j), top(j + 1), {top(j), top(j + 1), base(j + 1)}),
        ]
    n = 2 * J
    table = {}
    for v in range(1, n + 1):
        out = [(b, s) for a, b, s in edges if a == v]
        inc = [a for a, b, s in edges if b == v]
        row = [-1.0] * n
        for b, s in out:
            row[b - 1] = 1.0 if len(s) == 3 else 0.5
        for a in inc:
            row[a - 1] = -2.0
        table[v] = row
    return axial(n, table, edges)


def kirk_silber(completed=True):
    if completed:
        table = {1: [-1, 1, -2, -2], 2: [-2, -1, 1, 0.5], 3: [1, -2, -1, -2], 4: [0.5, -2, 1, -1]}
        edges = [(1, 2, {1, 2}), (2, 3, {2, 3, 4}), (3, 1, {3, 1}), (2, 4, {2, 4}),
                 (4, 3, {4, 3}), (4, 1, {4, 1, 3})]
    else:
        table = {1: [-1, 1, -2, -2], 2: [-2, -1, 1, 1], 3: [1, -2, -1, -1], 4: [1, -2, -1, -1]}
        edges = [(1, 2, {1, 2}), (2, 3, {2, 3}), (3, 1, {3, 1}), (2, 4, {2, 4}), (4, 1, {4, 1})]
    return axial(4, table, edges)


def triangle():
    table = {1: [-1, 1, -2], 2: [-2, -1, 1], 3: [1, -2, -1]}
    return axial(3, table, [(1, 2, {1, 2}), (2, 3, {2, 3}), (3, 1, {3, 1})])


FIXTURES = {
    "clique4": clique4,
    "clique4_weak": lambda: clique4(l14=-1.0, l31=-1.0, l32=-1.0, l43=-0.2, l41=1.0, l42=-0.1),
    "five_node": five_node,
    "planar_node": planar_node,
    "planar_clique": lambda: planar_node(with_51=True),
    "y5": y5,
    "ladder3": ladder,
    "ks_completed": kirk_silber,
    "ks_open": lambda: kirk_silber(completed=False),
    "triangle": triangle,
}


def main():
    OUT.mkdir(exist_ok=True)
    for name, make in FIXTURES.items():
        path = OUT / f"{name}.json"
        path.write_text(dumps(make()))
        print("wrote", path)


if __name__ == "__main__":
    main()
