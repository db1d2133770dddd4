"""Ac-network axioms, Delta-clique detection and structural decomposition."""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .errors import IncompleteClique, InternalError, NotRepresentable, CapExceeded
from .model import AC, Connection, Network

CYCLE_CAP = 10**6


@dataclass(frozen=True, order=True)
class DeltaClique:
    b: int
    m: int
    e: int
    short: Connection = field(compare=False)
    f_long: Connection = field(compare=False)
    s_long: Connection = field(compare=False)

    def label(self) -> str:
        return f"D{self.b}{self.m}{self.e}"

    def to_dict(self) -> dict:
        return {"b": self.b, "m": self.m, "e": self.e,
                "short": str(self.short), "f_long": str(self.f_long), "s_long": str(self.s_long)}


@dataclass
class AcReport:
    violations: list[dict]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ac_network": self.passed, "violations": self.violations}


@dataclass(frozen=True)
class OptionalConnection:
    edge: tuple[int, int]
    pattern: str


@dataclass
class StructureDecomposition:
    case: str
    base_cycle: tuple[int, ...]
    J: int
    groups: dict[int, tuple[int, ...]]
    optional_connections: list[OptionalConnection]
    long_edges: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "base_cycle": list(self.base_cycle),
            "J": self.J,
            "groups": {str(j): list(g) for j, g in self.groups.items()},
            "optional_connections": [{"edge": list(o.edge), "pattern": o.pattern}
                                     for o in self.optional_connections],
            "long_edges": [list(e) for e in self.long_edges],
        }


# ---------------------------------------------------------------- cliques

def find_delta_cliques(net: Network) -> list[DeltaClique]:
    out = []
    for i in net.ids:
        succ = net.successors(i)
        if len(succ) != 2:
            continue
        j, k = succ
        if net.edge(j, k) is not None:
            out.append(DeltaClique(i, j, k, net.edge(i, k), net.edge(i, j), net.edge(j, k)))
        elif net.edge(k, j) is not None:
            out.append(DeltaClique(i, k, j, net.edge(i, j), net.edge(i, k), net.edge(k, j)))
        else:
            raise IncompleteClique(i, j, k)
    return sorted(out)


def check_ac(net: Network) -> AcReport:
    v = []
    if net.mode != AC:
        return AcReport([{"code": "extended_mode", "detail": "role-annotated networks are not ac-networks"}])
    for j in net.ids:
        row = net.eigenvalues[j]
        pos = [k + 1 for k, x in enumerate(row) if x > 0]
        if not 1 <= len(pos) <= 2:
            v.append({"code": "unstable_dimension", "id": j, "expanding": pos})
        for k in pos:
            target = net.node_on_axis(k)
            if target is None or net.edge(j, target) is None:
                v.append({"code": "not_clean", "id": j, "coord": k,
                          "detail": f"unstable direction e_{k} at {j} has no connection in the network"})
    for i in net.ids:
        succ = net.successors(i)
        if len(succ) == 2:
            a, b = succ
            if net.edge(a, b) is None and net.edge(b, a) is None:
                v.append({"code": "incomplete_clique", "id": i, "targets": [a, b],
                          "detail": f"node {i} has two expanding directions but no clique closes"})
        if len(succ) > 2:
            v.append({"code": "unstable_dimension", "id": i, "expanding": succ})
    return AcReport(v)


def flong_edges(cliques) -> set[tuple[int, int]]:
    return {c.f_long.key for c in cliques}


def canonical_rotation(cycle) -> tuple[int, ...]:
    cycle = list(cycle)
    k = cycle.index(min(cycle))
    return tuple(cycle[k:] + cycle[:k])


def elementary_cycles(g: nx.DiGraph, cap: int = CYCLE_CAP) -> list[tuple]:
    out = []
    for c in nx.simple_cycles(g):
        out.append(canonical_rotation(c))
        if len(out) > cap:
            raise CapExceeded(f"more than {cap} elementary cycles", cap=cap)
    return sorted(out)


def find_flong_free_cycles(net: Network) -> list[tuple[int, ...]]:
    bad = flong_edges(find_delta_cliques(net))
    g = net.graph.copy()
    g.remove_edges_from(bad)
    cycles = elementary_cycles(g)
    if not cycles:
        raise InternalError("no cycle without f-long connections in a validated ac-network")
    return cycles


# ---------------------------------------------------------------- decomposition

def _rotate_base(net: Network, cycle) -> tuple[int, ...]:
    on = set(cycle)
    decorated = [v for v in cycle if any(w not in on for w in net.successors(v))]
    start = min(decorated) if decorated else min(cycle)
    k = cycle.index(start)
    return tuple(cycle[k:] + cycle[:k])


def decompose_structure(net: Network, base: tuple[int, ...] | None = None) -> StructureDecomposition:
    """Group the equilibria around an f-long-free base cycle.

    Group indices run 1..J; ``groups[j][s]`` is the equilibrium xi_{j,s}.
    """
    if base is None:
        base = find_flong_free_cycles(net)[0]
    X = _rotate_base(net, list(base))
    J = len(X)
    pos = {v: p for p, v in enumerate(X)}
    cyc = {(X[p], X[(p + 1) % J]) for p in range(J)}
    extra = [(a, b) for a in X for b in net.successors(a) if b in pos and (a, b) not in cyc]
    if extra:
        return _case_one(net, X, extra)
    return _case_two(net, X)


def _case_one(net, X, extra):
    J = len(X)
    if len(net.ids) != J or J % 2 == 0:
        raise NotRepresentable("extra edges between base-cycle nodes need an odd J and no other nodes",
                               J=J, n_nodes=len(net.ids))
    pos = {v: p for p, v in enumerate(X)}
    h = (J + 1) // 2
    want = {(X[p], X[(p + h) % J]) for p in range(J)}
    got = set(extra)
    if got != want:
        raise NotRepresentable("long edges do not follow the i -> i+(J+1)/2 pattern",
                               unexpected=sorted(got - want), missing=sorted(want - got))
    return StructureDecomposition("I", tuple(X), J, {p + 1: (X[p],) for p in range(J)}, [],
                                  long_edges=sorted(want, key=lambda e: pos[e[0]]))


def _case_two(net, X):
    J = len(X)
    groups = [[v] for v in X]       # 0-based group index internally
    where = {v: p for p, v in enumerate(X)}
    done = set(X)

    # compulsory connections xi_{j,0} -> xi_{j,1}
    for p, v in enumerate(X):
        for w in net.successors(v):
            if w not in where:
                groups[p].append(w)
                where[w] = p

    progress = True
    while progress:
        progress = False
        for p in range(J):
            t = groups[p][-1]
            if t in done:
                continue
            done.add(t)
            progress = True
            for w in net.successors(t):
                if w == X[(p + 1) % J]:
                    continue
                if w not in where:
                    # fed by the next group's tail as well: it belongs to that group
                    nxt = (p + 1) % J
                    q = nxt if len(groups[nxt]) > 1 and groups[nxt][-1] in net.predecessors(w) else p
                    groups[q].append(w)
                    where[w] = q
                    if q != p:
                        done.discard(groups[q][-2])
                    continue
                q = where[w]
                s = groups[q].index(w)
                if q == (p - 1) % J and s >= 1 and groups[q][-1] == w and q != p:
                    # xi_{j,1} -> xi_{j-1,1}: move the latter up one group
                    groups[q].remove(w)
                    groups[p].append(w)
                    where[w] = p
    for v in net.ids:
        if v not in where:
            raise NotRepresentable("equilibrium not reachable by the grouping rules", id=v)

    optional = _classify_edges(net, X, groups)
    return StructureDecomposition("II", tuple(X), J,
                                  {p + 1: tuple(g) for p, g in enumerate(groups)}, optional)


PATTERNS = {
    "to_j+1_first": "[x_{j,m_j} -> x_{j+1,1}]",
    "to_j+2_base": "[x_{j,m_j} -> x_{j+2,0}]",
    "to_own_base": "[x_{j,m_j} -> x_{j,0}]",
    "prev_tail_to_tail": "[x_{j-1,m_{j-1}} -> x_{j,m_j}]",
}


def _classify_edges(net, X, groups):
    J = len(X)
    idx = {}
    for p, g in enumerate(groups):
        for s, v in enumerate(g):
            idx[v] = (p, s)
    m = [len(g) - 1 for g in groups]

    def node(p, s):
        g = groups[p % J]
        return g[s] if s < len(g) else None

    compulsory = set()
    for p in range(J):
        for s in range(m[p] + 1):
            compulsory.add((node(p, s), node(p + 1, 0)))
            if s >= 1:
                compulsory.add((node(p, s - 1), node(p, s)))
    edges = {c.key for c in net.connections}
    missing = compulsory - edges
    if missing:
        raise NotRepresentable("compulsory connections missing", edges=sorted(missing))
    optional = []
    per_tail = {}
    for e in sorted(edges - compulsory):
        a, b = e
        p, s = idx[a]
        q, r = idx[b]
        pattern = None
        if s == m[p]:
            if q == (p + 1) % J and r == 1 and m[q] >= 1 and not (r == m[q] and (b, node(q, 0)) in edges):
                pattern = "to_j+1_first"
            elif b == node(p + 2, 0):
                pattern = "to_j+2_base"
            elif b == node(p, 0) and s >= 1:
                pattern = "to_own_base"
            if pattern is None and q == (p + 1) % J and r == m[q] >= 1 and (b, node(q, 0)) in edges:
                pattern = "prev_tail_to_tail"
        if pattern is None:
            raise NotRepresentable("connection matches no structural pattern", edge=list(e))
        if pattern != "prev_tail_to_tail":
            if a in per_tail:
                raise NotRepresentable("mutually exclusive optional connections both present",
                                       edges=[list(per_tail[a]), list(e)])
            per_tail[a] = e
        optional.append(OptionalConnection(e, pattern))
    return optional


def expand_decomposition(dec: StructureDecomposition) -> set[tuple[int, int]]:
    """Edge set implied by a decomposition (inverse of ``decompose_structure``)."""
    J = dec.J
    X = dec.base_cycle
    edges = {(X[p], X[(p + 1) % J]) for p in range(J)}
    if dec.case == "I":
        return edges | set(dec.long_edges)
    groups = [dec.groups[p + 1] for p in range(J)]
    for p, g in enumerate(groups):
        for s, v in enumerate(g):
            edges.add((v, groups[(p + 1) % J][0]))
            if s >= 1:
                edges.add((g[s - 1], v))
    edges |= {o.edge for o in dec.optional_connections}
    return edges


def classify(net: Network) -> dict:
    """Everything ``hetnet classify`` reports, as plain data."""
    rep = check_ac(net)
    out = {"ac": rep.to_dict(), "cliques": [], "base_cycles": [], "decompositions": []}
    if not rep.passed:
        return out
    cliques = find_delta_cliques(net)
    out["cliques"] = [c.to_dict() for c in cliques]
    bases = find_flong_free_cycles(net)
    out["base_cycles"] = [list(b) for b in bases]
    for k, b in enumerate(bases):
        d = decompose_structure(net, b).to_dict()
        d["primary"] = k == 0
        out["decompositions"].append(d)
    return out
