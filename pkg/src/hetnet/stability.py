"""Local exponents, cycle/walk products and the stability verdicts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .classify import canonical_rotation, elementary_cycles, CYCLE_CAP
from .errors import InternalError, RoleConflict
from .model import AC, Connection, Network, roles_at

THAS, THAS2, LV_AUX = "THAS", "THAS2", "LV_AUX"
STABLE, INCONCLUSIVE = "STABLE", "INCONCLUSIVE"
DEFAULT_TOL = 1e-9
MARGINAL_TOL = 1e-9
NODE_ENUM_LIMIT = 20
TRIPLET_ENUM_LIMIT = 40


@dataclass(frozen=True)
class RhoEstimate:
    equilibrium: int
    value: float
    lemma: str
    ingredients: dict
    formula: str
    flags: tuple[str, ...] = ()
    via: tuple[int, int] | None = None      # (previous node, next node) for rho*

    def to_dict(self) -> dict:
        d = {"equilibrium": self.equilibrium, "value": self.value, "lemma": self.lemma,
             "formula": self.formula, "ingredients": self.ingredients}
        if self.flags:
            d["flags"] = list(self.flags)
        if self.via is not None:
            d["via"] = list(self.via)
        return d


@dataclass(frozen=True)
class WalkExponent:
    walk: tuple[tuple[int, int], ...]
    per_node: tuple[RhoEstimate, ...]
    product: float
    log_product: float
    compound: bool = False

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(e[0] for e in self.walk)

    def labels(self) -> list[str]:
        return [_qlabel(r.via[0], r.equilibrium, r.via[1]) for r in self.per_node]

    def to_dict(self) -> dict:
        return {"walk": list(self.nodes), "connections": [f"{a}->{b}" for a, b in self.walk],
                "factors": self.labels(), "per_node": [r.value for r in self.per_node],
                "product": self.product, "log_product": self.log_product,
                "compound": self.compound}


@dataclass
class StabilityVerdict:
    theorem: str
    result: str
    witnesses: list = field(default_factory=list)
    tolerance: float = DEFAULT_TOL
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "result": self.result, "tolerance": self.tolerance,
                "witnesses": self.witnesses, "notes": self.notes}


# ---------------------------------------------------------------- symbols

def _sym(j: int, k: int) -> str:
    return f"λ{j}{k}" if j < 10 and k < 10 else f"λ{j},{k}"


def _qlabel(i: int, j: int, k: int) -> str:
    return f"q{i}{j}{k}" if max(i, j, k) < 10 else f"q{i},{j},{k}"


class _Group:
    """max over a set of eigenvalues at one node, with its symbol."""

    def __init__(self, net: Network, j: int, coords):
        self.coords = sorted(coords)
        self.vals = [net.lam(j, k) for k in self.coords]
        self.syms = [_sym(j, k) for k in self.coords]

    def __bool__(self):
        return bool(self.coords)

    @property
    def max(self) -> float:
        return max(self.vals)

    @property
    def min(self) -> float:
        return min(self.vals)

    @property
    def sym(self) -> str:
        return self.syms[0] if len(self.syms) == 1 else f"max({','.join(self.syms)})"


def _min_terms(terms):
    """terms: [(value, formula)] -> (value, formula) of their minimum."""
    if len(terms) == 1:
        return terms[0]
    return min(v for v, _ in terms), "min(" + ", ".join(f for _, f in terms) + ")"


def _neg_ratio(c: _Group, e: _Group):
    return -c.max / e.max, f"-{c.sym}/{e.sym}"


def _one_minus(t: _Group, e: _Group):
    return 1.0 - t.max / e.max, f"1-{t.sym}/{e.sym}"


def _saddle_ratio(c: _Group, e: _Group):
    return c.max / (c.max - e.max), f"{c.sym}/({c.sym}-{e.sym})"


def _l41(net, j, c, e, t):
    if not c or not e:
        raise InternalError("node lacks contracting or expanding directions", id=j)
    terms = [_neg_ratio(c, e)]
    if t:
        terms.append(_one_minus(t, e))
    v, f = _min_terms(terms)
    ing = {"c": c.max, "e": e.max}
    if t:
        ing["t"] = t.max
    return v, f, ing


# ---------------------------------------------------------------- rho_j

def _clique_pairs(net: Network, j: int, cliques=None) -> tuple[tuple[int, int], ...]:
    if cliques is not None and net.mode == AC:
        pairs = tuple(sorted((net.axis(c.b), net.axis(c.e)) for c in cliques if c.m == j))
    else:
        pairs = tuple(roles_at(net, j).cliques)
    fl = [f for f, _ in pairs]
    if len(set(fl)) != len(fl):
        raise RoleConflict("node is m-point of cliques sharing an f-long connection",
                           id=j, cliques=[list(p) for p in pairs])
    return pairs


def _dispatch(net, j, pairs):
    r = roles_at(net, j)
    if not pairs:
        return "L41"
    flong = {f for f, _ in pairs}
    if len(r.expanding) == 1:
        (e,) = r.expanding
        if len(pairs) == 1 and r.contracting == flong and pairs[0][1] == e:
            return "L42"
        return "L43"
    if len(r.contracting) == 1 and r.contracting <= flong:
        return "L44"
    return "L45"


def compute_rho(net: Network, cliques, j: int) -> RhoEstimate:
    """Exponent rho_j of the local map near ``j``.

    ``cliques`` may be None, in which case the clique structure is read from the
    (derived or declared) roles.
    """
    r = roles_at(net, j)
    pairs = _clique_pairs(net, j, cliques)
    lemma = _dispatch(net, j, pairs)
    flong = {f for f, _ in pairs}
    c, e, t = _Group(net, j, r.contracting), _Group(net, j, r.expanding), _Group(net, j, r.transverse)
    flags = ()
    if lemma == "L41":
        v, f, ing = _l41(net, j, c, e, t)
    elif lemma == "L42":
        v, f, ing = 1.0, "1", {}
    elif lemma == "L43":
        c0 = _Group(net, j, r.contracting - flong)
        if c0:
            v, f = _min_terms([_neg_ratio(c0, e), (1.0, "1")])
            ing = {"c": c0.max, "e": e.max}
        else:
            v, f, ing, flags = 1.0, "1", {"e": e.max}, ("missing_ingredient",)
    elif lemma == "L44":
        (s_long,) = [s for _, s in pairs]
        other = _Group(net, j, r.expanding - {s_long})
        v, f = _saddle_ratio(c, other)
        ing = {"c": c.max, "e2": other.max}
    else:
        terms, ing = [], {}
        c0 = _Group(net, j, r.contracting - flong)
        if c0:
            terms.append(_neg_ratio(c0, e))
            ing["a1"] = terms[-1][0]
        for n_, s in enumerate(sorted(r.expanding), start=1):
            feeders = _Group(net, j, {f_ for f_, s_ in pairs if s_ == s})
            if feeders:
                terms.append(_saddle_ratio(feeders, _Group(net, j, {s})))
                ing[f"a{n_ + 1}"] = terms[-1][0]
                ing[f"c~{n_}"] = feeders.max
                ing[f"e{n_}"] = net.lam(j, s)
        v, f = _min_terms(terms)
    return RhoEstimate(j, float(v), lemma, ing, f, flags)


# ---------------------------------------------------------------- rho*

def _own_dirs(conn, siblings, role) -> set[int]:
    """Directions of ``role`` carried by ``conn`` and by none of its lower-dimensional siblings."""
    mine = set(conn.subspace) & role
    taken = set().union(*[set(o.subspace) & role for o in siblings if o.dim < conn.dim and o != conn])
    return (mine - taken) or mine


def _in_dirs(net: Network, j: int, conn: Connection) -> set[int]:
    if net.mode == AC:
        return {net.axis(conn.source)}
    return _own_dirs(conn, net.in_edges(j), set(roles_at(net, j).contracting))


def _out_dirs(net: Network, j: int, conn: Connection) -> set[int]:
    if net.mode == AC:
        return {net.axis(conn.target)}
    return _own_dirs(conn, net.out_edges(j), set(roles_at(net, j).expanding))


def compute_rho_star(net: Network, cliques, j: int, in_edge: Connection, out_edge: Connection) -> RhoEstimate:
    """Face-aware exponent at ``j`` for a walk entering by ``in_edge`` and leaving by ``out_edge``."""
    if in_edge.target != j or out_edge.source != j:
        raise InternalError("edges do not meet at the node", id=j, in_edge=str(in_edge), out_edge=str(out_edge))
    r = roles_at(net, j)
    pairs = _clique_pairs(net, j, cliques)
    cin, cout = _in_dirs(net, j, in_edge), _out_dirs(net, j, out_edge)
    c, e = _Group(net, j, cin), _Group(net, j, cout)
    via = (in_edge.source, out_edge.target)
    retained = [p for p in pairs if p[0] in cin and p[1] in cout]
    if retained:
        full = _dispatch(net, j, pairs)
        if len(r.expanding) == 1 or out_edge.dim == 1:
            return RhoEstimate(j, 1.0, "L42", {}, "1", via=via)
        if full == "L44":
            other = _Group(net, j, r.expanding - cout)
            v, f = _saddle_ratio(c, other)
            return RhoEstimate(j, float(v), "L44", {"c": c.max, "e2": other.max}, f, via=via)
        v, f = _saddle_ratio(c, e)
        return RhoEstimate(j, float(v), "L45", {"c~": c.max, "e": e.max}, f, via=via)
    rest = set(range(1, net.n + 1)) - set(r.radial) - cin - cout
    t = _Group(net, j, {k for k in rest if net.lam(j, k) < 0})
    v, f, ing = _l41(net, j, c, e, t)
    return RhoEstimate(j, float(v), "L41", ing, f, via=via)


# ---------------------------------------------------------------- enumeration

def enumerate_cycles(net: Network, cap: int = CYCLE_CAP) -> list[tuple[int, ...]]:
    return elementary_cycles(net.graph, cap)


def rho_table(net: Network) -> dict[int, RhoEstimate]:
    return {j: compute_rho(net, None, j) for j in net.ids}


def triplet_graph(net: Network) -> tuple[nx.DiGraph, dict]:
    """Connections as vertices; arcs carry rho* at the shared node."""
    g = nx.DiGraph()
    est = {}
    conns = net.sorted_connections
    g.add_nodes_from(c.key for c in conns)
    for a in conns:
        for b in net.out_edges(a.target):
            q = compute_rho_star(net, None, a.target, a, b)
            est[(a.key, b.key)] = q
            g.add_edge(a.key, b.key)
    return g, est


def _walk_exponent(cycle_edges, est, compound=False) -> WalkExponent:
    m = len(cycle_edges)
    per = tuple(est[(cycle_edges[i], cycle_edges[(i + 1) % m])] for i in range(m))
    logp = math.fsum(math.log(q.value) for q in per)
    return WalkExponent(tuple(cycle_edges), per, math.exp(logp), logp, compound)


def _rotate_edges(cyc) -> tuple:
    k = cyc.index(min(cyc))
    return tuple(cyc[k:]) + tuple(cyc[:k])


def semilinear_walks(net: Network, cap: int = CYCLE_CAP) -> list[WalkExponent]:
    """Simple cycles of the triplet graph (each a closed semi-linear walk)."""
    g, est = triplet_graph(net)
    out = []
    for c in nx.simple_cycles(g):
        out.append(_walk_exponent(_rotate_edges(c), est))
        if len(out) > cap:
            from .errors import CapExceeded
            raise CapExceeded(f"more than {cap} triplet cycles", cap=cap)
    out.sort(key=lambda w: (len(w.walk), w.walk))
    return out


def walk_table(net: Network) -> list[WalkExponent]:
    """Simple walks plus one-fold insertions of all-m-point loops into the walks they touch."""
    g, est = triplet_graph(net)
    simple = semilinear_walks(net)
    mpoints = {j for j in net.ids if _clique_pairs(net, j)}
    loops = [w for w in simple if set(w.nodes) <= mpoints]
    rows = list(simple)
    for d in loops:
        dset = set(d.walk)
        for c in simple:
            if c is d:
                continue
            shared = [i for i, e in enumerate(c.walk) if e in dset]
            if not shared:
                continue
            i = shared[0]
            k = d.walk.index(c.walk[i])
            d_rot = d.walk[k:] + d.walk[:k]
            rows.append(_walk_exponent(c.walk[:i] + d_rot + c.walk[i:], est, compound=True))
    return rows


def same_walk(a, b) -> bool:
    """Equality of closed node sequences up to rotation."""
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        return False
    return any(a[k:] + a[:k] == b for k in range(len(a)))


# ---------------------------------------------------------------- detector

def min_cycle_weights(weights: np.ndarray) -> np.ndarray:
    """Diagonal of the all-pairs closed-walk minimum (Floyd-Warshall, diagonal seeded with inf).

    ``weights[u, v]`` is the arc weight or inf. A negative entry flags a
    negative cycle through that vertex; otherwise it is the lightest cycle through it.
    """
    d = np.array(weights, dtype=float)
    for k in range(d.shape[0]):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return np.diag(d).copy()


def light_cycle_exists(weights: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff some cycle has total log-weight <= log(1 + tol)."""
    if len(weights) == 0:
        return False
    return bool(np.any(min_cycle_weights(weights) <= math.log1p(tol)))


def _fw_with_next(weights):
    d = np.array(weights, dtype=float)
    n = d.shape[0]
    nxt = np.where(np.isfinite(d), np.arange(n)[None, :], -1)
    for k in range(n):
        alt = d[:, k, None] + d[None, k, :]
        better = alt < d
        d = np.where(better, alt, d)
        nxt = np.where(better, nxt[:, k, None].repeat(n, 1), nxt)
    return d, nxt


def _detector_witness(weights, start):
    """Follow next-hop pointers from ``start`` back to itself; return the first closed loop."""
    _, nxt = _fw_with_next(weights)
    seen, path = {start: 0}, [start]
    v = int(nxt[start, start])
    while v >= 0 and v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = int(nxt[v, start])
    if v < 0:
        raise InternalError("detector reported a cycle but no path could be recovered")
    return path[seen[v]:]


def _node_weights(net, rho):
    idx = {j: p for p, j in enumerate(net.ids)}
    w = np.full((len(idx), len(idx)), np.inf)
    for c in net.connections:
        w[idx[c.source], idx[c.target]] = math.log(rho[c.target].value)
    return w, idx


def _is_marginal(product: float) -> bool:
    return 1 - MARGINAL_TOL <= product <= 1 + MARGINAL_TOL


def check_thas(net: Network, tol: float = DEFAULT_TOL, max_witnesses: int | None = None) -> StabilityVerdict:
    rho = rho_table(net)
    w, idx = _node_weights(net, rho)
    if not light_cycle_exists(w, tol):
        return StabilityVerdict(THAS, STABLE, [], tol)
    diag = min_cycle_weights(w)
    thresh = math.log1p(tol)
    wit = []
    if len(idx) <= NODE_ENUM_LIMIT:
        for cyc in enumerate_cycles(net):
            logp = math.fsum(math.log(rho[j].value) for j in cyc)
            if logp <= thresh:
                wit.append(_cycle_witness(cyc, rho, logp))
    if not wit:
        ids = net.ids
        start = int(np.argmin(diag))
        cyc = canonical_rotation([ids[p] for p in _detector_witness(w, start)])
        wit.append(_cycle_witness(cyc, rho, math.fsum(math.log(rho[j].value) for j in cyc)))
    wit.sort(key=lambda x: (x["log_product"], x["cycle"]))
    return StabilityVerdict(THAS, INCONCLUSIVE, wit[:max_witnesses], tol)


def _cycle_witness(cyc, rho, logp):
    p = math.exp(logp)
    return {"cycle": list(cyc), "factors": [f"ρ{j}" for j in cyc], "product": p,
            "log_product": logp, "marginal": _is_marginal(p)}


def check_thas2(net: Network, tol: float = DEFAULT_TOL, max_witnesses: int | None = None) -> StabilityVerdict:
    g, est = triplet_graph(net)
    verts = list(g.nodes)
    idx = {v: p for p, v in enumerate(verts)}
    w = np.full((len(verts), len(verts)), np.inf)
    for (a, b), q in est.items():
        w[idx[a], idx[b]] = math.log(q.value)
    if not light_cycle_exists(w, tol):
        return StabilityVerdict(THAS2, STABLE, [], tol)
    diag = min_cycle_weights(w)
    thresh = math.log1p(tol)
    wit = []
    if len(verts) <= TRIPLET_ENUM_LIMIT:
        wit = [x for x in semilinear_walks(net) if x.log_product <= thresh]
    if not wit:
        loop = [verts[p] for p in _detector_witness(w, int(np.argmin(diag)))]
        wit = [_walk_exponent(_rotate_edges(loop), est)]
    wit.sort(key=lambda x: (x.log_product, x.walk))
    out = []
    for x in wit[:max_witnesses]:
        d = x.to_dict()
        d["marginal"] = _is_marginal(x.product)
        out.append(d)
    return StabilityVerdict(THAS2, INCONCLUSIVE, out, tol)


def check_lv_aux(net: Network, tol: float = DEFAULT_TOL) -> StabilityVerdict:
    bad = []
    for j in net.ids:
        r = roles_at(net, j)
        c = min(net.lam(j, k) for k in r.contracting)
        e = min(net.lam(j, k) for k in r.expanding)
        ratio = abs(c / e)
        if not ratio > 1 + tol:
            bad.append({"equilibrium": j, "c": c, "e": e, "ratio": ratio})
    note = "valid for Lotka-Volterra realizations only"
    return StabilityVerdict(LV_AUX, STABLE if not bad else INCONCLUSIVE, bad, tol, [note])


# ---------------------------------------------------------------- conditions

_RHO_LE_ONE = {"L43", "L44", "L45"}


def _factor_cycles(net, rho):
    sets = []
    for cyc in enumerate_cycles(net):
        s = frozenset(j for j in cyc if rho[j].lemma != "L42")
        if s not in sets:
            sets.append(s)
    common = frozenset.intersection(*sets) if sets else frozenset()
    rem = {s - common for s in sets}
    common = set(common)
    while True:
        cands = sorted({m for r in rem for m in r if rho[m].lemma in _RHO_LE_ONE})
        for m in cands:
            without = [r for r in rem if m not in r]
            if without and all(r | {m} in rem for r in without):
                rem -= set(without)
                break
        else:
            break
        shared = frozenset.intersection(*rem)
        if shared:
            common |= shared
            rem = {r - shared for r in rem}
    return sorted(common), sorted(rem, key=lambda r: (len(r), sorted(r)))


def thas_condition(net: Network, rho: dict | None = None, substitute: bool = False) -> str:
    """Sufficient condition as text, e.g. ``ρ1·ρ2·min(ρ3, ρ4) > 1``."""
    rho = rho or rho_table(net)
    common, rem = _factor_cycles(net, rho)
    if substitute:
        name = lambda j: rho[j].formula if _atomic(rho[j].formula) else f"({rho[j].formula})"
    else:
        name = lambda j: f"ρ{j}"
    head = [name(j) for j in common]
    if all(len(r) <= 1 for r in rem):
        if len(rem) > 1:
            args = [name(next(iter(r))) for r in rem if r] + (["1"] if frozenset() in rem else [])
            head.append("min(" + ", ".join(args) + ")")
        elif rem and len(rem[0]) == 1:
            head.append(name(next(iter(rem[0]))))
        return ("·".join(head) or "1") + " > 1"
    lines = []
    for r in rem:
        lines.append("·".join(name(j) for j in sorted(set(common) | r)) + " > 1")
    return ",  ".join(lines)


def _atomic(f: str) -> bool:
    return f.startswith(("min(", "max(")) and f.endswith(")") or all(ch not in f for ch in "+-/·")


def thas2_conditions(walks) -> list[str]:
    return ["·".join(w.labels()) + " > 1" for w in walks]
