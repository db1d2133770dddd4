"""Network data model, the JSON file format and structural validation.

A network lives in R^n. Equilibria sit on coordinate axes (AC mode) or carry
explicit eigen-role annotations (EXTENDED mode). ``lam(j, k)`` is the eigenvalue
of df at equilibrium ``j`` along the basis vector e_k, with k counted from 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import networkx as nx

from .errors import InvariantError, ParseError, SchemaError

AC = "AC"
EXTENDED = "EXTENDED"

_TOP_REQUIRED = {"n", "equilibria", "eigenvalues", "connections"}
_TOP_OPTIONAL = {"roles"}
_EQ_KEYS = ({"id", "axis"}, {"position"})
_CONN_KEYS = ({"from", "to", "dim", "subspace"}, set())
_ROLE_KEYS = ({"radial", "contracting", "expanding", "transverse"}, {"cliques"})
_CLIQUE_KEYS = ({"f_long", "s_long"}, set())


@dataclass(frozen=True)
class Equilibrium:
    id: int
    axis: int | None
    position: float = 1.0


@dataclass(frozen=True)
class Connection:
    source: int
    target: int
    dim: int
    subspace: frozenset[int]

    @property
    def key(self) -> tuple[int, int]:
        return (self.source, self.target)

    def __str__(self) -> str:
        return f"{self.source}->{self.target}"


@dataclass(frozen=True)
class Roles:
    """Partition of the coordinates 1..n at one equilibrium.

    ``cliques`` lists (f-long coordinate, s-long coordinate) pairs for every
    Delta-clique in which the equilibrium is the m-point.
    """
    radial: frozenset[int]
    contracting: frozenset[int]
    expanding: frozenset[int]
    transverse: frozenset[int]
    cliques: tuple[tuple[int, int], ...] = ()

    @property
    def f_long(self) -> frozenset[int]:
        return frozenset(f for f, _ in self.cliques)


@dataclass(frozen=True, eq=False)
class Network:
    n: int
    equilibria: tuple[Equilibrium, ...]
    eigenvalues: Mapping[int, tuple[float, ...]]
    connections: tuple[Connection, ...]
    roles: Mapping[int, Roles] | None = field(default=None)

    def __post_init__(self):
        _validate(self)

    @property
    def mode(self) -> str:
        return AC if self.roles is None else EXTENDED

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(sorted(e.id for e in self.equilibria))

    @cached_property
    def _by_id(self) -> dict[int, Equilibrium]:
        return {e.id: e for e in self.equilibria}

    @cached_property
    def _by_axis(self) -> dict[int, int]:
        return {e.axis: e.id for e in self.equilibria if e.axis is not None}

    @cached_property
    def _edges(self) -> dict[tuple[int, int], Connection]:
        return {c.key: c for c in self.connections}

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.ids)
        g.add_edges_from(sorted(self._edges))
        return g

    def equilibrium(self, j: int) -> Equilibrium:
        return self._by_id[j]

    def axis(self, j: int) -> int:
        ax = self._by_id[j].axis
        if ax is None:
            raise InvariantError(f"equilibrium {j} is not axial", id=j)
        return ax

    def node_on_axis(self, k: int) -> int | None:
        return self._by_axis.get(k)

    def lam(self, j: int, k: int) -> float:
        return self.eigenvalues[j][k - 1]

    def edge(self, i: int, j: int) -> Connection | None:
        return self._edges.get((i, j))

    def successors(self, j: int) -> list[int]:
        return sorted(self.graph.successors(j))

    def predecessors(self, j: int) -> list[int]:
        return sorted(self.graph.predecessors(j))

    def out_edges(self, j: int) -> list[Connection]:
        return [self._edges[(j, k)] for k in self.successors(j)]

    def in_edges(self, j: int) -> list[Connection]:
        return [self._edges[(i, j)] for i in self.predecessors(j)]

    @cached_property
    def sorted_connections(self) -> tuple[Connection, ...]:
        return tuple(self._edges[k] for k in sorted(self._edges))


def complementary_subspace(conn: Connection, n: int) -> frozenset[int]:
    """Coordinates orthogonal to the invariant subspace of ``conn``."""
    return frozenset(range(1, n + 1)) - conn.subspace


def roles_at(net: Network, j: int) -> Roles:
    """Eigen-roles at ``j``: derived from the graph in AC mode, declared otherwise."""
    if net.roles is not None:
        return net.roles[j]
    return _derived_roles(net, j)


def _derived_roles(net: Network, j: int) -> Roles:
    radial = net.axis(j)
    expanding = {net.axis(k) for k in net.successors(j)}
    contracting = {net.axis(i) for i in net.predecessors(j)}
    rest = set(range(1, net.n + 1)) - {radial} - expanding - contracting
    cliques = []
    for i in net.predecessors(j):
        for k in net.successors(j):
            # i -> j -> k with the short connection i -> k closes a clique
            if net.edge(i, k) is not None and _is_clique_pair(net, i, j, k):
                cliques.append((net.axis(i), net.axis(k)))
    return Roles(frozenset({radial}), frozenset(contracting), frozenset(expanding),
                 frozenset(rest), tuple(sorted(cliques)))


def _is_clique_pair(net: Network, i: int, j: int, k: int) -> bool:
    # i must expand toward exactly j and k for i->k to be the short edge
    return set(net.successors(i)) == {j, k}


# ---------------------------------------------------------------- validation

def _fail(msg: str, **detail):
    raise InvariantError(msg, **detail)


def _validate(net: Network) -> None:
    n = net.n
    if n < 1:
        _fail("n must be positive", n=n)
    ids = [e.id for e in net.equilibria]
    if len(set(ids)) != len(ids):
        _fail("equilibrium ids are not unique", ids=sorted(ids))
    if not ids:
        _fail("network has no equilibria")
    axes = [e.axis for e in net.equilibria if e.axis is not None]
    for e in net.equilibria:
        if e.axis is None and net.roles is None:
            _fail("AC networks need an axis for every equilibrium", id=e.id)
        if e.axis is not None and not 1 <= e.axis <= n:
            _fail("axis out of range", id=e.id, axis=e.axis)
        if not (math.isfinite(e.position) and e.position > 0):
            _fail("position must be a positive real", id=e.id)
    dup = sorted({a for a in axes if axes.count(a) > 1})
    if dup:
        offenders = sorted(e.id for e in net.equilibria if e.axis in dup)
        _fail("more than one equilibrium per axis", axes=dup, ids=offenders)

    if set(net.eigenvalues) != set(ids):
        _fail("eigenvalue table does not match equilibria",
              missing=sorted(set(ids) - set(net.eigenvalues)),
              extra=sorted(set(net.eigenvalues) - set(ids)))
    for j, row in net.eigenvalues.items():
        if len(row) != n:
            _fail("eigenvalue row must have n entries", id=j, length=len(row))
        if any(not math.isfinite(v) for v in row):
            _fail("eigenvalues must be finite", id=j)
        zeros = [k + 1 for k, v in enumerate(row) if v == 0]
        if zeros:
            _fail("zero eigenvalue (equilibrium not hyperbolic)", id=j, coords=zeros)

    seen = set()
    for c in net.connections:
        if c.key in seen:
            _fail("duplicate connection", edge=list(c.key))
        seen.add(c.key)
        if c.source not in net._by_id or c.target not in net._by_id:
            _fail("connection refers to unknown equilibrium", edge=list(c.key))
        if c.source == c.target:
            _fail("homoclinic connection", edge=list(c.key))
        if c.dim not in (1, 2):
            _fail("connection dimension must be 1 or 2", edge=list(c.key), dim=c.dim)
        if not c.subspace or not all(1 <= k <= n for k in c.subspace):
            _fail("subspace coordinates out of range", edge=list(c.key))
    for (i, j) in seen:
        if (j, i) in seen and i < j:
            _fail("two-equilibrium cycle", ids=[i, j])

    if not nx.is_weakly_connected(net.graph):
        parts = [sorted(p) for p in nx.weakly_connected_components(net.graph)]
        _fail("network is not connected", components=sorted(parts))

    if net.roles is None:
        _validate_ac(net)
    else:
        _validate_extended(net)


def _validate_ac(net: Network) -> None:
    for j in net.ids:
        if net.lam(j, net.axis(j)) >= 0:
            _fail("radial eigenvalue must be negative", id=j)
    for c in net.connections:
        ai, aj = net.axis(c.source), net.axis(c.target)
        if ai not in c.subspace or aj not in c.subspace:
            _fail("subspace must contain both endpoint axes", edge=list(c.key))
        if len(c.subspace) != c.dim + 1:
            _fail("subspace dimension must equal dim + 1", edge=list(c.key))
        if net.lam(c.source, aj) <= 0:
            _fail("source is not unstable toward the target axis", edge=list(c.key))
        if net.lam(c.target, ai) >= 0:
            _fail("target is not stable along the source axis", edge=list(c.key))
    # dim 2 exactly for short connections of cliques
    for c in net.connections:
        i, k = c.key
        mids = [j for j in net.successors(i)
                if j != k and net.edge(j, k) is not None and _is_clique_pair(net, i, j, k)]
        short = bool(mids)
        if short != (c.dim == 2):
            _fail("declared dim disagrees with clique structure",
                  edge=list(c.key), declared=c.dim, derived=2 if short else 1)
        if short:
            want = frozenset({net.axis(i), net.axis(mids[0]), net.axis(k)})
            if c.subspace != want:
                _fail("short connection subspace must span the clique axes",
                      edge=list(c.key), expected=sorted(want))


def _validate_extended(net: Network) -> None:
    full = set(range(1, net.n + 1))
    if set(net.roles) != set(net.ids):
        _fail("roles must be given for every equilibrium",
              missing=sorted(set(net.ids) - set(net.roles)))
    for j, r in net.roles.items():
        parts = [r.radial, r.contracting, r.expanding, r.transverse]
        total = sum(len(p) for p in parts)
        if set().union(*parts) != full or total != net.n:
            _fail("roles must partition 1..n", id=j)
        if not r.radial or not r.expanding:
            _fail("roles need a radial and an expanding direction", id=j)
        row = net.eigenvalues[j]
        if any(row[k - 1] >= 0 for k in r.radial | r.contracting):
            _fail("radial and contracting eigenvalues must be negative", id=j)
        if any(row[k - 1] <= 0 for k in r.expanding):
            _fail("expanding eigenvalues must be positive", id=j)
        for f, s in r.cliques:
            if f not in r.contracting or s not in r.expanding:
                _fail("clique f-long must be contracting and s-long expanding", id=j)


# ---------------------------------------------------------------- file format

def _check_keys(obj, keys, where: str):
    required, optional = keys
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    missing = required - obj.keys()
    extra = obj.keys() - required - optional
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{where} must be an integer")
    return v


def _real(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where} must be a number")
    return float(v)


def _coords(v, where: str) -> frozenset[int]:
    if not isinstance(v, list):
        raise SchemaError(f"{where} must be a list of coordinates")
    out = [_int(x, where) for x in v]
    if len(set(out)) != len(out):
        raise SchemaError(f"{where} has repeated coordinates")
    return frozenset(out)


def network_from_dict(doc: dict) -> Network:
    _check_keys(doc, (_TOP_REQUIRED, _TOP_OPTIONAL), "network")
    n = _int(doc["n"], "n")
    if not isinstance(doc["equilibria"], list):
        raise SchemaError("equilibria must be a list")
    eqs = []
    for e in doc["equilibria"]:
        _check_keys(e, _EQ_KEYS, "equilibrium")
        axis = e["axis"]
        axis = None if axis is None else _int(axis, "axis")
        eqs.append(Equilibrium(_int(e["id"], "id"), axis,
                               _real(e.get("position", 1.0), "position")))
    if not isinstance(doc["eigenvalues"], dict):
        raise SchemaError("eigenvalues must be an object")
    eig = {}
    for key, row in doc["eigenvalues"].items():
        try:
            j = int(key)
        except ValueError:
            raise SchemaError(f"eigenvalue key {key!r} is not an id") from None
        if not isinstance(row, list):
            raise SchemaError("eigenvalue rows must be lists")
        eig[j] = tuple(_real(v, f"eigenvalues[{key}]") for v in row)
    if not isinstance(doc["connections"], list):
        raise SchemaError("connections must be a list")
    conns = []
    for c in doc["connections"]:
        _check_keys(c, _CONN_KEYS, "connection")
        conns.append(Connection(_int(c["from"], "from"), _int(c["to"], "to"),
                                _int(c["dim"], "dim"), _coords(c["subspace"], "subspace")))
    roles = None
    if "roles" in doc:
        if not isinstance(doc["roles"], dict):
            raise SchemaError("roles must be an object")
        roles = {}
        for key, r in doc["roles"].items():
            _check_keys(r, _ROLE_KEYS, f"roles[{key}]")
            cl = []
            for item in r.get("cliques", []):
                _check_keys(item, _CLIQUE_KEYS, "clique")
                cl.append((_int(item["f_long"], "f_long"), _int(item["s_long"], "s_long")))
            try:
                j = int(key)
            except ValueError:
                raise SchemaError(f"roles key {key!r} is not an id") from None
            roles[j] = Roles(*(_coords(r[k], k) for k in
                               ("radial", "contracting", "expanding", "transverse")),
                             cliques=tuple(sorted(cl)))
    return Network(n, tuple(sorted(eqs, key=lambda e: e.id)), eig, tuple(conns), roles)


def network_to_dict(net: Network) -> dict:
    doc = {
        "n": net.n,
        "equilibria": [{"id": e.id, "axis": e.axis, "position": e.position}
                       for e in sorted(net.equilibria, key=lambda e: e.id)],
        "eigenvalues": {str(j): list(net.eigenvalues[j]) for j in net.ids},
        "connections": [{"from": c.source, "to": c.target, "dim": c.dim,
                         "subspace": sorted(c.subspace)} for c in net.sorted_connections],
    }
    if net.roles is not None:
        doc["roles"] = {}
        for j in net.ids:
            r = net.roles[j]
            entry = {k: sorted(getattr(r, k)) for k in
                     ("radial", "contracting", "expanding", "transverse")}
            if r.cliques:
                entry["cliques"] = [{"f_long": f, "s_long": s} for f, s in r.cliques]
            doc["roles"][str(j)] = entry
    return doc


def dumps(net: Network) -> str:
    return json.dumps(network_to_dict(net), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    return network_from_dict(doc)


def load_network(path) -> Network:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return loads(text)
