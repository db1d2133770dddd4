"""Cubic Z2^n-equivariant realization of an ac-network and numeric certification of its connections.

The field is  dx_k/dt = x_k (sigma_k + sum_l a_kl x_l^2).  With every
equilibrium at distance 1 on its axis the Jacobian there is diagonal, so the
prescribed eigenvalues can be matched exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentRadial, InteriorEquilibrium, ParseError, SchemaError, Timeout
from .model import AC, Network

DELTA = 1e-4
ARRIVAL_TOL = 1e-6
T_MAX = 1e4
FAN_SIZE = 9


@dataclass(frozen=True, eq=False)
class VectorField:
    n: int
    sigma: np.ndarray
    A: np.ndarray

    def rhs(self, x: np.ndarray) -> np.ndarray:
        return x * (self.sigma + self.A @ (x * x))

    def __call__(self, t, x):
        return self.rhs(x)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        g = self.sigma + self.A @ (x * x)
        return np.diag(g) + 2.0 * x[:, None] * self.A * x[None, :]

    def restrict(self, coords) -> "VectorField":
        """The field on the coordinate subspace spanned by ``coords`` (1-based)."""
        idx = [k - 1 for k in coords]
        return VectorField(len(idx), self.sigma[idx].copy(), self.A[np.ix_(idx, idx)].copy())

    def to_dict(self) -> dict:
        return {"n": self.n, "sigma": self.sigma.tolist(), "A": self.A.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "VectorField":
        try:
            n = int(doc["n"])
            sigma = np.asarray(doc["sigma"], dtype=float)
            A = np.asarray(doc["A"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad field document: {exc}") from exc
        if sigma.shape != (n,) or A.shape != (n, n):
            raise SchemaError("field dimensions do not match n", n=n)
        return cls(n, sigma, A)


def load_field(path) -> VectorField:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read field {path}: {exc}") from None
    return VectorField.from_dict(doc)


def equilibrium_point(net: Network, j: int) -> np.ndarray:
    x = np.zeros(net.n)
    x[net.axis(j) - 1] = net.equilibrium(j).position
    return x


def synthesize_field(net: Network) -> VectorField:
    if net.mode != AC:
        raise SchemaError("only axial networks can be realized; supply a field for role-annotated ones")
    n = net.n
    sigma = -np.ones(n)
    A = -np.ones((n, n))
    for j in net.ids:
        if net.equilibrium(j).position != 1.0:
            raise SchemaError("realization assumes equilibria at unit distance", id=j)
        a = net.axis(j)
        radial = net.lam(j, a)
        if radial >= 0:
            raise InconsistentRadial(f"radial eigenvalue at {j} must be negative", id=j, value=radial)
        sigma[a - 1] = -radial / 2
    for j in net.ids:
        a = net.axis(j)
        A[a - 1, a - 1] = -sigma[a - 1]
        for k in range(1, n + 1):
            if k != a:
                A[k - 1, a - 1] = net.lam(j, k) - sigma[k - 1]
    return VectorField(n, sigma, A)


# ---------------------------------------------------------------- certification

def plane_interior_equilibrium(field: VectorField, i: int, j: int):
    """Equilibrium with both coordinates positive in the plane of axes i, j, or None."""
    sub = field.restrict([i, j])
    try:
        u = np.linalg.solve(sub.A, -sub.sigma)
    except np.linalg.LinAlgError:
        return None
    if np.all(u > 0):
        return np.sqrt(u)
    return None


def _arrive(target, tol):
    def stop(t, x):
        return np.max(np.abs(x - target)) < tol
    return stop


def _run_leg(sub, x0, target, t_max):
    from .simulate import integrate
    return integrate(sub, x0, t_max, rtol=1e-9, atol=1e-14, stop=_arrive(target, ARRIVAL_TOL))


def certify_connections(field: VectorField, net: Network, t_max: float = T_MAX,
                        delta: float = DELTA, strict: bool = False) -> dict:
    """Integrate every connection inside its invariant subspace.

    Returns ``{"connections": [...], "passed": bool, "polylines": {key: [array, ...]}}``;
    polylines are in full coordinates and feed :func:`hetnet.simulate.max_distance`.
    """
    rows, polylines = [], {}
    for conn in net.sorted_connections:
        i, j = conn.source, conn.target
        ai, aj = net.axis(i), net.axis(j)
        coords = sorted(conn.subspace)
        sub = field.restrict(coords)
        pos = {k: p for p, k in enumerate(coords)}
        start = np.zeros(len(coords))
        start[pos[ai]] = net.equilibrium(i).position
        target = np.zeros(len(coords))
        target[pos[aj]] = net.equilibrium(j).position
        row = {"connection": str(conn), "dim": conn.dim}
        if conn.dim == 1:
            eq = plane_interior_equilibrium(field, ai, aj)
            if eq is not None:
                row.update(status="FAIL", code=InteriorEquilibrium.code, witness=eq.tolist())
                rows.append(row)
                if strict:
                    raise InteriorEquilibrium("interior equilibrium in connection plane",
                                              connection=str(conn), coords=eq.tolist())
                continue
            dirs = [(0.0, 1.0)]
        else:
            # fan over the quarter arc between the m-point and e-point directions
            m_axis = [k for k in coords if k not in (ai, aj)][0]
            th = [(s + 1) * math.pi / (2 * (FAN_SIZE + 1)) for s in range(FAN_SIZE)]
            dirs = [(math.sin(a), math.cos(a)) for a in th]
        legs, ok, t_end = [], True, 0.0
        for sm, se in dirs:
            x0 = start.copy()
            x0[pos[aj]] += delta * se
            if conn.dim == 2:
                x0[pos[m_axis]] += delta * sm
            traj = _run_leg(sub, x0, target, t_max)
            if traj.status != "STOPPED":
                ok = False
                break
            t_end = max(t_end, traj.times[-1])
            full = np.zeros((len(traj.times) + 2, net.n))
            full[1:-1, [k - 1 for k in coords]] = traj.states
            full[0] = equilibrium_point(net, i)
            full[-1] = equilibrium_point(net, j)
            legs.append(full)
        if ok:
            row.update(status="PASS", time=t_end, trajectories=len(legs))
            polylines[conn.key] = legs
        else:
            row.update(status="FAIL", code=Timeout.code, t_max=t_max)
            if strict:
                raise Timeout("connection not reached before t_max", connection=str(conn), t_max=t_max)
        rows.append(row)
    return {"connections": rows, "passed": all(r["status"] == "PASS" for r in rows),
            "polylines": polylines}
