"""Adaptive integration, distances to the network and the empirical stability experiment."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError, HetnetError, PolylineMissing, StepUnderflow
from .model import Network, complementary_subspace
from .realize import equilibrium_point

DIVERGENCE = 1e3
MIN_STEP = 1e-14
EVENT_TOL = 1e-10
ENTER, EXIT = "ENTER", "EXIT"

# Dormand-Prince 5(4) tableau
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array(_A[6] + [0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class BoxEvent:
    equilibrium: int
    kind: str
    time: float
    state: np.ndarray
    frak_d: float

    def to_dict(self) -> dict:
        return {"equilibrium": self.equilibrium, "kind": self.kind, "time": self.time,
                "frak_d": self.frak_d}


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    events: list[BoxEvent]
    status: str = "OK"          # OK | DIVERGED | STOPPED

    @property
    def samples(self):
        return list(zip(self.times, self.states))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _rhs(field):
    return field.rhs if hasattr(field, "rhs") else (lambda x: np.asarray(field(x), dtype=float))


_AM = np.zeros((7, 7))
for _s, _row in enumerate(_A):
    _AM[_s, :len(_row)] = _row


def _rk(f, x, k1, h):
    """One Dormand-Prince step; returns (x_new, error vector, f(x_new))."""
    K = np.empty((7, x.size))
    K[0] = k1
    for s in range(1, 6):
        K[s] = f(x + h * (_AM[s, :s] @ K[:s]))
    x_new = x + h * (_AM[6, :6] @ K[:6])
    K[6] = f(x_new)         # FSAL: reused as k1 of the next step
    return x_new, h * (_E @ K), K[6]


def _initial_step(f, x, fx, rtol, atol):
    scale = atol + rtol * np.abs(x)
    d0 = np.sqrt(np.mean((x / scale) ** 2))
    d1 = np.sqrt(np.mean((fx / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    x1 = x + h0 * fx
    d2 = np.sqrt(np.mean(((f(x1) - fx) / scale) ** 2)) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


class _Boxes:
    def __init__(self, net, delta_tilde):
        self.net = net
        self.ids = list(net.ids)
        self.centers = np.array([equilibrium_point(net, j) for j in self.ids])
        self.delta = delta_tilde

    def gap(self, x):
        """max-norm distance to each centre minus the half-width (negative inside)."""
        return np.max(np.abs(x[None, :] - self.centers), axis=1) - self.delta


def integrate(field, x0, T: float, rtol: float = 1e-9, atol: float = 1e-12, *,
              net: Network | None = None, delta_tilde: float = 0.1, stop=None,
              max_step: float = math.inf, record: bool = True) -> Trajectory:
    """Dormand-Prince 4(5) with PI step-size control.

    With ``net`` given, crossings of the max-norm boxes of half-width
    ``delta_tilde`` around the equilibria are located by bisection and
    reported as events. ``stop(t, x)`` ends the run early (status STOPPED).
    """
    f = _rhs(field)
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise HetnetError("initial state is not finite")
    if rtol <= 0 or atol <= 0:
        raise ConfigError("tolerances must be positive", rtol=rtol, atol=atol)
    boxes = _Boxes(net, delta_tilde) if net is not None else None
    t = 0.0
    fx = f(x)
    h = min(_initial_step(f, x, fx, rtol, atol), max_step, T)
    times, states, events = [t], [x.copy()], []
    inside = boxes.gap(x) < 0 if boxes else None
    err_prev = 1e-4
    status = "OK"
    while t < T:
        if h < MIN_STEP:
            raise StepUnderflow("step size underflow", t=t, h=h)
        last = t + h >= T
        if last:
            h = T - t
        x_new, err, f_new = _rk(f, x, fx, h)
        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        r = err / scale
        e = math.sqrt(float(r @ r) / r.size)
        if not np.isfinite(e) or e > 1.0:
            fac = 0.2 if not np.isfinite(e) else max(0.2, 0.9 * e ** -0.2)
            h *= fac
            continue
        if boxes is not None:
            now = boxes.gap(x_new) < 0
            for p in np.nonzero(now != inside)[0]:
                events.append(_locate(f, boxes, p, x, fx, t, h, bool(now[p]), net))
            inside = now
        t = T if last else t + h
        x, fx = x_new, f_new
        if record:
            times.append(t)
            states.append(x.copy())
        if np.max(np.abs(x)) > DIVERGENCE:
            status = "DIVERGED"
            break
        if stop is not None and stop(t, x):
            status = "STOPPED"
            break
        # PI controller (Gustafsson)
        e = max(e, 1e-10)
        fac = 0.9 * e ** (-0.7 / 5) * err_prev ** (0.4 / 5)
        h = min(h * min(5.0, max(0.2, fac)), max_step)
        err_prev = e
    if not record:
        times.append(t)
        states.append(x.copy())
    events.sort(key=lambda ev: ev.time)
    return Trajectory(np.array(times), np.array(states), events, status)


def _locate(f, boxes, p, x, fx, t, h, entering, net):
    lo, hi = 0.0, h
    while hi - lo > EVENT_TOL:
        mid = 0.5 * (lo + hi)
        xm = _rk(f, x, fx, mid)[0]
        if (boxes.gap(xm)[p] < 0) == entering:
            hi = mid
        else:
            lo = mid
    xe = _rk(f, x, fx, hi)[0] if hi > 0 else x
    return BoxEvent(boxes.ids[p], ENTER if entering else EXIT, t + hi, xe, frak_distance(xe, net))


# ---------------------------------------------------------------- distances

def _complements(net: Network):
    cache = getattr(net, "_complement_idx", None)
    if cache is None:
        cache = [np.array(sorted(k - 1 for k in complementary_subspace(c, net.n)), dtype=int)
                 for c in net.sorted_connections]
        object.__setattr__(net, "_complement_idx", cache)
    return cache


def frak_distance(x, net: Network) -> float:
    """Complementary distance: min over connections of the max-norm off the connection's subspace."""
    x = np.abs(np.asarray(x, dtype=float))
    best = math.inf
    for idx in _complements(net):
        d = float(x[idx].max()) if idx.size else 0.0
        best = min(best, d)
    return best


def frak_distances(states: np.ndarray, net: Network) -> np.ndarray:
    """Vectorised :func:`frak_distance` over the rows of ``states``."""
    a = np.abs(np.atleast_2d(states))
    cols = [a[:, idx].max(axis=1) if idx.size else np.zeros(len(a)) for idx in _complements(net)]
    return np.min(np.column_stack(cols), axis=1)


def build_polylines(field, net: Network, **kw) -> dict:
    from .realize import certify_connections
    return certify_connections(field, net, **kw)["polylines"]


def resample(polyline: np.ndarray, mesh: float) -> np.ndarray:
    """Points at arclength multiples of ``mesh`` (end point included)."""
    seg = np.linalg.norm(np.diff(polyline, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return polyline[:1]
    q = np.append(np.arange(0.0, s[-1], mesh), s[-1])
    return np.column_stack([np.interp(q, s, polyline[:, k]) for k in range(polyline.shape[1])])


def max_distance(x, net: Network, mesh: float, polylines: dict | None = None) -> float:
    """Euclidean distance from ``x`` to the network, with connections replaced by resampled polylines."""
    if polylines is None:
        raise PolylineMissing("certify the connections first to obtain polylines")
    if mesh <= 0:
        raise ConfigError("mesh must be positive", mesh=mesh)
    x = np.asarray(x, dtype=float)
    pts = [np.array([equilibrium_point(net, j) for j in net.ids])]
    for legs in polylines.values():
        for leg in legs:
            pts.append(resample(leg, mesh))
    pts = np.vstack(pts)
    return float(np.min(np.linalg.norm(pts - x[None, :], axis=1)))


# ---------------------------------------------------------------- experiment

@dataclass
class ExperimentConfig:
    epsilon: float = 1e-3
    delta_tilde: float = 0.1
    T_max: float = 500.0
    n_samples: int = 50
    seed: int = 0
    escape_threshold: float = 0.1
    rtol: float = 1e-6
    atol: float = 1e-300

    def validate(self, net: Network) -> None:
        if not 0 < self.epsilon < self.delta_tilde:
            raise ConfigError("need 0 < epsilon < delta_tilde", epsilon=self.epsilon,
                              delta_tilde=self.delta_tilde)
        pts = [equilibrium_point(net, j) for j in net.ids]
        gaps = [np.max(np.abs(a - b)) for p, a in enumerate(pts) for b in pts[p + 1:]]
        if gaps and self.delta_tilde >= min(gaps) / 2:
            raise ConfigError("boxes around equilibria overlap", delta_tilde=self.delta_tilde)
        if self.n_samples < 1 or self.T_max <= 0:
            raise ConfigError("n_samples and T_max must be positive")


def _sample_start(rng, net, polylines, cfg):
    conns = [c for c in net.sorted_connections if c.key in polylines]
    centers = np.array([equilibrium_point(net, j) for j in net.ids])
    for _ in range(1000):
        c = conns[rng.integers(len(conns))]
        legs = polylines[c.key]
        leg = legs[rng.integers(len(legs))]
        seg = np.linalg.norm(np.diff(leg, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        u = rng.uniform(0, s[-1])
        x = np.array([np.interp(u, s, leg[:, k]) for k in range(net.n)])
        if np.min(np.max(np.abs(x[None, :] - centers), axis=1)) <= cfg.delta_tilde:
            continue
        comp = sorted(complementary_subspace(c, net.n))
        if not comp:
            continue
        # every off-subspace coordinate gets a share of epsilon, one gets all of it,
        # so no coordinate that must grow later starts at an exact zero
        offs = cfg.epsilon * rng.uniform(0.1, 1.0, len(comp))
        offs[rng.integers(len(comp))] = cfg.epsilon
        x[[k - 1 for k in comp]] += offs
        return x, str(c)
    raise ConfigError("could not place an initial point outside the boxes")


def _geo_ratio(values):
    v = [max(d, 1e-300) for d in values]
    if len(v) < 2:
        return None
    return math.exp((math.log(v[-1]) - math.log(v[0])) / (len(v) - 1))


def run_sample(field, net, x0, cfg: ExperimentConfig) -> tuple[dict, Trajectory | None]:
    try:
        traj = integrate(field, x0, cfg.T_max, cfg.rtol, cfg.atol, net=net,
                         delta_tilde=cfg.delta_tilde, max_step=1.0)
    except HetnetError as exc:
        return {"classification": "UNDECIDED", "error": exc.code}, None
    dists = frak_distances(traj.states, net)
    enter = [ev.frak_d for ev in traj.events if ev.kind == ENTER]
    final = float(dists[-1])
    sup_enter = max(enter) if enter else None
    escaped = traj.status == "DIVERGED" or float(dists.max()) > cfg.escape_threshold
    if escaped:
        label = "ESCAPED"
    elif final < cfg.epsilon / 100 and (sup_enter or 0.0) < cfg.escape_threshold:
        label = "CONVERGED"
    else:
        label = "UNDECIDED"
    return {"classification": label, "final_frak_d": final, "sup_enter_frak_d": sup_enter,
            "enter_frak_d": enter, "geo_mean_ratio": _geo_ratio(enter),
            "n_events": len(traj.events), "status": traj.status}, traj


def stability_experiment(field, net: Network, cfg: ExperimentConfig, polylines: dict | None = None,
                         keep_trajectories: bool = False) -> dict:
    cfg.validate(net)
    if polylines is None:
        raise PolylineMissing("certify the connections first to obtain polylines")
    rng = np.random.default_rng(cfg.seed)
    runs, trajs = [], []
    for s in range(cfg.n_samples):
        x0, conn = _sample_start(rng, net, polylines, cfg)
        row, traj = run_sample(field, net, x0, cfg)
        row.update(sample=s, start_connection=conn, start_frak_d=frak_distance(x0, net))
        runs.append(row)
        if keep_trajectories:
            trajs.append(traj)
    labels = [r["classification"] for r in runs]
    if all(lab == "CONVERGED" for lab in labels):
        verdict = "EMPIRICALLY_STABLE"
    elif "ESCAPED" in labels:
        verdict = "EMPIRICALLY_UNSTABLE"
    else:
        verdict = "MIXED"
    out = {"result": verdict, "config": asdict(cfg), "runs": runs,
           "counts": {k: labels.count(k) for k in ("CONVERGED", "ESCAPED", "UNDECIDED")}}
    if keep_trajectories:
        out["trajectories"] = trajs
    return out
