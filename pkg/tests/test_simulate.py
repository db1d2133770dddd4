import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from conftest import net_of
from hetnet.errors import ConfigError, PolylineMissing
from hetnet.realize import certify_connections, equilibrium_point, synthesize_field
from hetnet.simulate import (ENTER, ExperimentConfig, frak_distance, frak_distances, integrate,
                             max_distance, resample, stability_experiment)


@pytest.fixture(scope="module")
def clique4():
    net = net_of("clique4")
    field = synthesize_field(net)
    return net, field, certify_connections(field, net)["polylines"]


@pytest.mark.parametrize("rtol", [1e-6, 1e-9])
def test_linear_decay(rtol):
    tr = integrate(lambda x: -x, np.array([1.0]), 1.0, rtol=rtol, atol=rtol * 1e-3)
    assert tr.times[-1] == 1.0
    assert abs(tr.final[0] - math.exp(-1)) < 10 * rtol


def _decay_error(rtol):
    tr = integrate(lambda x: -x, np.array([1.0]), 1.0, rtol=rtol, atol=rtol * 1e-3)
    return abs(tr.final[0] - math.exp(-1))


def test_halving_rtol_reduces_error():
    rtols = [1e-5 / 2**k for k in range(12)]
    err = [_decay_error(r) for r in rtols]
    assert all(b < a for a, b in zip(err, err[1:]))
    # error-per-step control: global error scales like rtol**(4/5), not rtol
    slope = np.polyfit(np.log(rtols), np.log(err), 1)[0]
    assert 0.7 < slope < 1.1


def test_bad_tolerances():
    with pytest.raises(ConfigError):
        integrate(lambda x: -x, np.array([1.0]), 1.0, rtol=0.0)


def test_divergence_is_flagged():
    tr = integrate(lambda x: x * x, np.array([1.0]), 10.0)
    assert tr.status == "DIVERGED"
    assert abs(tr.final[0]) > 1e3


def test_stop_callback():
    tr = integrate(lambda x: -x, np.array([1.0]), 10.0, stop=lambda t, x: x[0] < 0.5)
    assert tr.status == "STOPPED"
    assert tr.times[-1] == pytest.approx(math.log(2), abs=0.05)


def test_clique4_visits_boxes_in_cycle_order(clique4):
    net, field, _ = clique4
    x0 = equilibrium_point(net, 1)
    x0[1] += 1e-3
    x0[[2, 3]] += 1e-6
    tr = integrate(field, x0, 200.0, net=net, delta_tilde=0.1)
    enters = [ev.equilibrium for ev in tr.events if ev.kind == ENTER]
    assert enters[:4] == [2, 3, 4, 1]


def test_exact_zeros_survive_integration(clique4):
    net, field, _ = clique4
    x0 = equilibrium_point(net, 1)
    x0[1] += 1e-3
    tr = integrate(field, x0, 60.0)
    assert np.all(tr.states[:, 2:] == 0.0)


def test_events_are_located_on_box_faces(clique4):
    net, field, _ = clique4
    x0 = equilibrium_point(net, 1) + np.array([0, 1e-3, 1e-6, 1e-6])
    tr = integrate(field, x0, 60.0, net=net, delta_tilde=0.1)
    for ev in tr.events:
        gap = np.max(np.abs(ev.state - equilibrium_point(net, ev.equilibrium)))
        assert gap == pytest.approx(0.1, abs=1e-6)


@pytest.mark.parametrize("x, want", [
    ([0.9, 0, 0, 1e-4], 0.0),
    ([0, 0, 0.5, 0.5], 0.0),
    ([0.1, 0.1, 0.1, 0.1], 0.1),
])
def test_frak_distance(x, want):
    assert frak_distance(x, net_of("clique4")) == want


@settings(max_examples=50, deadline=None)
@given(hs.lists(hs.floats(-2, 2), min_size=4, max_size=4))
def test_vectorised_frak_distance(x):
    net = net_of("clique4")
    assert frak_distances(np.array([x]), net)[0] == frak_distance(x, net)


def test_max_distance_at_equilibrium(clique4):
    net, _, poly = clique4
    assert max_distance(equilibrium_point(net, 2), net, 0.01, poly) == 0.0


def test_max_distance_needs_polylines():
    with pytest.raises(PolylineMissing):
        max_distance(np.zeros(4), net_of("clique4"), 0.1)


def test_points_on_connections_are_within_mesh(clique4):
    net, _, poly = clique4
    rng = np.random.default_rng(1)
    for legs in poly.values():
        leg = legs[0]
        for p in leg[rng.integers(len(leg), size=5)]:
            assert max_distance(p, net, 0.05, poly) <= 0.05


def test_frak_distance_bounded_by_max_distance(clique4):
    net, _, poly = clique4
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.uniform(0, 1, 4)
        assert frak_distance(x, net) <= max_distance(x, net, 0.01, poly) + 0.01


def test_finer_mesh_never_increases_distance(clique4):
    net, _, poly = clique4
    rng = np.random.default_rng(3)
    for x in rng.uniform(0, 1, (10, 4)):
        assert max_distance(x, net, 0.01, poly) <= max_distance(x, net, 0.1, poly)


def test_resample_keeps_end_points():
    line = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    r = resample(line, 0.3)
    assert np.array_equal(r[0], line[0]) and np.array_equal(r[-1], line[-1])
    assert np.all(np.linalg.norm(np.diff(r, axis=0), axis=1) <= 0.3 + 1e-12)


@pytest.mark.parametrize("cfg", [
    ExperimentConfig(epsilon=0.2, delta_tilde=0.1),
    ExperimentConfig(delta_tilde=0.6),
    ExperimentConfig(n_samples=0),
])
def test_config_errors(cfg, clique4):
    net, field, poly = clique4
    with pytest.raises(ConfigError):
        stability_experiment(field, net, cfg, poly)


def test_experiment_is_reproducible(clique4):
    net, field, poly = clique4
    cfg = ExperimentConfig(n_samples=3, T_max=100.0, seed=11)
    a = stability_experiment(field, net, cfg, poly)
    b = stability_experiment(field, net, cfg, poly)
    assert a == b


def test_small_stable_experiment(clique4):
    net, field, poly = clique4
    res = stability_experiment(field, net, ExperimentConfig(n_samples=4, seed=3), poly)
    assert res["result"] == "EMPIRICALLY_STABLE"
    for r in res["runs"]:
        # epsilon off the chosen connection; another subspace may be closer
        assert 0 < r["start_frak_d"] <= 1e-3
        assert r["geo_mean_ratio"] < 1


def test_violating_instance_escapes():
    net = net_of("clique4_weak")
    field = synthesize_field(net)
    poly = certify_connections(field, net)["polylines"]
    res = stability_experiment(field, net, ExperimentConfig(n_samples=5, seed=3), poly)
    assert res["result"] in ("EMPIRICALLY_UNSTABLE", "MIXED")
    assert res["counts"]["ESCAPED"] >= 1
