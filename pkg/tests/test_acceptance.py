"""The eight acceptance criteria, each at its stated tolerance and time budget.

Every test records one ``criterion N: PASS|FAIL ...`` line, shown in the
terminal summary. ``python tests/test_acceptance.py`` prints them directly.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

import oracles  # noqa: E402
from conftest import ACCEPTANCE_LINES, expected, net_of  # noqa: E402
from hetnet import classify as cl  # noqa: E402
from hetnet import stability as st  # noqa: E402
from hetnet.model import network_from_dict, network_to_dict  # noqa: E402
from hetnet.realize import certify_connections, equilibrium_point, synthesize_field  # noqa: E402
from hetnet.simulate import ExperimentConfig, integrate, stability_experiment  # noqa: E402


def report(k: int, ok: bool, elapsed: float, budget: float, detail: str = "") -> None:
    ok = ok and elapsed < budget
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s of {budget:g}s) {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def with_table(net, table):
    doc = network_to_dict(net)
    doc["eigenvalues"] = {str(j): list(map(float, row)) for j, row in table.items()}
    return network_from_dict(doc)


def table_of(net):
    return {j: list(net.eigenvalues[j]) for j in net.ids}


# 1 ---------------------------------------------------------------- formulas

def test_criterion_1_rho_formulas():
    t0 = time.perf_counter()
    net = net_of("clique4")
    want = expected("clique4")
    problems = []
    for j in net.ids:
        est = st.compute_rho(net, None, j)
        tabulated = want["rho_formulas"][str(j)]
        if oracles.normalize(est.formula) != oracles.normalize(tabulated):
            problems.append(f"ρ{j} formula {est.formula!r} != {tabulated!r}")
        ref = oracles.evaluate(tabulated, table_of(net))
        if not math.isclose(est.value, ref, rel_tol=1e-12):
            problems.append(f"ρ{j} = {est.value} != {ref}")
    report(1, not problems, time.perf_counter() - t0, 1.0, "; ".join(problems))


# 2 ---------------------------------------------------------------- walk table

def test_criterion_2_walk_table():
    t0 = time.perf_counter()
    net = net_of("five_node")
    want = expected("five_node")
    rows = st.walk_table(net)
    problems = []
    got_seq = [list(w.nodes) for w in rows]
    for seq, factors in zip(want["walks"], want["walk_factors"]):
        hit = [w for w in rows if st.same_walk(w.nodes, seq)]
        if not hit:
            problems.append(f"walk {seq} missing")
            continue
        labels = hit[0].labels()
        if factors not in [labels[i:] + labels[:i] for i in range(len(labels))]:
            problems.append(f"factors of {seq}: {labels}")
    if len(rows) != len(want["walks"]):
        problems.append(f"{len(rows)} walks enumerated, expected {len(want['walks'])}: {got_seq}")

    # per-node factors against the tabulated formulas on random sign-preserving tables
    rng = np.random.default_rng(52)
    base = table_of(net)
    bad = set()
    for _ in range(20):
        tab = oracles.rescaled_table(base, rng)
        inst = with_table(net, tab)
        for w in st.walk_table(inst):
            for label, q in zip(w.labels(), w.per_node):
                ref = oracles.evaluate(want["q"][label], tab)
                if not math.isclose(q.value, ref, rel_tol=1e-12):
                    bad.add(label)
    if bad:
        problems.append("factor mismatch for " + ", ".join(sorted(bad)))
    report(2, not problems, time.perf_counter() - t0, 5.0, "; ".join(problems))


# 3 ---------------------------------------------------------------- boundary fixture

def test_criterion_3_boundary_networks():
    t0 = time.perf_counter()
    problems = []
    for name in ("y5", "ladder3"):
        net = net_of(name)
        for check in (st.check_thas, st.check_thas2):
            v = check(net)
            if v.result != st.INCONCLUSIVE:
                problems.append(f"{name} {v.theorem}: {v.result}")
                continue
            if not any(1 - 1e-9 <= w["product"] <= 1 + 1e-9 for w in v.witnesses):
                lo = min(w["product"] for w in v.witnesses)
                problems.append(f"{name} {v.theorem}: no witness with product 1 (smallest {lo:.4g})")
        lv = st.check_lv_aux(net)
        if lv.result != st.STABLE:
            problems.append(f"{name} LV_AUX: {lv.result}")
    report(3, not problems, time.perf_counter() - t0, 5.0, "; ".join(problems))


# 4 ---------------------------------------------------------------- classification

def test_criterion_4_classification():
    t0 = time.perf_counter()
    problems = []
    y5 = cl.decompose_structure(net_of("y5"))
    if (y5.case, y5.J) != ("I", 5):
        problems.append(f"Y5: case {y5.case}, J = {y5.J}")
    ks = cl.decompose_structure(net_of("ks_completed"))
    want = expected("ks_completed")
    groups = {str(k): list(v) for k, v in ks.groups.items()}
    if ks.case != want["case"] or groups != want["groups"]:
        problems.append(f"KS: case {ks.case}, groups {groups}")
    ladder = cl.find_flong_free_cycles(net_of("ladder3"))
    if [list(c) for c in ladder] != expected("ladder3")["base_cycles"]:
        problems.append(f"ladder base cycles {ladder}")
    report(4, not problems, time.perf_counter() - t0, 1.0, "; ".join(problems))


# 5 ---------------------------------------------------------------- detector vs brute force

def random_digraph(rng, n):
    adj = {v: [w for w in range(n) if w != v and rng.random() < 0.35] for v in range(n)}
    return adj


def test_criterion_5_detector_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    disagree = 0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        adj = random_digraph(rng, n)
        rho = np.exp(rng.uniform(-0.6, 0.6, n))
        # THAS: arc i -> j carries rho_j
        w = np.full((n, n), np.inf)
        for v, ws in adj.items():
            for u in ws:
                w[v, u] = math.log(rho[u])
        fast = st.light_cycle_exists(w)
        slow = oracles.any_cycle_not_above_one(adj, lambda c: [rho[v] for v in c])
        disagree += fast != slow
        # THAS2: triplet graph, one factor per consecutive pair of arcs
        arcs = [(v, u) for v, ws in adj.items() for u in ws]
        tadj = {a: [b for b in arcs if b[0] == a[1]] for a in arcs}
        q = {(a, b): math.exp(rng.uniform(-0.6, 0.6)) for a in arcs for b in tadj[a]}
        pos = {a: p for p, a in enumerate(arcs)}
        tw = np.full((len(arcs), len(arcs)), np.inf)
        for (a, b), val in q.items():
            tw[pos[a], pos[b]] = math.log(val)
        fast = st.light_cycle_exists(tw)
        slow = oracles.any_cycle_not_above_one(
            tadj, lambda c: [q[(c[i], c[(i + 1) % len(c)])] for i in range(len(c))])
        disagree += fast != slow
    report(5, disagree == 0, time.perf_counter() - t0, 30.0, f"{disagree} disagreements")


# 6 ---------------------------------------------------------------- realization

REALIZABLE = ("clique4", "five_node", "y5", "ladder3", "ks_completed", "triangle")


def test_criterion_6_realization_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst, leaks = 0.0, 0
    for s in range(20):
        net = net_of(REALIZABLE[s % len(REALIZABLE)])
        inst = with_table(net, oracles.rescaled_table(table_of(net), rng))
        field = synthesize_field(inst)
        for j in inst.ids:
            J = oracles.fd_jacobian(field.rhs, equilibrium_point(inst, j))
            for k in range(1, inst.n + 1):
                lam = inst.lam(j, k)
                worst = max(worst, abs(J[k - 1, k - 1] - lam) / abs(lam))
            off = J - np.diag(np.diag(J))
            worst = max(worst, float(np.max(np.abs(off))))
        for _ in range(50):
            x = rng.uniform(-2, 2, inst.n)
            zero = rng.random(inst.n) < 0.5
            x[zero] = 0.0
            leaks += int(np.any(field.rhs(x)[zero] != 0.0))
    ok = worst < 1e-6 and leaks == 0
    report(6, ok, time.perf_counter() - t0, 30.0,
           f"max relative Jacobian error {worst:.2e}, {leaks} subspace leaks in 1000 points")


# 7 ---------------------------------------------------------------- simulation

def test_criterion_7_analytic_vs_empirical():
    t0 = time.perf_counter()
    problems = []
    cfg = ExperimentConfig(epsilon=1e-3, n_samples=50, T_max=500.0, seed=7)
    for name, want_stable in (("clique4", True), ("clique4_weak", False)):
        net = net_of(name)
        field = synthesize_field(net)
        cert = certify_connections(field, net)
        if not cert["passed"]:
            problems.append(f"{name}: certification failed")
            continue
        res = stability_experiment(field, net, cfg, cert["polylines"])
        if want_stable:
            if res["result"] != "EMPIRICALLY_STABLE":
                problems.append(f"{name}: {res['result']} {res['counts']}")
            ratios = [r["geo_mean_ratio"] for r in res["runs"]]
            finals = [r["final_frak_d"] for r in res["runs"]]
            if any(r is None or r >= 1 for r in ratios):
                problems.append(f"{name}: geometric-mean ratio not < 1 in some run")
            if max(finals) >= 1e-5:
                problems.append(f"{name}: final distance {max(finals):.2e}")
        elif res["result"] == "EMPIRICALLY_STABLE":
            problems.append(f"{name}: unexpectedly EMPIRICALLY_STABLE")
        if not want_stable:
            products = [math.prod(st.compute_rho(net, None, j).value for j in c)
                        for c in st.enumerate_cycles(net)]
            if max(products) >= 0.5:
                problems.append(f"{name}: violating instance has cycle product {max(products):.3g}")
    report(7, not problems, time.perf_counter() - t0, 120.0, "; ".join(problems))


# 8 ---------------------------------------------------------------- integrator

def test_criterion_8_integrator():
    t0 = time.perf_counter()
    errs = {}
    for rtol in (1e-6, 1e-9):
        tr = integrate(lambda x: -x, np.array([1.0]), 1.0, rtol=rtol, atol=rtol * 1e-3)
        errs[rtol] = abs(tr.final[0] - math.exp(-1.0))
    ok = all(e < 10 * r for r, e in errs.items()) and errs[1e-6] / errs[1e-9] >= 1e2
    report(8, ok, time.perf_counter() - t0, 1.0,
           f"errors {errs[1e-6]:.2e}, {errs[1e-9]:.2e}, ratio {errs[1e-6] / errs[1e-9]:.0f}")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
