"""``hetnet`` command line: validate, classify, analyze, realize, certify, simulate, report.

Exit codes: 0 stable / ok, 3 inconclusive (or not certified), 2 invalid input, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import classify as cls
from . import stability as st
from .errors import HetnetError
from .model import AC, dumps, load_network
from .realize import VectorField, certify_connections, load_field, synthesize_field
from .simulate import ENTER, ExperimentConfig, frak_distances, stability_experiment

SCHEMA_VERSION = "1"
MD_WALK_ROWS = 40
EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 1, 2, 3
INVALID_CODES = {"parse_error", "schema_error", "invariant_error", "incomplete_clique",
                 "not_representable", "role_conflict", "inconsistent_radial", "config_error"}


class StageError(Exception):
    def __init__(self, stage: str, err: HetnetError):
        super().__init__(str(err))
        self.stage, self.err = stage, err


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except HetnetError as err:
        raise StageError(name, err) from err


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _emit(doc: dict, fmt: str, title: str, out=None):
    doc = {"schema_version": SCHEMA_VERSION, **_jsonable(doc)}
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n" if fmt == "json" else to_markdown(title, doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return doc


# ---------------------------------------------------------------- analysis helpers

def analyze_network(net, theorem: str = "all", tol: float = st.DEFAULT_TOL, max_witnesses=None) -> dict:
    rho = _stage("analyze", st.rho_table, net)
    doc = {"rho": {str(j): r.to_dict() for j, r in rho.items()}, "verdicts": {}}
    if theorem in ("thas", "all"):
        doc["verdicts"]["THAS"] = _stage("analyze", st.check_thas, net, tol, max_witnesses).to_dict()
        doc["condition"] = st.thas_condition(net, rho)
        doc["condition_lambda"] = st.thas_condition(net, rho, substitute=True)
    if theorem in ("thas2", "all"):
        doc["verdicts"]["THAS2"] = _stage("analyze", st.check_thas2, net, tol, max_witnesses).to_dict()
        g, _ = st.triplet_graph(net)
        if g.number_of_nodes() <= st.TRIPLET_ENUM_LIMIT:
            walks = st.walk_table(net)
            doc["walks"] = [w.to_dict() for w in walks]
            doc["walk_conditions"] = st.thas2_conditions(walks)
    if theorem in ("lv", "all"):
        doc["verdicts"]["LV_AUX"] = st.check_lv_aux(net, tol).to_dict()
    return doc


def analytic_result(verdicts: dict) -> str:
    """STABLE if a main theorem proves it; the Lotka-Volterra criterion does not count."""
    main = [v["result"] for k, v in verdicts.items() if k in (st.THAS, st.THAS2)]
    return st.STABLE if st.STABLE in main else st.INCONCLUSIVE


def agreement(analytic: str, empirical: str | None) -> str:
    if empirical is None:
        return "UNSET"
    if analytic == st.STABLE and empirical != "EMPIRICALLY_STABLE":
        return "INCONSISTENT"
    return "CONSISTENT"


# ---------------------------------------------------------------- subcommands

def cmd_validate(args) -> int:
    net = _stage("validate", load_network, args.file)
    doc = {"valid": True, "mode": net.mode, "n": net.n, "equilibria": len(net.ids),
           "connections": len(net.connections)}
    if args.out:
        Path(args.out).write_text(dumps(net))
        doc["canonical"] = str(args.out)
    _emit(doc, args.format, "validate")
    return EXIT_OK


def cmd_classify(args) -> int:
    net = _stage("validate", load_network, args.file)
    doc = _stage("classify", cls.classify, net)
    _emit(doc, args.format, "classify", args.out)
    return EXIT_OK if doc["ac"]["ac_network"] else EXIT_INVALID


def cmd_analyze(args) -> int:
    net = _stage("validate", load_network, args.file)
    doc = analyze_network(net, args.theorem, args.tol, args.max_witnesses)
    wanted = {"thas": ["THAS"], "thas2": ["THAS2"], "lv": ["LV_AUX"], "all": ["THAS", "THAS2"]}[args.theorem]
    ok = any(doc["verdicts"][k]["result"] == st.STABLE for k in wanted)
    doc["result"] = st.STABLE if ok else st.INCONCLUSIVE
    _emit(doc, args.format, "analyze", args.out)
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_realize(args) -> int:
    net = _stage("validate", load_network, args.file)
    field = _stage("realize", synthesize_field, net)
    doc = field.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps({"schema_version": SCHEMA_VERSION, **doc}, indent=2) + "\n")
    else:
        _emit(doc, "json", "realize")
    return EXIT_OK


def cmd_certify(args) -> int:
    net = _stage("validate", load_network, args.file)
    field = _stage("certify", load_field, args.field)
    rep = _stage("certify", certify_connections, field, net, t_max=args.tmax)
    rep.pop("polylines")
    _emit(rep, args.format, "certify", args.out_file)
    return EXIT_OK if rep["passed"] else EXIT_INCONCLUSIVE


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(epsilon=args.eps, T_max=args.tmax_sim, n_samples=args.samples, seed=args.seed)


def run_experiment(net, field: VectorField, cfg: ExperimentConfig, out_dir=None) -> dict:
    cert = _stage("certify", certify_connections, field, net)
    if not cert["passed"]:
        raise StageError("certify", HetnetError("connections could not be certified",
                                                failed=[r for r in cert["connections"] if r["status"] != "PASS"]))
    res = _stage("simulate", stability_experiment, field, net, cfg, cert["polylines"],
                 keep_trajectories=out_dir is not None)
    if out_dir is not None:
        write_traces(net, res.pop("trajectories"), res["runs"], Path(out_dir))
    return res


def write_traces(net, trajs, runs, out: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, tr in enumerate(trajs):
        if tr is None:
            continue
        d = frak_distances(tr.states, net)
        with open(out / f"trajectory_{k:03d}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time"] + [f"x{i + 1}" for i in range(net.n)] + ["frak_d"])
            for t, x, dk in zip(tr.times, tr.states, d):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in x] + [repr(float(dk))])
        ent = [max(ev.frak_d, 1e-300) for ev in tr.events if ev.kind == ENTER]
        if ent:
            ax.semilogy(range(1, len(ent) + 1), ent, marker=".", lw=0.8)
    ax.set_xlabel("ENTER event")
    ax.set_ylabel("complementary distance")
    fig.tight_layout()
    fig.savefig(out / "enter_frak_d.svg")
    plt.close(fig)


def cmd_simulate(args) -> int:
    net = _stage("validate", load_network, args.net)
    field = _stage("simulate", load_field, args.field)
    cfg = _config(args)
    _stage("simulate", cfg.validate, net)
    res = run_experiment(net, field, cfg, args.out)
    _emit(res, args.format, "simulate")
    return EXIT_OK


def build_report(net, args) -> dict:
    doc = {"network": {"mode": net.mode, "n": net.n, "equilibria": list(net.ids),
                       "connections": [str(c) for c in net.sorted_connections]}}
    doc["classification"] = _stage("classify", cls.classify, net)
    doc.update(analyze_network(net, "all", args.tol, args.max_witnesses))
    analytic = analytic_result(doc["verdicts"])
    doc["analytic_result"] = analytic
    empirical = None
    if net.mode == AC and not args.no_simulate:
        field = _stage("realize", synthesize_field, net)
        doc["field"] = field.to_dict()
        res = run_experiment(net, field, _config(args))
        doc["empirical"] = {k: res[k] for k in ("result", "counts", "config")}
        empirical = res["result"]
    elif net.mode != AC:
        doc["empirical_note"] = "no realization for role-annotated networks"
    doc["agreement"] = agreement(analytic, empirical)
    return doc


def cmd_report(args) -> int:
    net = _stage("validate", load_network, args.file)
    doc = build_report(net, args)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    full = {"schema_version": SCHEMA_VERSION, **_jsonable(doc)}
    (out / "report.json").write_text(json.dumps(full, indent=2, ensure_ascii=False) + "\n")
    (out / "report.md").write_text(to_markdown("report", full))
    sys.stdout.write(json.dumps({"schema_version": SCHEMA_VERSION, "analytic_result": doc["analytic_result"],
                                 "agreement": doc["agreement"], "out": str(out)}) + "\n")
    return EXIT_OK if doc["analytic_result"] == st.STABLE else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------- markdown

def to_markdown(title: str, doc: dict) -> str:
    lines = [f"# hetnet {title}", ""]
    if "network" in doc:
        nw = doc["network"]
        lines += [f"Network in R^{nw['n']} ({nw['mode']}), equilibria {nw['equilibria']}.",
                  "", "Connections: " + ", ".join(nw["connections"]), ""]
    if "classification" in doc:
        c = doc["classification"]
        lines += ["## Classification", "", f"ac-network: {c['ac']['ac_network']}"]
        for v in c["ac"]["violations"]:
            lines.append(f"- violation `{v['code']}`: {v.get('detail', '')}")
        if c["cliques"]:
            lines.append("Δ-cliques: " + ", ".join(f"Δ{d['b']}{d['m']}{d['e']}" for d in c["cliques"]))
        for d in c["decompositions"]:
            lines.append(f"- base cycle {d['base_cycle']}: case {d['case']}, groups {d['groups']}")
        lines.append("")
    if "rho" in doc:
        lines += ["## Local exponents", "", "| node | lemma | ρ | formula |", "|---|---|---|---|"]
        for j, r in doc["rho"].items():
            lines.append(f"| {j} | {r['lemma']} | {r['value']:.6g} | `{r['formula']}` |")
        lines.append("")
    if "condition" in doc:
        lines += ["## Sufficient condition", "", f"    {doc['condition']}", "",
                  f"    {doc['condition_lambda']}", ""]
    if doc.get("walk_conditions"):
        lines += ["## Closed semi-linear walks", "", "| walk | factors | product |", "|---|---|---|"]
        for w in doc["walks"][:MD_WALK_ROWS]:
            lines.append(f"| {w['walk']} | {'·'.join(w['factors'])} | {w['product']:.6g} |")
        if len(doc["walks"]) > MD_WALK_ROWS:
            lines.append(f"\n({len(doc['walks']) - MD_WALK_ROWS} more walks in the JSON output)")
        lines.append("")
    if "verdicts" in doc:
        lines += ["## Verdicts", ""]
        for k, v in doc["verdicts"].items():
            lines.append(f"- **{k}**: {v['result']}")
            for w in v["witnesses"][:10]:
                lines.append(f"  - witness {w.get('cycle') or w.get('walk') or w.get('equilibrium')}"
                             + (f", product {w['product']:.6g}" if "product" in w else "")
                             + (" (marginal)" if w.get("marginal") else ""))
        lines.append("")
    if "empirical" in doc:
        e = doc["empirical"]
        lines += ["## Simulation", "", f"{e['result']} {e['counts']}", ""]
    if "agreement" in doc:
        lines += [f"Analytic result: {doc.get('analytic_result')}; agreement: {doc['agreement']}", ""]
    known = {"schema_version", "network", "classification", "rho", "condition", "condition_lambda",
             "walks", "walk_conditions", "verdicts", "empirical", "agreement", "analytic_result", "field"}
    rest = {k: v for k, v in doc.items() if k not in known}
    if rest and set(rest) != {"empirical_note"}:
        lines += ["```json", json.dumps(rest, indent=2, ensure_ascii=False), "```", ""]
    elif rest:
        lines += [rest["empirical_note"], ""]
    return "\n".join(lines)


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=st.DEFAULT_TOL)
    common.add_argument("--format", choices=("json", "md"), default="json")
    common.add_argument("--max-witnesses", type=int, default=None)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--eps", type=float, default=1e-3)
    sim.add_argument("--samples", type=int, default=20)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--tmax", dest="tmax_sim", type=float, default=500.0)

    p = argparse.ArgumentParser(prog="hetnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a network file")
    s.add_argument("file")
    s.add_argument("--out", help="write the canonical form here")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("classify", parents=[common], help="ac axioms, Δ-cliques, decomposition")
    s.add_argument("file")
    s.add_argument("--out")
    s.set_defaults(run=cmd_classify)

    s = sub.add_parser("analyze", parents=[common], help="stability verdicts")
    s.add_argument("file")
    s.add_argument("--theorem", choices=("thas", "thas2", "lv", "all"), default="all")
    s.add_argument("--out")
    s.set_defaults(run=cmd_analyze)

    s = sub.add_parser("realize", parents=[common], help="synthesize a cubic vector field")
    s.add_argument("file")
    s.add_argument("-o", "--out")
    s.set_defaults(run=cmd_realize)

    s = sub.add_parser("certify", parents=[common], help="integrate every connection")
    s.add_argument("file")
    s.add_argument("field")
    s.add_argument("--tmax", type=float, default=1e4)
    s.add_argument("--out", dest="out_file")
    s.set_defaults(run=cmd_certify)

    s = sub.add_parser("simulate", parents=[common, sim], help="empirical stability experiment")
    s.add_argument("net")
    s.add_argument("field")
    s.add_argument("--out", help="directory for CSV traces and the SVG plot")
    s.set_defaults(run=cmd_simulate)

    s = sub.add_parser("report", parents=[common, sim], help="run everything, write report.json/.md")
    s.add_argument("file")
    s.add_argument("--out", help="output directory (default: current)")
    s.add_argument("--no-simulate", action="store_true")
    s.set_defaults(run=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except StageError as exc:
        code = exc.err.code
        doc = {"schema_version": SCHEMA_VERSION, "error": {"stage": exc.stage, **_jsonable(exc.err.to_dict())}}
        sys.stdout.write(json.dumps(doc, ensure_ascii=False) + "\n")
        return EXIT_INVALID if code in INVALID_CODES else EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort guard for the exit-code contract
        doc = {"schema_version": SCHEMA_VERSION, "error": {"stage": args.command, "code": "internal_error",
                                                           "message": f"{type(exc).__name__}: {exc}"}}
        sys.stdout.write(json.dumps(doc) + "\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
