"""Analytic verdict vs. simulation on the four-node clique network.

Runs the stable and the violating instantiation, 50 samples each, and
writes traces for the stable one.

    python scripts/clique4_experiment.py [--samples N] [--out DIR]
"""
import argparse
import time
from pathlib import Path

from hetnet import stability as st
from hetnet.cli import write_traces
from hetnet.model import load_network
from hetnet.realize import certify_connections, synthesize_field
from hetnet.simulate import ExperimentConfig, stability_experiment

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/clique4"))
    args = ap.parse_args()

    for name in ("clique4", "clique4_weak"):
        net = load_network(FIXTURES / f"{name}.json")
        rho = st.rho_table(net)
        print(f"== {name}: " + ", ".join(f"ρ{j}={r.value:.3g}" for j, r in rho.items()))
        print("   THAS", st.check_thas(net).result, "| THAS2", st.check_thas2(net).result)
        field = synthesize_field(net)
        cert = certify_connections(field, net)
        t0 = time.perf_counter()
        res = stability_experiment(field, net, ExperimentConfig(n_samples=args.samples, seed=args.seed),
                                   cert["polylines"], keep_trajectories=name == "clique4")
        print(f"   {res['result']} {res['counts']} in {time.perf_counter() - t0:.1f}s")
        ratios = [r["geo_mean_ratio"] for r in res["runs"] if r["geo_mean_ratio"] is not None]
        if ratios:
            print(f"   ENTER-distance ratio per event: max {max(ratios):.3g}")
        if name == "clique4":
            write_traces(net, res.pop("trajectories"), res["runs"], args.out)
            print(f"   traces in {args.out}")


if __name__ == "__main__":
    main()
