"""Print the closed semi-linear walks of the five-node network with their factors.

    python scripts/five_node_walk_table.py [--random K]

With ``--random K`` also reports, for K sign-preserving random eigenvalue
tables, how often each verdict comes out STABLE.
"""
import argparse
from collections import Counter
from pathlib import Path

import numpy as np

from hetnet import stability as st
from hetnet.model import load_network, network_from_dict, network_to_dict

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def show(net):
    for w in st.walk_table(net):
        seq = "→".join(f"ξ{v}" for v in w.nodes + w.nodes[:1])
        tag = " (compound)" if w.compound else ""
        print(f"{seq:40s} {'·'.join(w.labels()):45s} {w.product:10.4g}{tag}")
    print()
    for label, q in sorted({lab: q for w in st.walk_table(net) for lab, q in zip(w.labels(), w.per_node)}.items()):
        print(f"{label} = {q.formula}  [{q.lemma}] = {q.value:.4g}")


def random_verdicts(net, k, seed=0):
    rng = np.random.default_rng(seed)
    doc = network_to_dict(net)
    tally = Counter()
    for _ in range(k):
        doc["eigenvalues"] = {str(j): [float(np.copysign(rng.uniform(0.1, 5), v)) if v else 0.0
                                       for v in net.eigenvalues[j]] for j in net.ids}
        inst = network_from_dict(doc)
        tally["THAS", st.check_thas(inst).result] += 1
        tally["THAS2", st.check_thas2(inst).result] += 1
    for key, n in sorted(tally.items()):
        print(*key, n)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--random", type=int, default=0)
    args = ap.parse_args()
    net = load_network(FIXTURES / "five_node.json")
    show(net)
    if args.random:
        print()
        random_verdicts(net, args.random)


if __name__ == "__main__":
    main()
