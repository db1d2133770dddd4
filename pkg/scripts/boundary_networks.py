"""Verdicts on the two boundary networks where every long cycle has exponent 1."""
from pathlib import Path

from hetnet import classify as cl
from hetnet import stability as st
from hetnet.model import load_network

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

for name in ("y5", "ladder3"):
    net = load_network(FIXTURES / f"{name}.json")
    print(f"== {name}: base cycles {cl.find_flong_free_cycles(net)}")
    for v in (st.check_thas(net), st.check_thas2(net), st.check_lv_aux(net)):
        print(f"   {v.theorem:6s} {v.result}")
        for w in v.witnesses[:3]:
            seq = w.get("walk") or w.get("cycle") or [w.get("equilibrium")]
            print(f"      {seq} product={w.get('product', w.get('ratio')):.4g} marginal={w.get('marginal', '-')}")
