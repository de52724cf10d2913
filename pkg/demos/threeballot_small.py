"""The two-voter, two-candidate ThreeBallot instance in its three encodings.

Run: python demos/threeballot_small.py [--with-tot]
The tot encoding has about 720k states and takes half a minute to build.
"""
import sys
import time

from atlbisim import bisim as B
from atlbisim import formulas as fm
from atlbisim import mc
from atlbisim import threeballot as T

variants = ["count", "lex"] + (["tot"] if "--with-tot" in sys.argv else [])
models = {}
for v in variants:
    t = time.time()
    models[v] = T.build(T.ThreeBallotConfig(2, 2, v))
    print(f"{v:5} {models[v].n_states:>8} states {models[v].n_edges:>9} transitions  {time.time() - t:.1f}s")

cfg = T.ThreeBallotConfig(2, 2)
for make in (T.coercion_formula, T.anonymity_formula):
    f = make(cfg, 1)
    vals = {v: mc.holds_initially(m, f) for v, m in models.items()}
    print(f"{fm.to_text(f)}\n    {vals}")

R = T.relation_lex_count(models["lex"], models["count"])
v = B.verify_bisimulation(models["lex"], models["count"], R.coalition, R)
print(f"lex/count relation: {len(R)} pairs, bisimulation={v.passed}, violated={v.violated}")
if "tot" in models:
    R = T.relation_tot_lex(models["tot"], models["lex"])
    v = B.verify_bisimulation(models["tot"], models["lex"], R.coalition, R)
    print(f"tot/lex relation: {len(R)} pairs, bisimulation={v.passed}")
