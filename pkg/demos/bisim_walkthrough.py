"""Checking, searching for and refuting coalition bisimulations on small games.

Run: python demos/bisim_walkthrough.py
"""
from atlbisim import bisim as B
from atlbisim import fixtures
from atlbisim import formulas as fm

for name in ("rel_fig1_fig2a", "rel_fig1_fig2a_as_printed", "rel_g1_g2", "rel_g7_g8"):
    M, M2, R = fixtures.relation(name)
    v = B.verify_bisimulation(M, M2, R.coalition, R)
    pre = B.verify_pre_bisimulation(M, M2, R.coalition, R)
    print(f"{name:28} bisimulation={v.passed!s:5} violated={v.violated}  pre={pre.passed}")

print()
for m1, m2, A in (("g1", "g2", ["1"]), ("g7", "g8", ["1", "2"]), ("fig1", "fig2a", ["2"])):
    M, M2 = fixtures.model(m1), fixtures.model(m2)
    q, q2 = M.states[M.initial], M2.states[M2.initial]
    res = B.decide_bisimilarity(M, q, M2, q2, A)
    f = B.find_distinguishing_formula(M, q, M2, q2, A, max_size=5)
    print(f"{m1}/{m2} for {A}: {type(res).__name__:12} distinguishing formula: "
          f"{fm.to_text(f) if f else 'none up to size 5'}")
