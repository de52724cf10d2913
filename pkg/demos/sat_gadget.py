"""CNF satisfiability as a coalition model-checking question.

Run: python demos/sat_gadget.py
"""
from atlbisim import bisim as B
from atlbisim import mc, randgen

YES = "<1,2,3> X yes"
cases = {
    "x1 | x2 | x3": [[1, 2, 3]],
    "x1 & !x1": [[1], [-1]],
    "x1 & (x1 | x2)": [[1], [1, 2]],
}
for text, cnf in cases.items():
    M, M2, q = B.sat_reduction_pair(cnf)
    sat = randgen.cnf_satisfiable(cnf)
    checked = mc.check(M, q, YES, "subjective")
    res = B.decide_bisimilarity(M, q, M2, q, ["1", "2", "3"])
    print(f"{text:16} satisfiable={sat!s:5} {YES}={checked!s:5} gadgets {type(res).__name__}")
