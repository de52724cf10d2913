"""Who can force which winner in the two-agent voting game, and how.

Run: python demos/voting_strategies.py
"""
from atlbisim import fixtures, mc

M = fixtures.model("fig1")
formulas = ["<1> F win1", "<1> G !win1", "<1,2> F win1", "<2> F win1"]

for sem in ("subjective", "objective"):
    checker = mc.Checker(M, sem)
    print(f"-- {sem}")
    for f in formulas:
        states = sorted(checker.truth_set(f).states)
        print(f"{f:16} holds at {' '.join(states) or '(nowhere)'}")

# agent 2 cannot tell q3..q6 apart, so only the objective reading lets it win from q3
checker = mc.Checker(M, "objective")
w = checker.witness("<2> F win1", "q3")
print("objective witness for <2> F win1 at q3:", w.to_json())
