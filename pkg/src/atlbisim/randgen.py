"""Random models, formulas and CNFs for differential testing."""
from __future__ import annotations

import itertools

import numpy as np

from . import formulas as fm

PATHS = ("X", "F", "G", "U", "R")


def random_model_doc(rng: np.random.Generator, max_states=8, max_agents=3, max_actions=3,
                     atoms=("p", "q")) -> dict:
    """A random serial, uniform model in the JSON document form."""
    n = int(rng.integers(1, max_states + 1))
    k = int(rng.integers(1, max_agents + 1))
    m = int(rng.integers(1, max_actions + 1))
    states = [f"s{i}" for i in range(n)]
    agents = [str(i + 1) for i in range(k)]
    actions = [f"a{j}" for j in range(m)]
    indist, protocol = {}, {}
    for ag in agents:
        nb = int(rng.integers(1, min(n, 4) + 1))
        owner = rng.integers(0, nb, size=n)
        parts = [[states[i] for i in range(n) if owner[i] == b] for b in range(nb)]
        parts = [p for p in parts if p]
        indist[ag] = [p for p in parts if len(p) > 1]
        protocol[ag] = {}
        for p in parts:
            size = int(rng.choice([1, 2, 3], p=[0.5, 0.35, 0.15]))
            acts = sorted(rng.choice(m, size=min(size, m), replace=False).tolist())
            for s in p:
                protocol[ag][s] = [actions[a] for a in acts]
    transitions = []
    for s in states:
        for joint in itertools.product(*[protocol[ag][s] for ag in agents]):
            for t in set(rng.integers(0, n, size=int(rng.integers(1, 3))).tolist()):
                transitions.append({"from": s, "joint": list(joint), "to": states[t]})
    labels = rng.random((n, len(atoms))) < 0.4
    return {
        "agents": agents,
        "atoms": list(atoms),
        "actions": actions,
        "states": [{"id": s, "label": [a for j, a in enumerate(atoms) if labels[i, j]]}
                   for i, s in enumerate(states)],
        "initial": states[0],
        "protocol": protocol,
        "transitions": transitions,
        "indist": indist,
    }


def _coalition(rng, agents) -> tuple:
    size = int(rng.integers(0, len(agents) + 1))
    return tuple(sorted(rng.choice(agents, size=size, replace=False).tolist()))


def random_formula(rng: np.random.Generator, agents, atoms, depth=3, positive=False,
                   knowledge=True) -> fm.Formula:
    """A random formula; with positive=True no strategic or knowledge operator is negated."""
    agents = list(agents)
    if depth <= 0 or rng.random() < 0.2:
        if rng.random() < 0.1:
            return fm.TRUE if rng.random() < 0.5 else fm.FALSE
        a = fm.Atom(str(rng.choice(atoms)))
        return fm.Not(a) if positive and rng.random() < 0.3 else a
    ops = ["not", "and", "or", "coal", "coal", "coal"]
    if knowledge:
        ops += ["K", "E", "C"]
    if positive:
        ops.remove("not")
    op = str(rng.choice(ops))
    sub = lambda: random_formula(rng, agents, atoms, depth - 1, positive, knowledge)
    if op == "not":
        return fm.Not(sub())
    if op == "and":
        return fm.And(sub(), sub())
    if op == "or":
        return fm.Or(sub(), sub())
    if op == "K":
        return fm.K(str(rng.choice(agents)), sub())
    if op == "E":
        return fm.E(_coalition(rng, agents), sub())
    if op == "C":
        return fm.C(_coalition(rng, agents), sub())
    kind = str(rng.choice(PATHS))
    if kind == "X":
        path = fm.X(sub())
    elif kind == "F":
        path = fm.F(sub())
    elif kind == "G":
        path = fm.G(sub())
    elif kind == "U":
        path = fm.U(sub(), sub())
    else:
        path = fm.R(sub(), sub())
    return fm.Coalition(_coalition(rng, agents), path)


def random_cnf(rng: np.random.Generator, max_vars=4, max_clauses=4) -> list:
    """A random 3-CNF: each clause has three literals over distinct variables."""
    nv = int(rng.integers(3, max_vars + 1))
    nc = int(rng.integers(1, max_clauses + 1))
    cnf = []
    for _ in range(nc):
        vs = rng.choice(np.arange(1, nv + 1), size=3, replace=False)
        signs = rng.choice([-1, 1], size=3)
        cnf.append([int(v * s) for v, s in zip(vs, signs)])
    return cnf


def cnf_satisfiable(cnf: list) -> bool:
    """Truth-table satisfiability."""
    nv = max((abs(l) for c in cnf for l in c), default=0)
    for bits in itertools.product([False, True], repeat=nv):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in cnf):
            return True
    return False
