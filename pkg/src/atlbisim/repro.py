"""Reproduction harness: golden truth values and verdicts as table rows.

Each row has the columns of cli.CSV_COLUMNS.  ``expected`` comes from
fixtures/golden.json (figures) or from the cross-variant agreement rules
(ThreeBallot); ``got`` is what this engine computes.
"""
from __future__ import annotations

import json
import time

from . import bisim as B
from . import fixtures
from . import mc
from . import threeballot as T

SEMANTICS = (mc.Semantics.SUBJECTIVE, mc.Semantics.OBJECTIVE)


def golden() -> dict:
    with fixtures.path("golden").open(encoding="utf-8") as fh:
        return json.load(fh)


def _row(instance, what, sem, expected, got, reach, t0):
    return {"instance": instance, "formula/relation": what, "semantics": sem,
            "expected": _fmt(expected), "got": _fmt(got), "|reachable|": reach,
            "time": f"{time.perf_counter() - t0:.3f}"}


def _fmt(v) -> str:
    return str(v).lower() if isinstance(v, bool) else str(v)


def _verdict_text(v: B.Verdict, expected: str) -> str:
    if v.passed:
        return "pass"
    return f"fail:{v.violated}" if ":" in expected else "fail"


def figure_rows(entries=None) -> list:
    rows = []
    for e in golden()["figures"] if entries is None else entries:
        t0 = time.perf_counter()
        kind = e["kind"]
        if kind == "check":
            M = fixtures.model(e["model"])
            got = mc.check(M, e["state"], e["formula"], e["semantics"])
            rows.append(_row(f"{e['model']}@{e['state']}", e["formula"], e["semantics"],
                             e["expected"], got, M.n_states, t0))
        elif kind in ("verify", "verify-pre"):
            M, M2, R = fixtures.relation(e["relation"])
            verify = B.verify_bisimulation if kind == "verify" else B.verify_pre_bisimulation
            v = verify(M, M2, R.coalition, R)
            m1, m2 = fixtures.RELATIONS[e["relation"]]
            rows.append(_row(f"{m1}~{m2}", f"{e['relation']} ({kind})", "-", e["expected"],
                             _verdict_text(v, e["expected"]), f"{M.n_states}/{M2.n_states}", t0))
        elif kind == "decide":
            a, b = e["models"]
            M, M2 = fixtures.model(a), fixtures.model(b)
            res = B.decide_bisimilarity(M, M.states[M.initial], M2, M2.states[M2.initial],
                                        e["coalition"])
            rows.append(_row(f"{a}~{b}", f"decide <{','.join(e['coalition'])}>", "-",
                             e["expected"], type(res).__name__, f"{M.n_states}/{M2.n_states}", t0))
        else:
            raise ValueError(f"unknown golden entry kind {kind!r}")
    return rows


def threeballot_rows(n: int, c: int, variants=T.VARIANTS) -> list:
    """Sizes, cross-variant agreement and relation verdicts for one instance."""
    tb = golden()["threeballot"]
    rows = []
    base = f"tb_{n}v{c}c"
    models = {v: T.build(T.ThreeBallotConfig(n, c, v)) for v in variants}
    present = [v for v in T.VARIANTS if v in models]
    sizes = [models[v].n_states for v in ("count", "lex", "tot") if v in models]
    t0 = time.perf_counter()
    order = " < ".join(f"|{v}|" for v in ("count", "lex", "tot") if v in models)
    rows.append(_row(base, order, "-", True, all(a < b for a, b in zip(sizes, sizes[1:])),
                     "/".join(map(str, sizes)), t0))
    cfg = T.ThreeBallotConfig(n, c)
    checkers = {(v, s): mc.Checker(models[v], s) for v in present for s in SEMANTICS}
    for i in range(1, n + 1):
        if i == cfg.att:
            continue
        for name, make in (("coercion", T.coercion_formula), ("anonymity", T.anonymity_formula)):
            f = make(cfg, i)
            for s in SEMANTICS:
                t0 = time.perf_counter()
                vals = {v: bool(checkers[(v, s)].label(f)[models[v].initial_states].all())
                        for v in present}
                same = len(set(vals.values())) == 1
                got = "agree" if same else "differ " + " ".join(f"{v}={_fmt(x)}" for v, x in vals.items())
                rows.append(_row(base, f"{name}_{i} ({'='.join(present)})", s.value, "agree", got,
                                 "/".join(str(models[v].n_states) for v in present), t0))
                if name == "anonymity":
                    for v in present:
                        rows.append(_row(f"{base}_{v}", f"{name}_{i}", s.value,
                                         tb["anonymity_expected"], vals[v], models[v].n_states, t0))
    for a, b, make in (("tot", "lex", T.relation_tot_lex), ("lex", "count", T.relation_lex_count)):
        if a in models and b in models:
            t0 = time.perf_counter()
            R = make(models[a], models[b])
            v = B.verify_bisimulation(models[a], models[b], R.coalition, R)
            rows.append(_row(f"{base}_{a}~{b}", f"rel_{base}_{a}_{b} (verify)", "-",
                             tb["relations_expected"], _verdict_text(v, ""),
                             f"{models[a].n_states}/{models[b].n_states}", t0))
    return rows


def run_suite(suite: str, slow: bool = False) -> list:
    rows = []
    if suite in ("figures", "all"):
        rows += figure_rows()
    if suite in ("threeballot", "all"):
        tb = golden()["threeballot"]
        for n, c in tb["instances"]:
            rows += threeballot_rows(n, c)
        if slow:
            for n, c, variants in tb["slow_instances"]:
                rows += threeballot_rows(n, c, variants=variants)
    return rows

