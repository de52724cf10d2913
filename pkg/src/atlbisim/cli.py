"""Command-line front end.

Exit codes: 0 when every check came out as expected, 1 when some property
or assertion failed, 2 on usage, parse or model errors.

Model arguments accept a file path or the name of a shipped fixture
(``fig1``, ``g3``, ...); relation arguments likewise accept a shipped
relation name (``rel_fig1_fig2a``, ...).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import bisim as B
from . import fixtures
from . import formulas as fm
from . import mc
from . import threeballot as T
from .icgs import ModelError, load_model, save_model, validate

OK, FAILED, USAGE = 0, 1, 2

CSV_COLUMNS = ("instance", "formula/relation", "semantics", "expected", "got", "|reachable|", "time")


class UsageError(Exception):
    pass


# --------------------------------------------------------------- loading

def _model(arg: str):
    if os.path.exists(arg):
        return load_model(arg)
    if arg in fixtures.MODELS:
        return fixtures.model(arg)
    raise UsageError(f"no such model file or fixture: {arg!r}")


def _relation(arg: str, M, M2):
    if os.path.exists(arg):
        return B.load_relation(arg, M, M2)
    if arg in fixtures.RELATIONS:
        return B.load_relation(fixtures.path(arg), M, M2)
    raise UsageError(f"no such relation file or shipped relation: {arg!r}")


def _formulas(args) -> list:
    out = [fm.parse_formula(t) for t in args.formula]
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            out += fm.parse_formula_file(fh.read())
    if not out:
        raise UsageError("no formula given (inline or with -f)")
    return out


def _agents(text: str) -> tuple:
    return tuple(a for a in text.split(",") if a)


def _emit(args, doc, plain: str):
    print(json.dumps(doc, indent=1, ensure_ascii=False) if args.json else plain)


# -------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    M = _model(args.model)
    issues = validate(M)
    if args.json:
        print(json.dumps([{"kind": i.kind, "message": i.message} for i in issues], indent=1))
    else:
        for i in issues:
            print(i)
        if not issues:
            print(f"valid: {M.n_states} states, {M.n_edges} transitions")
    return FAILED if issues else OK


def cmd_check(args) -> int:
    M = _model(args.model)
    checker = mc.Checker(M, args.semantics)
    states = [args.state] if args.state else [M.states[int(q)] for q in M.initial_states]
    rows, lines, all_true = [], [], True
    for f in _formulas(args):
        for s in states:
            val = checker.check(s, f)
            all_true &= val
            row = {"formula": fm.to_text(f), "state": s, "semantics": checker.semantics.value,
                   "value": val}
            if args.witness and isinstance(f, fm.Coalition):
                w = checker.witness(f, s)
                row["witness"] = None if w is None else w.to_json()
            rows.append(row)
            lines.append(f"{fm.to_text(f)}\t{s}\t{str(val).lower()}")
            if row.get("witness"):
                lines.append(f"  witness: {json.dumps(row['witness'], ensure_ascii=False)}")
    _emit(args, rows, "\n".join(lines))
    return OK if all_true else FAILED


def cmd_label(args) -> int:
    M = _model(args.model)
    checker = mc.Checker(M, args.semantics)
    rows, lines = [], []
    for f in _formulas(args):
        ts = checker.truth_set(f)
        names = [M.states[int(q)] for q in ts.mask.nonzero()[0]]
        rows.append({"formula": fm.to_text(f), "semantics": checker.semantics.value, "states": names})
        lines.append(f"{fm.to_text(f)}\t{' '.join(names)}")
    _emit(args, rows, "\n".join(lines))
    return OK


def cmd_bisim(args) -> int:
    M, M2 = _model(args.model), _model(args.model2)
    if args.mode == "decide":
        q = args.state or M.states[M.initial]
        q2 = args.state2 or M2.states[M2.initial]
        if not args.coalition:
            raise UsageError("decide needs --coalition")
        res = B.decide_bisimilarity(M, q, M2, q2, _agents(args.coalition), budget=args.budget)
        doc = {"result": type(res).__name__, "explored": res.explored}
        if isinstance(res, B.Bisimilar):
            doc["relation"] = res.relation.to_dict()
        if isinstance(res, B.NotBisimilar) and res.reason:
            doc["reason"] = res.reason
        print(json.dumps(doc, indent=1, ensure_ascii=False))
        return OK if isinstance(res, B.Bisimilar) else FAILED
    if not args.relation:
        raise UsageError(f"--mode {args.mode} needs a relation")
    R = _relation(args.relation, M, M2)
    A = _agents(args.coalition) if args.coalition else R.coalition
    verify = B.verify_bisimulation if args.mode == "verify" else B.verify_pre_bisimulation
    v = verify(M, M2, A, R)
    print(json.dumps(v.to_dict(), indent=1, ensure_ascii=False))
    return OK if v.passed else FAILED


def cmd_distinguish(args) -> int:
    M, M2 = _model(args.model), _model(args.model2)
    f = B.find_distinguishing_formula(M, args.state, M2, args.state2, _agents(args.coalition),
                                      args.semantics, max_size=args.max_size)
    doc = {"formula": None if f is None else fm.to_text(f)}
    _emit(args, doc, "none" if f is None else fm.to_text(f))
    return OK if f is not None else FAILED


def cmd_threeballot_gen(args) -> int:
    variants = [v for v in args.variants.split(",") if v]
    for v in variants:
        if v not in T.VARIANTS:
            raise UsageError(f"unknown variant {v!r}; known: {', '.join(T.VARIANTS)}")
    os.makedirs(args.out, exist_ok=True)
    built = {}
    for v in variants:
        cfg = T.ThreeBallotConfig(args.voters, args.candidates, v)
        built[v] = T.build(cfg)
        path = os.path.join(args.out, f"{cfg.name}.json")
        save_model(built[v], path)
        print(f"{path}\t{built[v].n_states} states")
    base = f"tb_{args.voters}v{args.candidates}c"
    for a, b, make in (("tot", "lex", T.relation_tot_lex), ("lex", "count", T.relation_lex_count)):
        if a in built and b in built:
            path = os.path.join(args.out, f"rel_{base}_{a}_{b}.json")
            R = make(built[a], built[b])
            B.save_relation(R, path)
            print(f"{path}\t{len(R)} pairs")
    cfg = T.ThreeBallotConfig(args.voters, args.candidates)
    for kind, make in (("coercion", T.coercion_formula), ("anonymity", T.anonymity_formula)):
        path = os.path.join(args.out, f"{base}_{kind}.txt")
        with open(path, "w", encoding="utf-8") as fh:
            for i in range(1, cfg.n + 1):
                if i != cfg.att:
                    fh.write(f"# voter {i}\n{fm.to_text(make(cfg, i))}\n")
        print(path)
    return OK


def cmd_repro(args) -> int:
    from .repro import run_suite

    rows = run_suite(args.suite, slow=args.slow)
    text = io.StringIO()
    w = csv.writer(text, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r[c] for c in CSV_COLUMNS])
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(text.getvalue())
    widths = [max(len(str(c)), *(len(str(r[c])) for r in rows)) if rows else len(c)
              for c in CSV_COLUMNS]
    print("  ".join(c.ljust(wd) for c, wd in zip(CSV_COLUMNS, widths)))
    for r in rows:
        mark = "" if r["expected"] == r["got"] else "  MISMATCH"
        print("  ".join(str(r[c]).ljust(wd) for c, wd in zip(CSV_COLUMNS, widths)) + mark)
    bad = sum(r["expected"] != r["got"] for r in rows)
    print(f"{len(rows) - bad}/{len(rows)} as expected")
    return FAILED if bad else OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atlbisim", description=__doc__.split("\n")[0])
    p.add_argument("--jobs", type=int, default=1,
                   help="worker count for strategy search (the search is sequential; accepted for scripts)")
    sub = p.add_subparsers(dest="command", required=True)
    sems = [s.value for s in mc.Semantics]

    s = sub.add_parser("validate", help="check model invariants")
    s.add_argument("model")
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_validate)

    for name, run, help_ in (("check", cmd_check, "truth at a state"),
                             ("label", cmd_label, "states satisfying formulas")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("model")
        s.add_argument("formula", nargs="*")
        s.add_argument("-f", "--file", help="formula file, one per line")
        s.add_argument("--semantics", choices=sems, default="subjective")
        s.add_argument("--json", action="store_true")
        if name == "check":
            s.add_argument("--state", help="default: the initial states")
            s.add_argument("--witness", action="store_true", help="print a witnessing strategy")
        s.set_defaults(run=run)

    s = sub.add_parser("bisim", help="verify or search for an A-bisimulation")
    s.add_argument("model")
    s.add_argument("model2")
    s.add_argument("relation", nargs="?")
    s.add_argument("--coalition", help="comma-separated agents (default: the relation's)")
    s.add_argument("--mode", choices=("verify", "verify-pre", "decide"), default="verify")
    s.add_argument("--budget", type=int, default=B.DEFAULT_BUDGET)
    s.add_argument("--state", help="decide: state of the first model (default initial)")
    s.add_argument("--state2", help="decide: state of the second model (default initial)")
    s.set_defaults(run=cmd_bisim)

    s = sub.add_parser("distinguish", help="smallest formula true at exactly one of two states")
    s.add_argument("model")
    s.add_argument("state")
    s.add_argument("model2")
    s.add_argument("state2")
    s.add_argument("--coalition", required=True)
    s.add_argument("--semantics", choices=sems, default="subjective")
    s.add_argument("--max-size", type=int, default=5)
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_distinguish)

    s = sub.add_parser("threeballot-gen", help="write ThreeBallot models, relations and formulas")
    s.add_argument("--voters", "-n", type=int, default=2)
    s.add_argument("--candidates", "-c", type=int, default=2)
    s.add_argument("--variants", default="lex,count", help="comma-separated subset of tot,lex,count")
    s.add_argument("--out", default=".")
    s.set_defaults(run=cmd_threeballot_gen)

    s = sub.add_parser("repro", help="run the golden assertions and print a result table")
    s.add_argument("--suite", choices=("figures", "threeballot", "all", "none"), default="figures")
    s.add_argument("--slow", action="store_true", help="add the larger ThreeBallot instances")
    s.add_argument("--csv", help="also write the table as CSV")
    s.set_defaults(run=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.run(args)
    except (UsageError, ModelError, fm.ParseError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
