import numpy as np
import pytest

from atlbisim import bisim as B
from atlbisim import fixtures
from atlbisim import formulas as fm
from atlbisim import mc
from atlbisim import randgen
from atlbisim.icgs import ModelError, Run


def initial(M):
    return M.states[M.initial]


# ------------------------------------------------------------ verdicts

def test_fig1_fig2a_relation_passes():
    M, M2, R = fixtures.relation("rel_fig1_fig2a")
    v = B.verify_bisimulation(M, M2, R.coalition, R)
    assert v.passed and v.violated is None
    assert B.verify_pre_bisimulation(M, M2, R.coalition, R).passed
    assert B.verify_simulation(M, M2, R.coalition, R).passed


@pytest.mark.parametrize("name", ["rel_fig1_fig2a_as_printed", "rel_fig1_fig2b"])
def test_fig1_variants_fail_transfer(name):
    M, M2, R = fixtures.relation(name)
    v = B.verify_bisimulation(M, M2, R.coalition, R)
    assert not v.passed and v.violated == "1c"


def test_g1_g2_fails_exactly_at_injectivity():
    M, M2, R = fixtures.relation("rel_g1_g2")
    v = B.verify_bisimulation(M, M2, R.coalition, R)
    assert (v.passed, v.violated) == (False, "2")
    assert v.witness
    assert B.verify_pre_bisimulation(M, M2, R.coalition, R).passed


def test_g7_g8_is_not_a_bisimulation():
    M, M2, R = fixtures.relation("rel_g7_g8")
    assert not B.verify_bisimulation(M, M2, R.coalition, R).passed


@pytest.mark.xfail(strict=True, reason="the drawn G7/G8 relation breaks epistemic back-simulation; see notes")
def test_g7_g8_is_a_pre_bisimulation():
    M, M2, R = fixtures.relation("rel_g7_g8")
    assert B.verify_pre_bisimulation(M, M2, R.coalition, R).passed


@pytest.mark.xfail(strict=True, reason="a mixed strategy on agent 1's block splits the targets; see notes")
def test_g3_g4_is_a_pre_bisimulation():
    M, M2, R = fixtures.relation("rel_g3_g4")
    assert B.verify_pre_bisimulation(M, M2, R.coalition, R).passed


def test_labels_violation_reported():
    M, M2 = fixtures.model("g1"), fixtures.model("g2")
    p = next(s for s in M2.states if "p" in M2.label_set(s))
    q = next(s for s in M.states if "p" not in M.label_set(s))
    v = B.verify_bisimulation(M, M2, ["1"], B.BisimRelation.from_names(M, M2, ["1"], [(q, p)]))
    assert v.violated == "1a"


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_identity_is_a_bisimulation(name):
    M = fixtures.model(name)
    for A in ([M.agents[0]], M.agents):
        R = B.BisimRelation.identity(M, A)
        assert B.verify_bisimulation(M, M, A, R).passed, A


def test_verdict_is_symmetric_under_converse():
    for name in fixtures.RELATIONS:
        M, M2, R = fixtures.relation(name)
        a = B.verify_bisimulation(M, M2, R.coalition, R).passed
        b = B.verify_bisimulation(M2, M, R.coalition, R.converse()).passed
        assert a == b, name


def test_simulator_is_returned_on_success():
    M, M2, R = fixtures.relation("rel_fig1_fig2a")
    v = B.verify_bisimulation(M, M2, R.coalition, R)
    assert v.simulator is not None
    for entry in v.simulator["forward"].entries():
        assert len(entry[2]) > 0


# ------------------------------------------------------------ deciding

@pytest.mark.parametrize("m1,m2,A", [("g1", "g2", ["1"]), ("g3", "g4", ["1", "2"]),
                                     ("g5", "g6", ["1"]), ("g7", "g8", ["1", "2"])])
def test_decide_not_bisimilar(m1, m2, A):
    M, M2 = fixtures.model(m1), fixtures.model(m2)
    assert isinstance(B.decide_bisimilarity(M, initial(M), M2, initial(M2), A), B.NotBisimilar)


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_decide_self_is_bisimilar(name):
    M = fixtures.model(name)
    res = B.decide_bisimilarity(M, initial(M), M, initial(M), M.agents[:1])
    assert isinstance(res, B.Bisimilar)
    assert B.verify_bisimulation(M, M, M.agents[:1], res.relation).passed


def test_decide_finds_fig1_fig2a():
    M, M2 = fixtures.model("fig1"), fixtures.model("fig2a")
    res = B.decide_bisimilarity(M, "q0", M2, initial(M2), ["2"])
    assert isinstance(res, B.Bisimilar)
    assert res.relation.contains("q0", initial(M2))
    assert res.verdict.passed


def test_decide_budget():
    M, M2 = fixtures.model("g1"), fixtures.model("g2")
    assert isinstance(B.decide_bisimilarity(M, initial(M), M2, initial(M2), ["1"], budget=1),
                      B.BudgetExceeded)


def _renamed(doc, rng):
    """The same model with states renamed and listed in a shuffled order."""
    new = {s["id"]: f"r{k}" for k, s in enumerate(doc["states"])}
    out = dict(doc)
    out["states"] = [{"id": new[s["id"]], "label": s["label"]} for s in rng.permutation(doc["states"])]
    out["initial"] = new[doc["initial"]]
    out["protocol"] = {a: {new[s]: acts for s, acts in p.items()} for a, p in doc["protocol"].items()}
    out["transitions"] = [{"from": new[t["from"]], "joint": t["joint"], "to": new[t["to"]]}
                          for t in doc["transitions"]]
    out["indist"] = {a: [[new[s] for s in b] for b in bl] for a, bl in doc["indist"].items()}
    return out


def test_decide_renamed_copies_are_bisimilar():
    rng = np.random.default_rng(2)
    for _ in range(20):
        doc = randgen.random_model_doc(rng, max_states=5, max_agents=2, max_actions=2)
        M, M2 = B.ICGS.from_dict(doc), B.ICGS.from_dict(_renamed(doc, rng))
        res = B.decide_bisimilarity(M, initial(M), M2, initial(M2), M.agents[:1])
        assert isinstance(res, B.Bisimilar)
        assert B.find_distinguishing_formula(M, initial(M), M2, initial(M2), M.agents[:1], max_size=3) is None


def test_decide_never_contradicts_a_distinguishing_formula():
    rng = np.random.default_rng(4)
    for _ in range(30):
        M = B.ICGS.from_dict(randgen.random_model_doc(rng, max_states=4, max_agents=1, max_actions=2))
        M2 = B.ICGS.from_dict(randgen.random_model_doc(rng, max_states=4, max_agents=1, max_actions=2))
        res = B.decide_bisimilarity(M, initial(M), M2, initial(M2), ["1"])
        if B.find_distinguishing_formula(M, initial(M), M2, initial(M2), ["1"], max_size=3) is not None:
            assert not isinstance(res, B.Bisimilar)


# ------------------------------------------------------------ distinguishing formulas

def test_g7_g8_distinguished():
    M, M2 = fixtures.model("g7"), fixtures.model("g8")
    f = B.find_distinguishing_formula(M, initial(M), M2, initial(M2), ["1", "2"])
    assert f is not None
    assert mc.check(M, initial(M), f) != mc.check(M2, initial(M2), f)


def test_g1_g2_distinguished_by_eventually_p():
    M, M2 = fixtures.model("g1"), fixtures.model("g2")
    f = B.find_distinguishing_formula(M, initial(M), M2, initial(M2), ["1"])
    assert fm.to_text(f) == "<1> F p"


def test_g3_g4_agree_up_to_size_six():
    M, M2 = fixtures.model("g3"), fixtures.model("g4")
    assert B.find_distinguishing_formula(M, initial(M), M2, initial(M2), ["1", "2"], max_size=6) is None


def test_state_against_itself():
    M = fixtures.model("fig1")
    assert B.find_distinguishing_formula(M, "q0", M, "q0", ["1"], max_size=4) is None


def test_distinguishing_formula_size_guard():
    M = fixtures.model("fig1")
    with pytest.raises(ValueError):
        B.find_distinguishing_formula(M, "q0", M, "q0", ["1"], max_size=0)


def test_enumerator_formulas_are_a_formulas_in_size_order():
    M = fixtures.model("fig1")
    en = B.FormulaEnumerator([M], ["2"])
    last = 0
    for size, f in en.upto(4):
        assert fm.size(f) == size >= last
        assert fm.is_a_formula(f, ["2"])
        last = size


def test_enumerator_classes_are_distinct():
    M = fixtures.model("fig1")
    en = B.FormulaEnumerator([M], ["1"])
    c = en.checkers[0]
    seen = set()
    for _, f in en.upto(3):
        key = c.label(f).tobytes()
        assert key not in seen
        seen.add(key)


# ------------------------------------------------------------ preservation

@pytest.mark.parametrize("name", ["rel_fig1_fig2a"])
def test_preservation_on_passing_fixture(name):
    M, M2, R = fixtures.relation(name)
    rep = B.check_preservation(M, M2, R, max_size=5)
    assert rep.ok, rep.disagreements[:3]
    assert rep.formulas >= 500


def test_preservation_on_identity():
    M = fixtures.model("g7")
    rep = B.check_preservation(M, M, B.BisimRelation.identity(M, ["1", "2"]), max_size=4)
    assert rep.ok


def test_preservation_detects_broken_relation():
    M, M2, R = fixtures.relation("rel_g1_g2")
    assert not B.check_preservation(M, M2, R, max_size=3).ok


# ------------------------------------------------------------ runs

def test_run_bisimilarity():
    M, M2, R = fixtures.relation("rel_fig1_fig2a")
    names = R.pair_names()
    a, b = next((a, b) for a, b in sorted(names) if a == "q0")
    r1 = Run([a], [tuple(M.enabled_joint_actions(a)[0])], 0)
    r2 = Run([b], [tuple(M2.enabled_joint_actions(b)[0])], 0)
    assert B.run_bisimilarity(M, r1, M2, r2, R.coalition, R)
    other = next(s for s in M2.states if (a, s) not in names)
    r3 = Run([other], [tuple(M2.enabled_joint_actions(other)[0])], 0)
    assert not B.run_bisimilarity(M, r1, M2, r3, R.coalition, R)
    r4 = Run([b, b], [tuple(M2.enabled_joint_actions(b)[0])] * 2, 1)
    with pytest.raises(ModelError):
        B.run_bisimilarity(M, r1, M2, r4, R.coalition, R)


# ------------------------------------------------------------ relation IO

def test_relation_round_trip(tmp_path):
    M, M2, R = fixtures.relation("rel_fig1_fig2a")
    B.save_relation(R, tmp_path / "r.json")
    R2 = B.load_relation(tmp_path / "r.json", M, M2)
    assert R2.pair_names() == R.pair_names()
    assert R2.coalition == R.coalition


def test_relation_errors(tmp_path):
    M, M2 = fixtures.model("fig1"), fixtures.model("fig2a")
    with pytest.raises(ModelError):
        B.BisimRelation.from_names(M, M2, ["2"], [("q0", "nowhere")])
    with pytest.raises(ModelError):
        B.BisimRelation.from_dict(M, M2, {"pairs": []})
    with pytest.raises(ModelError):
        B.BisimRelation(M, M2, ["9"], [])
    (tmp_path / "bad.json").write_text("{", encoding="utf-8")
    with pytest.raises(ModelError):
        B.load_relation(tmp_path / "bad.json", M, M2)


# ------------------------------------------------------------ SAT reduction

UNSAT = [[[1], [-1]], [[1, 2], [-1, 2], [1, -2], [-1, -2]], [[1], [-1, 2], [-2]]]
SAT = [[[1, 2, 3]], [[1, -2, 3], [-1, 2, -3]], [[1], [1, 2]]]
YES = fm.parse_formula("<1,2,3> X yes")


@pytest.mark.parametrize("cnf", UNSAT + SAT, ids=str)
def test_model_checking_leg(cnf):
    M = B.sat_reduction_model(cnf)
    assert mc.check(M, initial(M), YES, "subjective") == randgen.cnf_satisfiable(cnf)


@pytest.mark.parametrize("cnf", UNSAT, ids=str)
def test_unsatisfiable_not_bisimilar(cnf):
    M, M2, q = B.sat_reduction_pair(cnf)
    assert isinstance(B.decide_bisimilarity(M, q, M2, q, ["1", "2", "3"]), B.NotBisimilar)


def test_single_clause_bisimilar():
    M, M2, q = B.sat_reduction_pair([[1, 2, 3]])
    assert isinstance(B.decide_bisimilarity(M, q, M2, q, ["1", "2", "3"]), B.Bisimilar)


def test_satisfiable_but_not_bisimilar():
    # the smallest counterexample to the bisimilarity form of the reduction
    M, M2, q = B.sat_reduction_pair([[1], [1, 2]])
    assert isinstance(B.decide_bisimilarity(M, q, M2, q, ["1", "2", "3"]), B.NotBisimilar)


def test_reduction_models_are_valid():
    from atlbisim.icgs import validate
    rng = np.random.default_rng(0)
    for _ in range(10):
        cnf = randgen.random_cnf(rng)
        M, M2, _ = B.sat_reduction_pair(cnf)
        assert validate(M) == [] and validate(M2) == []


def test_reduction_rejects_bad_cnf():
    for cnf in ([], [[]], [[0, 1]]):
        with pytest.raises(ModelError):
            B.sat_reduction_model(cnf)


def test_truth_table():
    assert randgen.cnf_satisfiable([[1, 2, 3]])
    assert not randgen.cnf_satisfiable([[1], [-1]])
    rng = np.random.default_rng(1)
    cnf = randgen.random_cnf(rng)
    assert all(len(set(map(abs, c))) == 3 for c in cnf)
