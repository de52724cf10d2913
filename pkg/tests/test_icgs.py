import copy
import json

import pytest

from atlbisim import fixtures
from atlbisim.icgs import ICGS, ModelError, Run, load_model, save_model, validate, validate_run


def tiny():
    """Two agents, a shared coin flip, agent 2 cannot tell heads from tails."""
    return {
        "agents": ["1", "2"],
        "atoms": ["h"],
        "actions": ["flip", "idle", "guess_h", "guess_t"],
        "states": [{"id": "s", "label": []}, {"id": "H", "label": ["h"]}, {"id": "T", "label": []}],
        "initial": "s",
        "protocol": {"1": {"s": ["flip"], "H": ["idle"], "T": ["idle"]},
                     "2": {"s": ["idle"], "H": ["guess_h", "guess_t"], "T": ["guess_h", "guess_t"]}},
        "transitions": [
            {"from": "s", "joint": ["flip", "idle"], "to": "H"},
            {"from": "s", "joint": ["flip", "idle"], "to": "T"},
            {"from": "H", "joint": ["idle", "guess_h"], "to": "H"},
            {"from": "H", "joint": ["idle", "guess_t"], "to": "H"},
            {"from": "T", "joint": ["idle", "guess_h"], "to": "T"},
            {"from": "T", "joint": ["idle", "guess_t"], "to": "T"},
        ],
        "indist": {"2": [["H", "T"]]},
    }


def kinds(doc):
    return {i.kind for i in validate(ICGS.from_dict(doc))}


def test_tiny_is_valid():
    assert validate(ICGS.from_dict(tiny())) == []


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_fixtures_validate(name):
    assert validate(fixtures.model(name)) == []


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_fixture_round_trip(name, tmp_path):
    M = fixtures.model(name)
    save_model(M, tmp_path / "m.json")
    M2 = load_model(tmp_path / "m.json")
    assert M2.to_dict() == M.to_dict()
    assert json.loads(M2.to_json()) == M.to_dict()


def test_dangling_state():
    doc = tiny()
    doc["transitions"].append({"from": "s", "joint": ["flip", "idle"], "to": "nowhere"})
    assert "dangling" in kinds(doc)


def test_dangling_atom_and_action():
    doc = tiny()
    doc["states"][0]["label"] = ["zzz"]
    doc["protocol"]["1"]["s"] = ["flip", "jump"]
    assert kinds(doc) >= {"dangling"}


def test_duplicate_state():
    doc = tiny()
    doc["states"].append({"id": "H", "label": []})
    assert "duplicate" in kinds(doc)


def test_empty_protocol():
    doc = tiny()
    doc["protocol"]["1"]["H"] = []
    assert "protocol" in kinds(doc)


def test_block_overlap_is_a_partition_error():
    doc = tiny()
    doc["indist"]["2"] = [["H", "T"], ["T", "s"]]
    assert "partition" in kinds(doc)


def test_non_uniform_protocol():
    doc = tiny()
    doc["protocol"]["2"]["T"] = ["guess_h"]
    doc["transitions"] = [t for t in doc["transitions"] if not (t["from"] == "T" and t["joint"][1] == "guess_t")]
    assert "uniformity" in kinds(doc)


def test_missing_successor_breaks_seriality():
    doc = tiny()
    doc["transitions"] = [t for t in doc["transitions"] if t["joint"] != ["idle", "guess_t"] or t["from"] != "H"]
    assert "seriality" in kinds(doc)


def test_disabled_joint_action_in_transition():
    doc = tiny()
    doc["transitions"].append({"from": "s", "joint": ["idle", "idle"], "to": "H"})
    assert "seriality" in kinds(doc)


def test_missing_key_raises():
    doc = tiny()
    del doc["agents"]
    with pytest.raises(ModelError):
        ICGS.from_dict(doc)


def test_successors_and_joint_actions():
    M = ICGS.from_dict(tiny())
    assert M.enabled_joint_actions("s") == [("flip", "idle")]
    assert M.successors("s", ("flip", "idle")) == ["H", "T"]
    with pytest.raises(ModelError):
        M.successors("s", ("idle", "idle"))
    with pytest.raises(ModelError):
        M.successors("nowhere", ("flip", "idle"))


def test_reachable_fig1():
    names, count = fixtures.model("fig1").reachable()
    assert count == 9
    assert "q0" in names


def test_reachable_single_loop():
    doc = {"agents": ["a"], "atoms": [], "actions": ["x"], "states": ["s", "t"], "initial": "s",
           "protocol": {"a": {"s": ["x"], "t": ["x"]}},
           "transitions": [{"from": "s", "joint": ["x"], "to": "s"}, {"from": "t", "joint": ["x"], "to": "t"}]}
    assert ICGS.from_dict(doc).reachable()[1] == 1


def test_neighbourhoods_fig1():
    M = fixtures.model("fig1")
    assert M.ekn(["2"], "q3") == {"q3", "q4", "q5", "q6"}
    assert M.ckn(["2"], "q3") == M.ekn(["2"], "q3")
    assert M.ekn([], "q3") == {"q3"}
    assert M.ckn([], "q3") == {"q3"}


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_neighbourhood_invariants(name):
    M = fixtures.model(name)
    for A in ([M.agents[0]], M.agents):
        cells = set()
        for q in M.states:
            e, c = M.ekn(A, q), M.ckn(A, q)
            assert q in e and e <= c
            assert all(M.ckn(A, r) == c for r in c)
            cells.add(c)
        assert sum(len(c) for c in cells) == M.n_states


def test_ckn_closes_chains():
    M = fixtures.model("g3")
    # agent 1 joins q3,q4; agent 2 joins q2,q3; agent 1 joins q1,q2
    assert M.ckn(["1", "2"], "q1") == {"q1", "q2", "q3", "q4"}


def test_runs():
    M = fixtures.model("fig1")
    good = Run(["q0", "q1", "q3", "q7"],
               [("vote1", "idle"), ("pass", "idle"), ("idle", "pub"), ("idle", "idle")], 3)
    assert validate_run(M, good)
    assert good.at(10) == "q7"
    bad = Run(["q0", "q2"], [("vote1", "idle"), ("idle", "idle")], 1)
    assert not validate_run(M, bad)
    with pytest.raises(ModelError):
        Run(["q0"], [], 0)
    with pytest.raises(ModelError):
        Run(["q0"], [("a", "b")], 3)


def test_document_is_not_mutated():
    doc = tiny()
    before = copy.deepcopy(doc)
    ICGS.from_dict(doc)
    assert doc == before
