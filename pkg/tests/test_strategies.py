import itertools

import pytest

from atlbisim import fixtures
from atlbisim import strategies as S
from atlbisim.icgs import ModelError


def brute_count(M, agents, Q=None):
    """Product over (agent, block meeting Q) of the block's protocol size, by listing blocks."""
    total = 1
    for a in agents:
        i = M.agent_index(a)
        states = M.states if Q is None else Q
        blocks = {}
        for s in states:
            blocks.setdefault(M.blocks[i, M.state_index(s)], M.protocol_of(a, s))
        for acts in blocks.values():
            total *= len(acts)
    return total


def test_fig1_agent2_count():
    M = fixtures.model("fig1")
    strats = list(S.enumerate_uniform(M, ["2"]))
    assert len(strats) == brute_count(M, ["2"])
    assert len(set(strats)) == len(strats)


@pytest.mark.parametrize("name", fixtures.MODELS)
def test_enumeration_matches_product(name):
    M = fixtures.model(name)
    for A in ([M.agents[0]], M.agents):
        n = brute_count(M, A)
        if n <= 5000:
            assert sum(1 for _ in S.enumerate_uniform(M, A)) == n
        assert S.count_strategies(M, M.coalition(A)) == n


def test_empty_coalition_has_one_strategy():
    M = fixtures.model("fig1")
    assert len(list(S.enumerate_uniform(M, []))) == 1


def test_single_action_agent_has_one_strategy():
    M = fixtures.model("g1")
    assert sum(1 for _ in S.enumerate_uniform(M, [])) == 1


def test_g3_partial_strategies_on_t():
    # agent 1 blocks {q1,q2},{q3,q4}; agent 2 blocks {q2,q3},{q1},{q4}
    M = fixtures.model("g3")
    T = ["q1", "q2", "q3", "q4"]
    strats = list(S.partial_strategies(M, ["1", "2"], T))
    assert len(strats) == 3 ** 2 * 3 ** 3 == 243
    assert len(strats) == brute_count(M, ["1", "2"], T)


def test_g3_succ_of_t_under_ax():
    M = fixtures.model("g3")
    T = ["q1", "q2", "q3", "q4"]
    sigma = next(s for s in S.partial_strategies(M, ["1", "2"], T)
                 if all(a == M.action_index("a") for (i, _), a in s.choice.items() if i == 0)
                 and all(a == M.action_index("x") for (i, _), a in s.choice.items() if i == 1))
    assert S.succ_of_set(M, sigma) == {"qT"}


def test_singleton_domain_three_actions():
    M = fixtures.model("g3")
    assert len(list(S.partial_strategies(M, ["1"], ["q4"]))) == 3


def test_succ_under_fig1_flip():
    M = fixtures.model("fig1")
    sigma = S.PartialStrategy(M, M.coalition(["1"]), {(0, int(M.blocks[0, M.state_index("q1")])):
                                                      M.action_index("flip")}, [M.state_index("q1")])
    assert S.succ_under(M, "q1", sigma) == {"q4"}


def test_succ_outside_domain_is_an_error():
    M = fixtures.model("fig1")
    sigma = next(S.partial_strategies(M, ["1"], ["q1"]))
    with pytest.raises(ModelError):
        S.succ_under(M, "q0", sigma)


def test_protocol_is_enforced():
    M = fixtures.model("fig1")
    with pytest.raises(ModelError):
        S.PartialStrategy(M, (0,), {(0, int(M.blocks[0, 0])): M.action_index("flip")}, [0])


def test_prune_fig1_no_publish():
    M = fixtures.model("fig1")
    np_ = M.action_index("np")
    sigma = next(s for s in S.enumerate_uniform(M, ["2"])
                 if s.action_at(1, M.state_index("q3")) == np_)
    P = S.prune(M, sigma)
    for q in ("q3", "q4", "q5", "q6"):
        i = P.state_index(q)
        assert set(P.dst[P.out_edges(i)].tolist()) == {i}


@pytest.mark.parametrize("name", ["fig1", "g3", "g7"])
def test_prune_keeps_seriality(name):
    M = fixtures.model(name)
    for sigma in itertools.islice(S.enumerate_uniform(M, M.agents), 200):
        P = S.prune(M, sigma)
        assert all(P.indptr[q + 1] > P.indptr[q] for q in range(P.n_states))


def test_prune_single_action_model_is_identity():
    M = fixtures.model("g1")
    sigma = next(S.enumerate_uniform(M, []))
    assert S.prune(M, sigma).n_edges == M.n_edges


def test_subjective_start_set():
    M = fixtures.model("fig1")
    assert S.subjective_start_set(M, ["2"], "q3") == {"q3", "q4", "q5", "q6"}
    assert S.subjective_start_set(M, [], "q3") == {"q3"}
    assert S.subjective_start_set(M, ["1"], "q3") == {"q3"}


def test_restriction_round_trip():
    M = fixtures.model("g3")
    for sigma in itertools.islice(S.enumerate_uniform(M, ["1", "2"]), 50):
        Q = [0, 1]
        part = sigma.restrict(Q)
        for q in Q:
            assert part.coalition_action(q) == sigma.coalition_action(q)


def test_witness_json_form():
    M = fixtures.model("fig1")
    sigma = next(S.enumerate_uniform(M, ["2"]))
    doc = sigma.to_json()
    assert set(doc) == {"2"}
    assert all(s in M.states for s in doc["2"])
