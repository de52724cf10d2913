import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlbisim import formulas as fm
from atlbisim.formulas import (AG, And, Atom, C, Coalition, E, F, G, Implies, K, Not, Or,
                               ParseError, R, U, X, parse_formula, to_text)


def test_parse_coalition_eventually():
    assert parse_formula("<1,2> F win1") == Coalition(("1", "2"), F(Atom("win1")))


def test_parse_ag_knowledge():
    f = parse_formula("AG (!(K att ch_1_eq_1))")
    assert f == AG(Not(K("att", Atom("ch_1_eq_1"))))


def test_parse_atom():
    assert parse_formula("p") == Atom("p")


def test_precedence():
    # ! > & > | > ->, implication right associative
    f = parse_formula("!a & b | c -> d -> e")
    assert f == Implies(Or(And(Not(Atom("a")), Atom("b")), Atom("c")),
                        Implies(Atom("d"), Atom("e")))


def test_prefix_binds_one_operand():
    assert parse_formula("<1> F p & q") == And(Coalition(("1",), F(Atom("p"))), Atom("q"))
    assert parse_formula("<1> X p") == Coalition(("1",), X(Atom("p")))


def test_binary_path_operators():
    assert parse_formula("<1> p U q") == Coalition(("1",), U(Atom("p"), Atom("q")))
    assert parse_formula("<> false R q") == Coalition((), R(fm.FALSE, Atom("q")))


def test_group_knowledge():
    assert parse_formula("E 1,2 p") == E(("1", "2"), Atom("p"))
    assert parse_formula("C<1,2> p") == C(("1", "2"), Atom("p"))


def test_coalition_agents_canonical():
    assert parse_formula("<2,1,1> G p") == Coalition(("1", "2"), G(Atom("p")))


@pytest.mark.parametrize("text", ["p &", "<1 F p", "(p", "p q", "K", "<1> p", "p -> ", "&"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_error_position():
    with pytest.raises(ParseError) as exc:
        parse_formula("p & & q")
    assert exc.value.line == 1
    assert exc.value.col == 5


def test_formula_file():
    text = "# comment\n<1> F p\n\n  q & r  # trailing\n"
    assert fm.parse_formula_file(text) == [Coalition(("1",), F(Atom("p"))),
                                           And(Atom("q"), Atom("r"))]


def test_formula_file_error_line():
    with pytest.raises(ParseError) as exc:
        fm.parse_formula_file("p\nq &\n")
    assert exc.value.line == 2


def test_size_counts_coalition_once():
    assert fm.size(parse_formula("<1> F p")) == 2
    assert fm.size(parse_formula("<1> (p U q)")) == 3
    assert fm.size(parse_formula("!(p & q)")) == 4


def test_a_formula_detection():
    assert fm.is_a_formula(parse_formula("<1> F K 1 p"), ["1"])
    assert not fm.is_a_formula(parse_formula("<1> F K 2 p"), ["1"])
    assert not fm.is_a_formula(parse_formula("<1,2> X p"), ["1"])
    assert fm.coalitions(parse_formula("<1> F K 2 p")) == {frozenset({"1"}), frozenset({"2"})}


def test_positive():
    assert fm.is_positive(parse_formula("<1> F p & !q"))
    assert not fm.is_positive(parse_formula("!<1> F p"))
    assert not fm.is_positive(parse_formula("<1> F p -> q"))
    assert fm.is_positive(parse_formula("!!<1> F p"))


def test_dualize_examples():
    assert fm.dualize(parse_formula("!(p & q)")) == Or(Not(Atom("p")), Not(Atom("q")))
    assert fm.dualize(parse_formula("<1> F p")) == Coalition(("1",), U(fm.TRUE, Atom("p")))
    # negated coalition modalities stay negated
    assert fm.dualize(parse_formula("!<1> X p")) == Not(Coalition(("1",), X(Atom("p"))))


# ------------------------------------------------------------ round trips

ATOMS = st.sampled_from(["p", "q", "win1", "ch_1_eq_2"])
AGENTS = st.lists(st.sampled_from(["1", "2", "att"]), min_size=0, max_size=2).map(fm.canonical_agents)


def _extend(children):
    return st.one_of(
        children.map(Not),
        st.tuples(children, children).map(lambda t: And(*t)),
        st.tuples(children, children).map(lambda t: Or(*t)),
        st.tuples(children, children).map(lambda t: Implies(*t)),
        st.tuples(AGENTS, children).map(lambda t: Coalition(t[0], X(t[1]))),
        st.tuples(AGENTS, children).map(lambda t: Coalition(t[0], F(t[1]))),
        st.tuples(AGENTS, children).map(lambda t: Coalition(t[0], G(t[1]))),
        st.tuples(AGENTS, children, children).map(lambda t: Coalition(t[0], U(t[1], t[2]))),
        st.tuples(AGENTS, children, children).map(lambda t: Coalition(t[0], R(t[1], t[2]))),
        st.tuples(st.sampled_from(["1", "att"]), children).map(lambda t: K(*t)),
        st.tuples(AGENTS.filter(bool), children).map(lambda t: E(*t)),
        st.tuples(AGENTS.filter(bool), children).map(lambda t: C(*t)),
        children.map(AG),
    )


FORMULAS = st.recursive(st.one_of(ATOMS.map(Atom), st.sampled_from([fm.TRUE, fm.FALSE])),
                        _extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(FORMULAS)
def test_print_parse_round_trip(f):
    assert parse_formula(to_text(f)) == f


@settings(max_examples=200, deadline=None)
@given(FORMULAS)
def test_dualize_idempotent(f):
    g = fm.dualize(f)
    assert fm.dualize(g) == g
