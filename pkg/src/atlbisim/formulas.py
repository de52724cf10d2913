"""Formula syntax for the ATL + knowledge fragment.

State formulas::

    state := atom | true | false | ! state | state (& | '|' | ->) state
           | ( state ) | < agents > path | K agent state
           | E agents state | C agents state | AG state
    path  := X state | F state | G state | state U state | state R state

Precedence is ``!`` > ``&`` > ``|`` > ``->`` (right associative); prefix
operators bind a single unary operand, so ``<1> F p & q`` reads as
``(<1> F p) & q``.  ``E`` and ``C`` also accept ``E<1,2> p``, which is
the form the printer uses.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator


def _agent_key(a: str):
    return (0, int(a), a) if a.isdigit() else (1, 0, a)


def canonical_agents(agents) -> tuple:
    return tuple(sorted(set(str(a) for a in agents), key=_agent_key))


# ------------------------------------------------------------------ the AST

class Formula:
    """Base class of state and path formulas."""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class X(Formula):
    sub: Formula


@dataclass(frozen=True)
class F(Formula):
    sub: Formula


@dataclass(frozen=True)
class G(Formula):
    sub: Formula


@dataclass(frozen=True)
class U(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class R(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Coalition(Formula):
    agents: tuple
    path: Formula

    def __post_init__(self):
        object.__setattr__(self, "agents", canonical_agents(self.agents))
        if not isinstance(self.path, (X, F, G, U, R)):
            raise TypeError("a coalition modality needs a path formula")


@dataclass(frozen=True)
class K(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True)
class E(Formula):
    agents: tuple
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "agents", canonical_agents(self.agents))


@dataclass(frozen=True)
class C(Formula):
    agents: tuple
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "agents", canonical_agents(self.agents))


@dataclass(frozen=True)
class AG(Formula):
    sub: Formula


TRUE = Const(True)
FALSE = Const(False)
PATH_TYPES = (X, F, G, U, R)
KEYWORDS = {"X", "F", "G", "U", "R", "K", "E", "C", "AG", "true", "false"}


def conj(items) -> Formula:
    items = list(items)
    if not items:
        return TRUE
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(items) -> Formula:
    items = list(items)
    if not items:
        return FALSE
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def children(f: Formula) -> tuple:
    if isinstance(f, (Atom, Const)):
        return ()
    if isinstance(f, (Not, X, F, G, K, E, C, AG)):
        return (f.sub,)
    if isinstance(f, Coalition):
        return (f.path,)
    return (f.left, f.right)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order traversal (children before parents)."""
    for c in children(f):
        yield from subformulas(c)
    yield f


def size(f: Formula) -> int:
    """Node count, with a coalition and its temporal operator counted once."""
    if isinstance(f, Coalition):
        return 1 + sum(size(c) for c in children(f.path))
    return 1 + sum(size(c) for c in children(f))


def atoms_of(f: Formula) -> set:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


def coalitions(f: Formula) -> set:
    """Agent sets used by strategic and epistemic operators (AG counts as the empty coalition)."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, Coalition):
            out.add(frozenset(g.agents))
        elif isinstance(g, K):
            out.add(frozenset([g.agent]))
        elif isinstance(g, (E, C)):
            out.add(frozenset(g.agents))
        elif isinstance(g, AG):
            out.add(frozenset())
    return out


def is_a_formula(f: Formula, A) -> bool:
    """True iff every strategic modality is for exactly A and knowledge is only for members of A."""
    A = frozenset(str(a) for a in A)
    for g in subformulas(f):
        if isinstance(g, Coalition) and frozenset(g.agents) != A:
            return False
        if isinstance(g, K) and g.agent not in A:
            return False
        if isinstance(g, (E, C)) and not frozenset(g.agents) <= A:
            return False
        if isinstance(g, AG):
            return False
    return True


def is_positive(f: Formula) -> bool:
    """No strategic or knowledge modality occurs under an odd number of negations."""

    def walk(g, neg):
        if isinstance(g, (Coalition, K, E, C, AG)) and neg:
            return False
        if isinstance(g, Not):
            return walk(g.sub, not neg)
        if isinstance(g, Implies):
            return walk(g.left, not neg) and walk(g.right, neg)
        if isinstance(g, Coalition):
            return all(walk(c, neg) for c in children(g.path))
        return all(walk(c, neg) for c in children(g))

    return walk(f, False)


# ------------------------------------------------------------------ printing

_LEVEL = {Implies: 1, Or: 2, And: 3}


def _level(f):
    return _LEVEL.get(type(f), 4)


def _unary(f):
    s = to_text(f)
    return s if _level(f) == 4 else f"({s})"


def _agents_text(agents):
    return ",".join(agents)


def path_text(p: Formula) -> str:
    if isinstance(p, X):
        return f"X {_unary(p.sub)}"
    if isinstance(p, F):
        return f"F {_unary(p.sub)}"
    if isinstance(p, G):
        return f"G {_unary(p.sub)}"
    if isinstance(p, U):
        return f"{_unary(p.left)} U {_unary(p.right)}"
    if isinstance(p, R):
        return f"{_unary(p.left)} R {_unary(p.right)}"
    raise TypeError(f"not a path formula: {p!r}")


def to_text(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return f"!{_unary(f.sub)}"
    if isinstance(f, Coalition):
        return f"<{_agents_text(f.agents)}> {path_text(f.path)}"
    if isinstance(f, K):
        return f"K {f.agent} {_unary(f.sub)}"
    if isinstance(f, E):
        return f"E<{_agents_text(f.agents)}> {_unary(f.sub)}"
    if isinstance(f, C):
        return f"C<{_agents_text(f.agents)}> {_unary(f.sub)}"
    if isinstance(f, AG):
        return f"AG {_unary(f.sub)}"
    if isinstance(f, PATH_TYPES):
        return path_text(f)
    ops = {And: "&", Or: "|", Implies: "->"}
    lvl = _level(f)
    left, right = to_text(f.left), to_text(f.right)
    if isinstance(f, Implies):
        if _level(f.left) <= lvl:
            left = f"({left})"
        if _level(f.right) < lvl:
            right = f"({right})"
    else:
        if _level(f.left) < lvl:
            left = f"({left})"
        if _level(f.right) <= lvl:
            right = f"({right})"
    return f"{left} {ops[type(f)]} {right}"


# ------------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message, line, col, expected=()):
        self.line, self.col, self.expected = line, col, tuple(expected)
        extra = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"line {line}, column {col}: {message}{extra}")


_TOKEN = re.compile(r"\s*(?:(->)|([()<>,!&|])|([A-Za-z0-9_][A-Za-z0-9_']*))")


@dataclass
class _Tok:
    kind: str  # op | id | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks, pos = [], 0
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(p):
        ln = max(i for i, s in enumerate(line_starts) if s <= p)
        return ln + 1, p - line_starts[ln] + 1

    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:]
            if rest.strip() == "":
                break
            p = pos + (len(rest) - len(rest.lstrip()))
            ln, col = where(p)
            raise ParseError(f"unexpected character {text[p]!r}", ln, col)
        start = m.start(m.lastindex)
        ln, col = where(start)
        if m.group(3):
            toks.append(_Tok("id", m.group(3), ln, col))
        else:
            toks.append(_Tok("op", m.group(m.lastindex), ln, col))
        pos = m.end()
    ln, col = where(len(text))
    toks.append(_Tok("eof", "", ln, col))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, msg, expected=()):
        t = self.tok
        raise ParseError(msg, t.line, t.col, expected)

    def accept(self, text):
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.fail(f"unexpected {self.tok.text or 'end of input'!r}", [repr(text)])

    def ident(self, what):
        t = self.tok
        if t.kind != "id" or t.text in KEYWORDS:
            self.fail(f"unexpected {t.text or 'end of input'!r}", [what])
        self.i += 1
        return t.text

    def agents(self, closing=None):
        out = []
        if closing and self.tok.text == closing:
            return out
        out.append(self.ident("agent"))
        while self.accept(","):
            out.append(self.ident("agent"))
        return out

    def formula(self):
        f = self.implication()
        return f

    def implication(self):
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.accept("|"):
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self):
        t = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if t.kind == "id":
            if t.text == "K":
                self.i += 1
                return K(self.ident("agent"), self.unary())
            if t.text in ("E", "C"):
                self.i += 1
                if self.accept("<"):
                    ags = self.agents(">")
                    self.expect(">")
                else:
                    ags = self.agents()
                return (E if t.text == "E" else C)(tuple(ags), self.unary())
            if t.text == "AG":
                self.i += 1
                return AG(self.unary())
        if self.accept("<"):
            ags = self.agents(">")
            self.expect(">")
            return Coalition(tuple(ags), self.path())
        return self.primary()

    def path(self):
        t = self.tok
        if t.kind == "id" and t.text in ("X", "F", "G"):
            self.i += 1
            return {"X": X, "F": F, "G": G}[t.text](self.unary())
        if t.text == "(":
            # allow a parenthesised path such as <1>(p U q)
            save = self.i
            self.i += 1
            try:
                p = self.path()
                self.expect(")")
                return p
            except ParseError:
                self.i = save
        left = self.unary()
        t = self.tok
        if t.kind == "id" and t.text in ("U", "R"):
            self.i += 1
            return (U if t.text == "U" else R)(left, self.unary())
        self.fail(f"unexpected {t.text or 'end of input'!r} in path formula", ["'U'", "'R'"])

    def primary(self):
        t = self.tok
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if t.kind == "id":
            if t.text == "true":
                self.i += 1
                return TRUE
            if t.text == "false":
                self.i += 1
                return FALSE
            if t.text in KEYWORDS:
                self.fail(f"operator {t.text!r} cannot start a state formula here",
                          ["atom", "'('", "'!'", "'<'"])
            self.i += 1
            return Atom(t.text)
        self.fail(f"unexpected {t.text or 'end of input'!r}", ["atom", "'('", "'!'", "'<'", "'K'", "'AG'"])


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after a complete formula", ["end of input"])
    return f


def parse_formula_file(text: str) -> list:
    """One formula per line; blank lines and ``#`` comments are skipped."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        try:
            out.append(parse_formula(body))
        except ParseError as exc:
            raise ParseError(str(exc).split(": ", 1)[-1], lineno, exc.col, exc.expected) from None
    return out


# -------------------------------------------------------------- normal forms

def expand_path(p: Formula) -> Formula:
    """F and G as U and R."""
    if isinstance(p, F):
        return U(TRUE, p.sub)
    if isinstance(p, G):
        return R(FALSE, p.sub)
    return p


def dualize(f: Formula) -> Formula:
    """Negation normal form.

    Negations are pushed down to atoms and to strategic / knowledge
    modalities (which stay as ``Not(...)``); implications become
    disjunctions; F and G become U and R; AG becomes ``<> false R``.
    """
    return _nnf(f, False)


def _nnf(f, neg):
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Not):
        return _nnf(f.sub, not neg)
    if isinstance(f, And):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(f, Or):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(f, Implies):
        if neg:
            return And(_nnf(f.left, False), _nnf(f.right, True))
        return Or(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Coalition):
        p = expand_path(f.path)
        if isinstance(p, X):
            p = X(_nnf(p.sub, False))
        else:
            p = type(p)(_nnf(p.left, False), _nnf(p.right, False))
        g = Coalition(f.agents, p)
    elif isinstance(f, K):
        g = K(f.agent, _nnf(f.sub, False))
    elif isinstance(f, (E, C)):
        g = type(f)(f.agents, _nnf(f.sub, False))
    elif isinstance(f, AG):
        g = Coalition((), R(FALSE, _nnf(f.sub, False)))
    else:
        raise TypeError(f"not a state formula: {f!r}")
    return Not(g) if neg else g
