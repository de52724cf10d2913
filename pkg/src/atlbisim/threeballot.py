"""ThreeBallot voting models, their property formulas and cross-model relations.

Three variants share one transition system.  In ``tot`` every ballot
encoding compatible with a voter's choice may occur, in ``lex`` only the
lexicographically greatest ordering of each encoding is kept, and in
``count`` the bulletin board is replaced by one counter per candidate.

A state is the tuple ``(vopen, pub, board, voters)``.  ``board`` holds
3n ribbons (tot, lex) or c counters (count); ``voters[i]`` is
``(ch, voted, strips)``.  Strips and ribbons are integers whose bit
k-1 marks candidate k, with BOT for a copied strip or an empty ribbon.
Agent ``"env"`` is the collector and bulletin board; voters are named
``"1"`` .. ``"n"`` and voter n is the attacker.
"""
from __future__ import annotations

import itertools
import math
import os
from array import array
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import formulas as fm
from .bisim import BisimRelation
from .icgs import ICGS, ModelError

BOT = -1
VARIANTS = ("tot", "lex", "count")
CAP_ENV = "ATLBISIM_STATE_CAP"
DEFAULT_CAP = 20_000_000

ACTIONS = ("stop", "nop", "collect", "publish", "vote")
STOP, NOP, COLLECT, PUBLISH, VOTE = range(5)


class CapExceeded(ModelError):
    """The state space of a requested instance exceeds the configured cap."""


@dataclass(frozen=True)
class ThreeBallotConfig:
    n: int
    c: int
    variant: str = "count"

    def __post_init__(self):
        if self.n < 2:
            raise ModelError("ThreeBallot needs at least 2 voters (the last one is the attacker)")
        if self.c < 2:
            raise ModelError("ThreeBallot needs at least 2 candidates")
        if self.variant not in VARIANTS:
            raise ModelError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")

    @property
    def att(self) -> int:
        return self.n

    @property
    def name(self) -> str:
        return f"tb_{self.n}v{self.c}c_{self.variant}"

    def with_variant(self, variant: str) -> "ThreeBallotConfig":
        return ThreeBallotConfig(self.n, self.c, variant)


# ---------------------------------------------------------------- ballots

def compatible_ballots(ch: int, c: int) -> set:
    """All strip triples encoding a vote for candidate ch among c.

    The chosen candidate's row has two marks and every other row one,
    each placed on any of the three strips.
    """
    if c < 1 or not 1 <= ch <= c:
        raise ModelError(f"choice {ch} out of range 1..{c}")
    rows = []
    for k in range(1, c + 1):
        if k == ch:
            rows.append([(0, 1, 1), (1, 0, 1), (1, 1, 0)])
        else:
            rows.append([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    out = set()
    for combo in itertools.product(*rows):
        out.add(tuple(sum(combo[k][j] << k for k in range(c)) for j in range(3)))
    return out


def lex_ballots(ch: int, c: int) -> set:
    """The lexicographically greatest ordering of each compatible triple."""
    return {tuple(sorted(t, reverse=True)) for t in compatible_ballots(ch, c)}


def strip_bits(value: int, c: int) -> tuple:
    return tuple((value >> k) & 1 for k in range(c))


def _partial_patterns(ch: int, c: int) -> set:
    """Strip triples of R(ch) with any subset of positions replaced by BOT."""
    out = set()
    for t in compatible_ballots(ch, c):
        for mask in range(8):
            out.add(tuple(BOT if mask >> j & 1 else t[j] for j in range(3)))
    return out


# ---------------------------------------------------------------- states

def initial_states(config: ThreeBallotConfig) -> list:
    n, c = config.n, config.c
    per_voter = []
    for ch in range(1, c + 1):
        strips = lex_ballots(ch, c) if config.variant != "tot" else compatible_ballots(ch, c)
        for t in sorted(strips, reverse=True):
            per_voter.append((ch, False, t))
    board = (0,) * c if config.variant == "count" else (BOT,) * (3 * n)
    return [(True, False, board, combo) for combo in itertools.product(per_voter, repeat=n)]


def _publish_ok(voters) -> bool:
    return all(not v or all(s == BOT for s in strips) for _, v, strips in voters)


def successors(config: ThreeBallotConfig, state) -> list:
    """(joint action, successor) pairs; joint is (env, voter 1, ..., voter n)."""
    vopen, pub, board, voters = state
    n = config.n
    out = []
    if vopen:
        for env in (STOP, NOP):
            for acts in itertools.product((NOP, VOTE), repeat=n):
                nv = tuple((ch, v or a == VOTE, s) for (ch, v, s), a in zip(voters, acts))
                out.append(((env,) + acts, (env != STOP, pub, board, nv)))
        return out
    idle = (NOP,) * n
    moved = False
    for i, (ch, v, strips) in enumerate(voters):
        if not v:
            continue
        for j, val in enumerate(strips):
            if val == BOT:
                continue
            ns = strips[:j] + (BOT,) + strips[j + 1:]
            nv = voters[:i] + ((ch, v, ns),) + voters[i + 1:]
            if config.variant == "count":
                nb = tuple(co + b for co, b in zip(board, strip_bits(val, config.c)))
                out.append(((COLLECT,) + idle, (False, pub, nb, nv)))
                moved = True
            else:
                for k, r in enumerate(board):
                    if r == BOT:
                        out.append(((COLLECT,) + idle, (False, pub, board[:k] + (val,) + board[k + 1:], nv)))
                        moved = True
    if not moved:
        out.append(((COLLECT,) + idle, state))
    out.append(((PUBLISH,) + idle, (False, True, board, voters) if _publish_ok(voters) else state))
    return out


def estimate_states(config: ThreeBallotConfig) -> int:
    """An upper bound on the reachable states, computed without exploring."""
    n = config.n
    init = len(initial_states(config)) if config.n * config.c <= 12 else \
        (sum(len(lex_ballots(k, config.c)) if config.variant != "tot" else 3 ** config.c
             for k in range(1, config.c + 1))) ** n
    total = 0
    for voted in range(n + 1):
        strips = 3 * voted
        if config.variant == "count":
            fill = 2 ** strips
        else:
            fill = sum(math.comb(strips, m) * math.perm(3 * n, m) for m in range(strips + 1))
        total += math.comb(n, voted) * fill
    return 3 * init * total


def state_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(float(raw))
    except ValueError:
        raise ModelError(f"{CAP_ENV} must be a number, got {raw!r}") from None


def _fmt(x: int) -> str:
    return "-" if x == BOT else str(x)


def state_name(state, variant: str) -> str:
    vopen, pub, board, voters = state
    tag = "co" if variant == "count" else "bb"
    parts = [f"o{int(vopen)}p{int(pub)}", f"{tag}:" + ".".join(_fmt(x) for x in board)]
    for i, (ch, v, strips) in enumerate(voters, 1):
        parts.append(f"{i}:c{ch}v{int(v)}:" + ".".join(_fmt(s) for s in strips))
    return "|".join(parts)


class _Names(Sequence):
    """State names computed on demand from the state tuples."""

    def __init__(self, states: list, variant: str):
        self._states = states
        self._variant = variant

    def __len__(self):
        return len(self._states)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [state_name(s, self._variant) for s in self._states[k]]
        return state_name(self._states[k], self._variant)


class ThreeBallotModel(ICGS):
    """An ICGS that also keeps the decoded state tuples."""

    config: ThreeBallotConfig
    tb_states: list
    tb_index: dict

    def state_of(self, k: int):
        return self.tb_states[k]


def build(config: ThreeBallotConfig, cap: int | None = None) -> ThreeBallotModel:
    """Explore the reachable part of the model from all initial states."""
    cap = state_cap() if cap is None else cap
    est = estimate_states(config)
    if est > cap:
        raise CapExceeded(f"{config.name}: estimated up to {est:,} states, above the cap of "
                          f"{cap:,} (set {CAP_ENV} to raise it)")
    n, c = config.n, config.c
    inits = initial_states(config)
    index = {s: k for k, s in enumerate(inits)}
    states = list(inits)
    joint_ids = {}
    src, jact, dst = array("q"), array("q"), array("q")
    todo = deque(range(len(inits)))
    while todo:
        k = todo.popleft()
        for joint, nxt in successors(config, states[k]):
            t = index.get(nxt)
            if t is None:
                t = index[nxt] = len(states)
                states.append(nxt)
                todo.append(t)
                if len(states) > cap:
                    raise CapExceeded(f"{config.name}: more than {cap:,} reachable states "
                                      f"(set {CAP_ENV} to raise it)")
            src.append(k)
            jact.append(joint_ids.setdefault(joint, len(joint_ids)))
            dst.append(t)
    N = len(states)
    agents = ["env"] + [str(i) for i in range(1, n + 1)]
    atoms = ["pub"] + [f"voted_{i}" for i in range(1, n + 1)] + \
        [f"ch_{i}_eq_{j}" for i in range(1, n + 1) for j in range(1, c + 1)]
    labels = np.zeros((N, len(atoms)), dtype=bool)
    proto_sets = [(STOP, NOP), (COLLECT, PUBLISH), (NOP, VOTE), (NOP,)]
    protocol = np.zeros((n + 1, N), dtype=np.int32)
    blocks = np.zeros((n + 1, N), dtype=np.int64)
    blocks[0] = np.arange(N)
    obs = [dict() for _ in range(n)]
    for k, (vopen, pub, board, voters) in enumerate(states):
        labels[k, 0] = pub
        protocol[0, k] = 0 if vopen else 1
        protocol[1:, k] = 2 if vopen else 3
        for i, (ch, v, strips) in enumerate(voters):
            labels[k, 1 + i] = v
            labels[k, 1 + n + i * c + ch - 1] = True
            key = (vopen, pub, board, ch, v, strips)
            blocks[1 + i, k] = obs[i].setdefault(key, len(obs[i]))
    joint = np.zeros((len(joint_ids), n + 1), dtype=np.int32)
    for ja, j in joint_ids.items():
        joint[j] = ja
    src, jact, dst = (np.frombuffer(a, dtype=np.int64) for a in (src, jact, dst))
    order = np.lexsort((dst, jact, src))
    model = ThreeBallotModel(agents, atoms, ACTIONS, _Names(states, config.variant), labels, 0,
                             proto_sets, protocol, joint, src[order], jact[order], dst[order],
                             blocks, initial_states=range(len(inits)))
    model.config = config
    model.tb_states = states
    model.tb_index = index
    return model


# ---------------------------------------------------------------- formulas

def _check_voter(config: ThreeBallotConfig, i: int) -> None:
    if not 1 <= i <= config.n:
        raise ModelError(f"voter {i} out of range 1..{config.n}")
    if i == config.att:
        raise ModelError(f"voter {i} is the attacker")


def coercion_formula(config: ThreeBallotConfig, i: int) -> fm.Formula:
    """<att> F ((pub & voted_i) -> OR_j K_att ch_i_eq_j)."""
    _check_voter(config, i)
    att = str(config.att)
    knows = fm.disj([fm.K(att, fm.Atom(f"ch_{i}_eq_{j}")) for j in range(1, config.c + 1)])
    goal = fm.Implies(fm.And(fm.Atom("pub"), fm.Atom(f"voted_{i}")), knows)
    return fm.Coalition((att,), fm.F(goal))


def anonymity_formula(config: ThreeBallotConfig, i: int) -> fm.Formula:
    """AG AND_j !K_att ch_i_eq_j."""
    _check_voter(config, i)
    att = str(config.att)
    return fm.AG(fm.conj([fm.Not(fm.K(att, fm.Atom(f"ch_{i}_eq_{j}")))
                          for j in range(1, config.c + 1)]))


# ---------------------------------------------------------------- relations

def _same_instance(M: ThreeBallotModel, M2: ThreeBallotModel, v1: str, v2: str) -> None:
    for m, v in ((M, v1), (M2, v2)):
        if getattr(m, "config", None) is None or m.config.variant != v:
            raise ModelError(f"expected a ThreeBallot model of variant {v!r}")
    if (M.config.n, M.config.c) != (M2.config.n, M2.config.c):
        raise ModelError(f"instances differ: {M.config.name} vs {M2.config.name}")


def _join(keys1: list, keys2: list) -> np.ndarray:
    where = {}
    for k, key in enumerate(keys2):
        if key is not None:
            where.setdefault(key, []).append(k)
    pairs = [(a, b) for a, key in enumerate(keys1) if key is not None for b in where.get(key, ())]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def relation_tot_lex(M: ThreeBallotModel, M2: ThreeBallotModel) -> BisimRelation:
    """Pairs with equal public data, choices, flags and attacker strips, and the
    other voters' strips equal up to a permutation (copied strips included)."""
    _same_instance(M, M2, "tot", "lex")
    n, c = M.config.n, M.config.c
    ok = {ch: _partial_patterns(ch, c) for ch in range(1, c + 1)}

    def key(state):
        vopen, pub, board, voters = state
        if any(strips not in ok[ch] for ch, _, strips in voters):
            return None
        others = tuple(tuple(sorted(s)) for _, _, s in voters[:n - 1])
        head = tuple((ch, v) for ch, v, _ in voters)
        return (vopen, pub, board, head, voters[n - 1][2], others)

    pairs = _join([key(s) for s in M.tb_states], [key(s) for s in M2.tb_states])
    return BisimRelation(M, M2, (str(n),), pairs)


def relation_lex_count(M: ThreeBallotModel, M2: ThreeBallotModel) -> BisimRelation:
    """Pairs with identical voters and public flags whose counters equal the
    per-candidate mark totals of the ribbons on the board."""
    _same_instance(M, M2, "lex", "count")
    c = M.config.c

    def tally(board):
        co = [0] * c
        for r in board:
            if r != BOT:
                for k, b in enumerate(strip_bits(r, c)):
                    co[k] += b
        return tuple(co)

    k1 = [(vopen, pub, tally(board), voters) for vopen, pub, board, voters in M.tb_states]
    k2 = [(vopen, pub, board, voters) for vopen, pub, board, voters in M2.tb_states]
    return BisimRelation(M, M2, (str(M.config.n),), _join(k1, k2))
