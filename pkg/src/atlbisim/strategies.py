"""Uniform and partial memoryless strategies.

A strategy for coalition A is a map from (agent, block) to an action,
where blocks are the agent's indistinguishability classes, so
uniformity holds by construction.  A partial strategy additionally has
a domain Q; it assigns actions only to blocks meeting Q.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator

import numpy as np

from .icgs import ICGS, ModelError


class PartialStrategy:
    """Block-wise action choice for the members of a coalition.

    ``choice`` maps (agent index, block id) to an action index.  ``domain``
    is a frozenset of state indices, or None for a total strategy.
    """

    def __init__(self, model: ICGS, coalition: tuple, choice: dict, domain=None):
        self.model = model
        self.coalition = tuple(coalition)
        self.choice = dict(choice)
        self.domain = None if domain is None else frozenset(int(q) for q in domain)
        for (i, b), a in self.choice.items():
            rep = model.block_members(i, b)[0]
            if a not in model.protocol_idx(i, rep):
                raise ModelError(f"action {model.actions[a]!r} is not available to agent "
                                 f"{model.agents[i]!r} at {model.states[rep]!r}")

    @property
    def key(self) -> tuple:
        return tuple(sorted(self.choice.items()))

    def __eq__(self, other):
        return isinstance(other, PartialStrategy) and self.coalition == other.coalition \
            and self.domain == other.domain and self.key == other.key

    def __hash__(self):
        return hash((self.coalition, self.domain, self.key))

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()})"

    def in_domain(self, q: int) -> bool:
        return self.domain is None or q in self.domain

    def action_at(self, agent: int, q: int) -> int:
        b = self.model.blocks[agent, q]
        try:
            return self.choice[(agent, b)]
        except KeyError:
            raise ModelError(f"strategy has no action for agent {self.model.agents[agent]!r} "
                             f"at {self.model.states[q]!r}") from None

    def coalition_action(self, q: int) -> tuple:
        if not self.in_domain(q):
            raise ModelError(f"state {self.model.states[q]!r} is outside the strategy's domain")
        return tuple(self.action_at(i, q) for i in self.coalition)

    def restrict(self, Q: Iterable[int]) -> "PartialStrategy":
        Q = frozenset(int(q) for q in Q)
        keep = {}
        for i in self.coalition:
            for b in {int(self.model.blocks[i, q]) for q in Q}:
                keep[(i, b)] = self.choice[(i, b)]
        return PartialStrategy(self.model, self.coalition, keep, Q)

    def to_json(self) -> dict:
        """agent -> block representative (first member) -> action."""
        m = self.model
        out = {}
        for (i, b), a in sorted(self.choice.items()):
            mem = m.block_members(i, b)
            if self.domain is not None:
                mem = [q for q in mem if q in self.domain]
            out.setdefault(m.agents[i], {})[m.states[int(mem[0])]] = m.actions[a]
        return out


class UniformStrategy(PartialStrategy):
    """A total uniform strategy (domain = all states)."""

    def __init__(self, model, coalition, choice):
        super().__init__(model, coalition, choice, None)


def _slots(model: ICGS, A: tuple, Q=None) -> list:
    slots = []
    for i in A:
        if Q is None:
            blocks = range(model.n_blocks(i))
        else:
            blocks = sorted({int(model.blocks[i, q]) for q in Q})
        for b in blocks:
            rep = int(model.block_members(i, b)[0])
            slots.append(((i, b), model.protocol_idx(i, rep)))
    return slots


def count_strategies(model: ICGS, A: tuple, Q=None) -> int:
    total = 1
    for _, acts in _slots(model, A, Q):
        total *= len(acts)
    return total


def iter_choices(model: ICGS, A: tuple, Q=None) -> Iterator[dict]:
    slots = _slots(model, A, Q)
    keys = [k for k, _ in slots]
    for combo in itertools.product(*[acts for _, acts in slots]):
        yield dict(zip(keys, combo))


def enumerate_uniform(model: ICGS, A: Iterable) -> Iterator[UniformStrategy]:
    """All uniform strategies of A, lexicographic in (agent, block, action) order."""
    A = model.coalition(A)
    for ch in iter_choices(model, A):
        yield UniformStrategy(model, A, ch)


def partial_strategies(model: ICGS, A: Iterable, Q: Iterable) -> Iterator[PartialStrategy]:
    """PStr_A(Q): uniform assignments on the blocks that meet Q."""
    A = model.coalition(A)
    Q = frozenset(model.state_index(q) for q in Q)
    for ch in iter_choices(model, A, Q):
        yield PartialStrategy(model, A, ch, Q)


def compatible_edges(model: ICGS, sigma: PartialStrategy) -> np.ndarray:
    """Mask over edges whose joint action agrees with sigma (edges outside its domain are kept)."""
    keep = np.ones(model.n_edges, dtype=bool)
    if sigma.domain is None:
        inside = np.ones(model.n_edges, dtype=bool)
    else:
        dom = np.zeros(model.n_states, dtype=bool)
        dom[list(sigma.domain)] = True
        inside = dom[model.src]
    for i in sigma.coalition:
        table = np.full(model.n_blocks(i), -1, dtype=np.int64)
        for (j, b), a in sigma.choice.items():
            if j == i:
                table[b] = a
        want = table[model.blocks[i, model.src]]
        keep &= ~inside | (model.joint[model.jact, i] == want)
    return keep


def succ_idx(model: ICGS, q: int, sigma: PartialStrategy) -> list:
    alpha = sigma.coalition_action(q)
    sl = model.out_edges(q)
    rows = model.joint[model.jact[sl]][:, list(sigma.coalition)] if sigma.coalition else None
    dst = model.dst[sl]
    if rows is not None:
        dst = dst[np.all(rows == np.asarray(alpha), axis=1)]
    return sorted(set(dst.tolist()))


def succ_under(model: ICGS, q, sigma: PartialStrategy) -> frozenset:
    """States reachable from q in one step when A plays sigma and the others play anything."""
    return frozenset(model.names(succ_idx(model, model.state_index(q), sigma)))


def succ_of_set(model: ICGS, sigma: PartialStrategy) -> frozenset:
    """succ(dom(sigma), sigma)."""
    out = set()
    for q in sorted(sigma.domain):
        out.update(succ_idx(model, q, sigma))
    return frozenset(model.names(sorted(out)))


def prune(model: ICGS, sigma: PartialStrategy) -> ICGS:
    """The model restricted to transitions compatible with sigma."""
    return model.restrict_edges(compatible_edges(model, sigma))


def subjective_start_set(model: ICGS, A: Iterable, s) -> frozenset:
    return model.ekn(A, s)
