"""Explicit-state model checking of ATL + knowledge under imperfect information.

Labelling is bottom-up over subformulas, one boolean mask per subformula.

For a strategic formula <A> psi under the uniform (subjective or
objective) semantics we first compute W0, the set of states from which
*all* paths satisfy psi.  Wherever no member of A has a real choice and
none can be reached, every strategy yields exactly the paths of the full
graph, so W0 is already the answer there.  The remaining start sets are
decided by a backtracking search that fixes block actions lazily while
exploring the states the outcome can visit; trivial states reached by
the exploration are closed off using W0.

Perfect-information semantics uses the classical controllable
predecessor fixpoints (memoryless strategies suffice there).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import formulas as fm
from .icgs import ICGS, ModelError
from .strategies import UniformStrategy


class Semantics(enum.Enum):
    SUBJECTIVE = "subjective"
    OBJECTIVE = "objective"
    PERFECT = "perfect"

    @classmethod
    def parse(cls, value) -> "Semantics":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "").replace("_", "")
        aliases = {"subjective": cls.SUBJECTIVE, "subj": cls.SUBJECTIVE, "objective": cls.OBJECTIVE,
                   "obj": cls.OBJECTIVE, "perfect": cls.PERFECT, "perfectinfo": cls.PERFECT}
        if v in aliases:
            return aliases[v]
        raise ValueError(f"unknown semantics {value!r}")


Subjective = Semantics.SUBJECTIVE
Objective = Semantics.OBJECTIVE
PerfectInfo = Semantics.PERFECT


@dataclass
class TruthSet:
    formula: fm.Formula
    semantics: Semantics
    mask: np.ndarray
    model: ICGS

    @property
    def states(self) -> frozenset:
        return frozenset(self.model.names(np.flatnonzero(self.mask)))

    def __contains__(self, state) -> bool:
        return bool(self.mask[self.model.state_index(state)])

    def __len__(self):
        return int(self.mask.sum())


def _as_formula(f) -> fm.Formula:
    return fm.parse_formula(f) if isinstance(f, str) else f


# ------------------------------------------------------- graph primitives

def ax(model: ICGS, target: np.ndarray) -> np.ndarray:
    """States all of whose successors are in target."""
    bad = np.zeros(model.n_states, dtype=bool)
    bad[model.src[~target[model.dst]]] = True
    return ~bad


def au(model: ICGS, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """States from which every path satisfies left U right."""
    n = model.n_states
    pred = model.predecessor_matrix()
    remaining = np.diff(model.indptr)
    z = right.copy()
    frontier = np.flatnonzero(z | (left & (remaining == 0)))
    z[frontier] = True
    while len(frontier):
        rows = pred[frontier]
        done = np.bincount(rows.indices, weights=rows.data, minlength=n).astype(np.int64)
        remaining = remaining - done
        cand = np.flatnonzero(done)
        new = cand[(remaining[cand] == 0) & left[cand] & ~z[cand]]
        z[new] = True
        frontier = new
    return z


def eu_backward(model: ICGS, seed: np.ndarray, through: np.ndarray) -> np.ndarray:
    """Least set containing seed and every `through` state with some successor in it."""
    pred = model.predecessor_matrix()
    z = seed.copy()
    frontier = np.flatnonzero(z)
    while len(frontier):
        hit = np.zeros(model.n_states, dtype=bool)
        hit[pred[frontier].indices] = True
        new = np.flatnonzero(hit & through & ~z)
        z[new] = True
        frontier = new
    return z


def ar(model: ICGS, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """States from which every path satisfies left R right."""
    return ~eu_backward(model, ~right, ~left)


def cpre(model: ICGS, A: tuple, target: np.ndarray) -> np.ndarray:
    """States where A has a joint action all of whose outcomes are in target."""
    table, cid = model.coalition_actions(A)
    nc = max(len(table), 1)
    key = model.src.astype(np.int64) * nc + cid
    present = np.unique(key)
    bad = np.unique(key[~target[model.dst]])
    good = present[~np.isin(present, bad, assume_unique=True)]
    out = np.zeros(model.n_states, dtype=bool)
    out[good // nc] = True
    return out


def block_all(ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """For each state: does mask hold on its whole class (classes given by ids)?"""
    bad = np.zeros(int(ids.max()) + 1 if len(ids) else 0, dtype=bool)
    bad[ids[~mask]] = True
    return ~bad[ids]


def _universal(model: ICGS, kind: str, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """All-paths fixpoint for X/U/R, reusing the last few results on this model.

    Checkers for different semantics on one model often ask for the same
    fixpoint back to back, so a short recency list saves most repeats.
    """
    recent = model._cache.setdefault("universal", [])
    for k, l, r, w in recent:
        if k == kind and np.array_equal(l, left) and np.array_equal(r, right):
            return w
    if kind == "X":
        w = ax(model, right)
    elif kind == "U":
        w = au(model, left, right)
    else:
        w = ar(model, left, right)
    recent.insert(0, (kind, left, right, w))
    del recent[4:]
    return w


# ----------------------------------------------------------------- checker

class Checker:
    """Labels formulas on one model under one semantics, caching subformulas."""

    def __init__(self, model: ICGS, semantics=Semantics.SUBJECTIVE, packed: bool = False,
                 keep_witnesses: bool = True):
        self.model = model
        self.semantics = Semantics.parse(semantics)
        self.packed = packed  # store labels as bitsets (for many formulas on big models)
        self.keep_witnesses = keep_witnesses
        self.cache = {}
        self.witnesses = {}  # formula -> {state index: block assignment}
        self._nt = {}

    # -- public
    def label(self, f) -> np.ndarray:
        f = _as_formula(f)
        if f not in self.cache:
            out = self._label(f)
            self.cache[f] = np.packbits(out) if self.packed else out
            return out
        if self.packed:
            return np.unpackbits(self.cache[f], count=self.model.n_states).view(bool)
        return self.cache[f]

    def forget(self, f):
        """Drop the cached label and witnesses of f."""
        self.cache.pop(f, None)
        self.witnesses.pop(f, None)

    def truth_set(self, f) -> TruthSet:
        f = _as_formula(f)
        return TruthSet(f, self.semantics, self.label(f), self.model)

    def check(self, s, f) -> bool:
        return bool(self.label(f)[self.model.state_index(s)])

    def witness(self, f, s):
        """A uniform strategy witnessing <A>psi at s, or None if it fails there."""
        f = _as_formula(f)
        if not isinstance(f, fm.Coalition) or self.semantics is Semantics.PERFECT:
            return None
        m = self.model
        q = m.state_index(s)
        if not self.label(f)[q]:
            return None
        A = m.coalition(f.agents)
        choice = {}
        for i in A:
            for b in range(m.n_blocks(i)):
                choice[(i, b)] = m.protocol_idx(i, int(m.block_members(i, b)[0]))[0]
        choice.update(self.witnesses.get(f, {}).get(q, {}))
        return UniformStrategy(m, A, choice)

    # -- internals
    def _label(self, f) -> np.ndarray:
        m = self.model
        n = m.n_states
        if isinstance(f, fm.Atom):
            return m.labels[:, m.atom_index(f.name)].copy()
        if isinstance(f, fm.Const):
            return np.full(n, f.value, dtype=bool)
        if isinstance(f, fm.Not):
            return ~self.label(f.sub)
        if isinstance(f, fm.And):
            return self.label(f.left) & self.label(f.right)
        if isinstance(f, fm.Or):
            return self.label(f.left) | self.label(f.right)
        if isinstance(f, fm.Implies):
            return ~self.label(f.left) | self.label(f.right)
        if isinstance(f, fm.K):
            i = m.agent_index(f.agent)
            return block_all(m.blocks[i], self.label(f.sub))
        if isinstance(f, fm.E):
            sub = self.label(f.sub)
            out = sub.copy()
            for i in m.coalition(f.agents):
                out &= block_all(m.blocks[i], sub)
            return out
        if isinstance(f, fm.C):
            return block_all(m.ckn_ids(m.coalition(f.agents)), self.label(f.sub))
        if isinstance(f, fm.AG):
            return self.label(fm.Coalition((), fm.G(f.sub)))
        if isinstance(f, fm.Coalition):
            return self._coalition(f)
        raise TypeError(f"cannot label {f!r}")

    def _path_parts(self, path):
        n = self.model.n_states
        p = fm.expand_path(path)
        if isinstance(p, fm.X):
            return "X", np.ones(n, dtype=bool), self.label(p.sub)
        return ("U" if isinstance(p, fm.U) else "R"), self.label(p.left), self.label(p.right)

    def _coalition(self, f: fm.Coalition) -> np.ndarray:
        m = self.model
        A = m.coalition(f.agents)
        kind, left, right = self._path_parts(f.path)
        if self.semantics is Semantics.PERFECT:
            return self._perfect(A, kind, left, right)
        w0 = _universal(m, kind, left, right)
        if not A:
            return w0
        nt = self._nontrivial(A)
        trivial = ~nt
        out = np.zeros(m.n_states, dtype=bool)
        if self.semantics is Semantics.OBJECTIVE:
            out[trivial] = w0[trivial]
            groups = [((q,), [q]) for q in np.flatnonzero(nt).tolist()]
        else:
            # start set = union of the members' blocks
            all_w0 = np.ones(m.n_states, dtype=bool)
            all_triv = np.ones(m.n_states, dtype=bool)
            for i in A:
                all_w0 &= block_all(m.blocks[i], w0)
                all_triv &= block_all(m.blocks[i], trivial)
            out[all_triv] = all_w0[all_triv]
            todo = np.flatnonzero(~all_triv)
            # states with the same block for every member share a start set
            keys = m.blocks[list(A)][:, todo].T
            _, inv = np.unique(keys, axis=0, return_inverse=True)
            members = {}
            for q, k in zip(todo.tolist(), inv.ravel().tolist()):
                members.setdefault(k, []).append(q)
            groups = [(tuple(int(x) for x in m.ekn_idx(A, qs[0])), qs) for qs in members.values()]
        ctx = _SearchContext(m, A, kind, left, right, w0, trivial)
        memo = {}
        found = {}
        for Q, qs in groups:
            if Q not in memo:
                memo[Q] = ctx.search(Q)
            res = memo[Q]
            if res is not None:
                out[qs] = True
                for q in qs:
                    found[q] = res
        if self.keep_witnesses and found:
            self.witnesses[f] = found
        return out

    def _nontrivial(self, A: tuple) -> np.ndarray:
        if A not in self._nt:
            m = self.model
            self._nt[A] = eu_backward(m, m.choice_mask(A), np.ones(m.n_states, dtype=bool))
        return self._nt[A]

    def _perfect(self, A, kind, left, right) -> np.ndarray:
        m = self.model
        if kind == "X":
            return cpre(m, A, right)
        if kind == "U":
            z = right.copy()
            while True:
                nz = right | (left & cpre(m, A, z))
                if np.array_equal(nz, z):
                    return z
                z = nz
        z = right.copy()
        while True:
            nz = right & (left | cpre(m, A, z))
            if np.array_equal(nz, z):
                return z
            z = nz


_FAIL = object()
_DONE = object()


class _Key(tuple):
    """A pending (agent, block) decision."""


class _SearchContext:
    """Backtracking search for a uniform strategy that forces a path condition from a start set."""

    def __init__(self, model, A, kind, left, right, w0, trivial):
        self.m = model
        self.A = A
        self.kind = kind
        self.left = left
        self.right = right
        self.w0 = w0
        self.trivial = trivial
        self.table, self.cid = model.coalition_actions(A)
        self.cindex = {t: k for k, t in enumerate(self.table)}
        self.succ_cache = {}

    def succ(self, q: int, alpha: tuple) -> tuple:
        key = (q, alpha)
        if key not in self.succ_cache:
            sl = self.m.out_edges(q)
            k = self.cindex.get(alpha, -1)
            d = self.m.dst[sl][self.cid[sl] == k]
            self.succ_cache[key] = tuple(sorted(set(d.tolist())))
        return self.succ_cache[key]

    def alpha(self, q: int, assign: dict):
        acts = []
        m = self.m
        for i in self.A:
            opts = m.proto_sets[m.protocol[i, q]]
            if len(opts) == 1:
                acts.append(opts[0])
                continue
            key = (i, int(m.blocks[i, q]))
            if key not in assign:
                return _Key(key)
            acts.append(assign[key])
        return tuple(acts)

    def search(self, Q: tuple):
        assign = {}
        return self._extend(Q, assign)

    def _extend(self, Q, assign):
        status = self._explore(Q, assign)
        if status is _FAIL:
            return None
        if status is _DONE:
            return dict(assign)
        key = status
        rep = int(self.m.block_members(key[0], key[1])[0])
        for a in self.m.protocol_idx(key[0], rep):
            assign[key] = a
            res = self._extend(Q, assign)
            if res is not None:
                return res
            del assign[key]
        return None

    def _explore(self, Q, assign):
        left, right, w0, trivial = self.left, self.right, self.w0, self.trivial
        if self.kind == "X":
            for q in Q:
                if trivial[q]:
                    if not w0[q]:
                        return _FAIL
                    continue
                al = self.alpha(q, assign)
                if isinstance(al, _Key):
                    return al
                for d in self.succ(q, al):
                    if not right[d]:
                        return _FAIL
            return _DONE
        until = self.kind == "U"
        seen = set()
        inner = []
        stack = list(reversed(Q))
        while stack:
            q = stack.pop()
            if q in seen:
                continue
            seen.add(q)
            if until:
                if right[q]:
                    continue
                if not left[q]:
                    return _FAIL
            else:
                if not right[q]:
                    return _FAIL
                if left[q]:
                    continue
            if trivial[q]:
                if not w0[q]:
                    return _FAIL
                continue
            al = self.alpha(q, assign)
            if isinstance(al, _Key):
                return al
            inner.append(q)
            for d in reversed(self.succ(q, al)):
                if d not in seen:
                    stack.append(d)
        if until and self._has_cycle(inner, assign):
            return _FAIL
        return _DONE

    def _has_cycle(self, inner, assign) -> bool:
        inside = set(inner)
        succs = {}
        indeg = {q: 0 for q in inner}
        for q in inner:
            nxt = [d for d in self.succ(q, self.alpha(q, assign)) if d in inside]
            succs[q] = nxt
            for d in nxt:
                indeg[d] += 1
        ready = [q for q in inner if indeg[q] == 0]
        removed = 0
        while ready:
            q = ready.pop()
            removed += 1
            for d in succs[q]:
                indeg[d] -= 1
                if indeg[d] == 0:
                    ready.append(d)
        return removed < len(inner)


# ------------------------------------------------------------ module API

def label(model: ICGS, f, semantics=Semantics.SUBJECTIVE) -> TruthSet:
    return Checker(model, semantics).truth_set(f)


def check(model: ICGS, s, f, semantics=Semantics.SUBJECTIVE) -> bool:
    if s is None:
        s = model.states[model.initial]
    return Checker(model, semantics).check(s, f)


def holds_initially(model: ICGS, f, semantics=Semantics.SUBJECTIVE) -> bool:
    """True iff f holds in every initial state."""
    lab = Checker(model, semantics).label(f)
    return bool(lab[model.initial_states].all())


@dataclass
class SoundnessReport:
    formula: fm.Formula
    subjective: frozenset
    objective: frozenset
    perfect: frozenset
    subj_not_obj: frozenset
    obj_not_perf: frozenset

    @property
    def ok(self) -> bool:
        return not self.subj_not_obj and not self.obj_not_perf


def check_reduction_soundness(model: ICGS, f) -> SoundnessReport:
    """Assert Subjective ⊆ Objective ⊆ PerfectInfo truth sets for a positive formula."""
    f = _as_formula(f)
    if not fm.is_positive(f):
        raise ModelError(f"formula {fm.to_text(f)} has a strategic or knowledge modality under negation")
    sets = [Checker(model, s).truth_set(f).states for s in (Subjective, Objective, PerfectInfo)]
    return SoundnessReport(f, sets[0], sets[1], sets[2], sets[0] - sets[1], sets[1] - sets[2])
