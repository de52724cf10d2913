"""Strategic simulations and bisimulations between iCGS.

A relation R links states of M to states of M'.  It is an A-simulation
when every pair agrees on labels (1a), every epistemic step of a member
of A in M' is matched in M (1b), every partial strategy on a common
knowledge neighbourhood of M can be answered by one on the linked
neighbourhood of M' so that successors stay related (1c), and R never
links two neighbourhoods of M to one state of M' (2).  A bisimulation is
a simulation whose converse is a simulation too.

Condition 1c is evaluated in two stages.  First a boolean table
ok[k, c, c'] records, for each related pair k = (r, r') and coalition
actions c at r and c' at r', whether every c'-successor of r' is related
to some c-successor of r.  Then, per neighbourhood pair, every strategy
needs an answer.  For coalitions with at most one member a neighbourhood
is a single block, a strategy is one action, and the whole check reduces
to array operations.  Larger coalitions go through a small constraint
solver over the blocks of the answering side.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import formulas as fm
from .icgs import ICGS, ModelError, Run
from .mc import Checker, Semantics

DEFAULT_BUDGET = 10 ** 7


# ---------------------------------------------------------------- relations

class BisimRelation:
    """A coalition-indexed set of (state of M, state of M') pairs."""

    def __init__(self, model: ICGS, model2: ICGS, coalition, pairs):
        self.model = model
        self.model2 = model2
        self.coalition = fm.canonical_agents(coalition)
        for a in self.coalition:
            model.agent_index(a)
            model2.agent_index(a)
        p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(p) and (p.min() < 0 or p[:, 0].max() >= model.n_states or p[:, 1].max() >= model2.n_states):
            raise ModelError("relation refers to states outside the models")
        self.pairs = np.unique(p, axis=0) if len(p) else p

    @classmethod
    def from_names(cls, model, model2, coalition, pairs) -> "BisimRelation":
        idx = []
        for a, b in pairs:
            try:
                idx.append((model.state_index(a), model2.state_index(b)))
            except ModelError as exc:
                raise ModelError(f"dangling pair ({a}, {b}): {exc}") from None
        return cls(model, model2, coalition, idx)

    @classmethod
    def from_dict(cls, model, model2, data) -> "BisimRelation":
        try:
            return cls.from_names(model, model2, data["coalition"], data["pairs"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed relation document: {exc}") from None

    @classmethod
    def identity(cls, model, coalition) -> "BisimRelation":
        n = model.n_states
        return cls(model, model, coalition, np.stack([np.arange(n), np.arange(n)], axis=1))

    def to_dict(self) -> dict:
        s1, s2 = self.model.states, self.model2.states
        return {"coalition": list(self.coalition),
                "pairs": [[s1[a], s2[b]] for a, b in self.pairs.tolist()]}

    def converse(self) -> "BisimRelation":
        return BisimRelation(self.model2, self.model, self.coalition, self.pairs[:, ::-1])

    def contains(self, q, q2) -> bool:
        a, b = self.model.state_index(q), self.model2.state_index(q2)
        return bool(np.any((self.pairs[:, 0] == a) & (self.pairs[:, 1] == b)))

    def pair_names(self) -> set:
        s1, s2 = self.model.states, self.model2.states
        return {(s1[a], s2[b]) for a, b in self.pairs.tolist()}

    def __len__(self):
        return len(self.pairs)

    def __repr__(self):
        return f"BisimRelation(<{','.join(self.coalition)}>, {len(self)} pairs)"


def load_relation(path, model, model2) -> BisimRelation:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON: {exc}") from None
    return BisimRelation.from_dict(model, model2, data)


def save_relation(rel: BisimRelation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rel.to_dict(), fh, indent=1, ensure_ascii=False)
        fh.write("\n")


# ------------------------------------------------------------------ verdicts

@dataclass
class StrategySimulator:
    """The answer map ST of one direction: per neighbourhood pair, strategy -> strategy.

    Entries are (representative of M, representative of M', list of
    (strategy, answer)) where strategies are in the JSON form agent ->
    block representative -> action.  They are materialised lazily because
    large models have many neighbourhood pairs.
    """
    _entries: list = field(default_factory=list)
    _lazy: object = None

    def entries(self) -> list:
        if self._lazy is not None:
            self._entries = self._lazy()
            self._lazy = None
        return self._entries

    def __len__(self):
        return len(self.entries())


@dataclass
class Verdict:
    passed: bool
    violated: str = None
    direction: str = None
    witness: dict = None
    simulator: dict = None

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"pass": self.passed, "violated": self.violated, "direction": self.direction,
                "witness": self.witness}


# ----------------------------------------------------------- array helpers

def _expand(indptr: np.ndarray, rows: np.ndarray):
    """For CSR rows: (position in rows, entry index) of every entry."""
    rows = np.asarray(rows, dtype=np.int64)
    starts = indptr[rows]
    lens = indptr[rows + 1] - starts
    total = int(lens.sum())
    owner = np.repeat(np.arange(len(rows)), lens)
    offs = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens) + np.arange(total)
    return owner, offs


def _csr(keys: np.ndarray, values: np.ndarray, n: int):
    order = np.argsort(keys, kind="stable")
    ptr = np.searchsorted(keys[order], np.arange(n + 1))
    return ptr, values[order]


def _in_sorted(sorted_keys: np.ndarray, keys: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(sorted_keys, keys)
    pos[pos >= len(sorted_keys)] = 0
    return (sorted_keys[pos] == keys) if len(sorted_keys) else np.zeros(len(keys), dtype=bool)


def _transfer_table(M, M2, A, A2, r, r2, rel_ptr, rel_val):
    """ok[k, c, c'], avail[k, c], avail2[k, c'] for pairs k = (r[k], r2[k]).

    ok says every c'-successor of r2[k] is related (via the CSR relation
    rel_ptr/rel_val from M to M') to some c-successor of r[k].
    """
    table, cid = M.coalition_actions(A)
    table2, cid2 = M2.coalition_actions(A2)
    nc, nc2, K, N2 = len(table), len(table2), len(r), M2.n_states
    ek, e = _expand(M.indptr, r)
    a, s = cid[e].astype(np.int64), M.dst[e]
    avail = np.zeros((K, nc), dtype=bool)
    avail[ek, a] = True
    ik, iv = _expand(rel_ptr, s)
    img = np.unique((ek[ik] * nc + a[ik]) * N2 + rel_val[iv])
    ek2, e2 = _expand(M2.indptr, r2)
    a2, s2 = cid2[e2].astype(np.int64), M2.dst[e2].astype(np.int64)
    avail2 = np.zeros((K, nc2), dtype=bool)
    avail2[ek2, a2] = True
    bad = np.zeros((K, nc, nc2), dtype=bool)
    for c in range(nc):
        miss = ~_in_sorted(img, (ek2 * nc + c) * N2 + s2)
        bad[ek2[miss], c, a2[miss]] = True
    return ~bad, avail, avail2


def _refutation(M, M2, A, A2, rel: set, r, r2, c, c2):
    """A successor of r2 under c2 related to no successor of r under c (names), or None."""
    table, cid = M.coalition_actions(A)
    table2, cid2 = M2.coalition_actions(A2)
    sl, sl2 = M.out_edges(r), M2.out_edges(r2)
    succ = set(M.dst[sl][cid[sl] == c].tolist())
    for s2 in sorted(set(M2.dst[sl2][cid2[sl2] == c2].tolist())):
        if not any((s, s2) in rel for s in succ):
            return M2.states[s2]
    return None


# ------------------------------------------------------ constraint solving

class _Side:
    """Block-slot bookkeeping for one model and coalition."""

    def __init__(self, model: ICGS, A: tuple):
        self.m = model
        self.A = A
        self.table, _ = model.coalition_actions(A)
        self.index = {t: k for k, t in enumerate(self.table)}

    def slots(self, states) -> list:
        seen = []
        for q in states:
            for i in self.A:
                key = (i, int(self.m.blocks[i, q]))
                if key not in seen:
                    seen.append(key)
        return seen

    def options(self, slot) -> tuple:
        i, b = slot
        return self.m.protocol_idx(i, int(self.m.block_members(i, b)[0]))

    def cid(self, q: int, choice: dict) -> int:
        return self.index.get(tuple(choice[(i, int(self.m.blocks[i, q]))] for i in self.A), -1)

    def strategies(self, states):
        slots = self.slots(states)
        for combo in itertools.product(*[self.options(s) for s in slots]):
            yield dict(zip(slots, combo))

    def strategy_table(self, states, limit=None):
        """All block assignments over the slots of `states` as arrays.

        Returns (slots, choices, cids): choices[n, j] is the action of
        strategy n at slot j and cids[n, k] the coalition action it plays at
        states[k] (len(self.table) when that combination has no transitions).
        Returns None when there are more than `limit` strategies.
        """
        slots = self.slots(states)
        opts = [self.options(sl) for sl in slots]
        count = int(np.prod([len(o) for o in opts], dtype=np.int64)) if opts else 1
        if limit is not None and count > limit:
            return None
        if opts:
            grids = np.meshgrid(*[np.asarray(o, dtype=np.int64) for o in opts], indexing="ij")
            choices = np.stack([g.reshape(-1) for g in grids], axis=1)
        else:
            choices = np.zeros((1, 0), dtype=np.int64)
        pos = {sl: j for j, sl in enumerate(slots)}
        na = max(len(self.m.actions), 1)
        codes = {}
        for k, t in enumerate(self.table):
            code = 0
            for a in t:
                code = code * na + a
            codes[code] = k
        keys = np.array(sorted(codes), dtype=np.int64)
        vals = np.array([codes[c] for c in sorted(codes)], dtype=np.int64)
        cids = np.empty((len(choices), len(states)), dtype=np.int64)
        for k, q in enumerate(states):
            code = np.zeros(len(choices), dtype=np.int64)
            for i in self.A:
                code = code * na + choices[:, pos[(i, int(self.m.blocks[i, q]))]]
            hit = np.searchsorted(keys, code)
            hit[hit >= len(keys)] = 0
            found = keys[hit] == code
            cids[:, k] = np.where(found, vals[hit], len(self.table))
        return slots, choices, cids

    def choice_of(self, slots, row) -> dict:
        return {sl: int(a) for sl, a in zip(slots, row)}

    def to_json(self, choice: dict) -> dict:
        out = {}
        for (i, b), a in sorted(choice.items()):
            rep = int(self.m.block_members(i, b)[0])
            out.setdefault(self.m.agents[i], {})[self.m.states[rep]] = self.m.actions[a]
        return out


def _solve(side: _Side, constraints: list):
    """Find a block assignment of `side` with allowed[cid(q)] for each (q, allowed).

    Returns the choice dict or None.  Backtracking over slots in order of
    first use; a constraint is tested once all slots of its state are set.
    """
    merged = {}
    for q, allowed in constraints:
        merged[q] = allowed if q not in merged else merged[q] & allowed
    if any(not v.any() for v in merged.values()):
        return None
    states = sorted(merged)
    slots = side.slots(states)
    pos = {s: k for k, s in enumerate(slots)}
    due = [[] for _ in slots]
    for q in states:
        last = max(pos[(i, int(side.m.blocks[i, q]))] for i in side.A) if side.A else -1
        if last < 0:
            if not merged[q][0]:
                return None
            continue
        due[last].append(q)
    choice = {}

    def rec(k):
        if k == len(slots):
            return True
        for a in side.options(slots[k]):
            choice[slots[k]] = a
            if all(merged[q][side.cid(q, choice)] if side.cid(q, choice) >= 0 else False for q in due[k]):
                if rec(k + 1):
                    return True
        del choice[slots[k]]
        return False

    return dict(choice) if rec(0) else None


def _answers(side, side2, ok, doms, doms2, r_of, r2_of, constraints, limit=1 << 26):
    """Answer every strategy of `side` on doms with one of `side2` on doms2.

    A constraint is a list of pair indices k and holds when one of them
    accepts, that is ok[k, c, c'] for the coalition actions played at
    r_of[k] and r2_of[k].  Candidate answers are kept as packed bitsets, one
    row per strategy.  Returns (slots, choices, slots2, choices2, answer)
    with answer[n] = -1 when strategy n has no answer, or None when the
    tables exceed `limit` bits.
    """
    t1, t2 = side.strategy_table(doms, limit), side2.strategy_table(doms2, limit)
    if t1 is None or t2 is None or len(t1[1]) * len(t2[1]) > limit:
        return None
    slots, ch1, cids1 = t1
    slots2, ch2, cids2 = t2
    pos = {q: j for j, q in enumerate(doms)}
    pos2 = {q: j for j, q in enumerate(doms2)}
    nc, nc2 = ok.shape[1], ok.shape[2]
    n2 = len(ch2)
    acc = np.tile(np.packbits(np.ones(n2, dtype=bool)), (len(ch1), 1))
    okx = np.zeros((nc + 1, nc2 + 1), dtype=bool)
    for group in constraints:
        g = np.zeros_like(acc)
        for k in group:
            okx[:nc, :nc2] = ok[k]
            packed = np.packbits(okx[:, cids2[:, pos2[int(r2_of[k])]]], axis=1)
            g |= packed[cids1[:, pos[int(r_of[k])]]]
        acc &= g
    bits = np.unpackbits(acc, axis=1, count=n2).astype(bool)
    answer = np.where(bits.any(axis=1), bits.argmax(axis=1), -1)
    return slots, ch1, slots2, ch2, answer


# ------------------------------------------------------------- conditions

def _agent_pairs(M, M2, coalition):
    return [(M.agent_index(a), M2.agent_index(a), a) for a in coalition]


def _check_labels(M, M2, pairs):
    atoms = sorted(set(M.atoms) | set(M2.atoms))
    for p in atoms:
        c1 = M.labels[:, M.atoms.index(p)] if p in M.atoms else np.zeros(M.n_states, dtype=bool)
        c2 = M2.labels[:, M2.atoms.index(p)] if p in M2.atoms else np.zeros(M2.n_states, dtype=bool)
        bad = np.flatnonzero(c1[pairs[:, 0]] != c2[pairs[:, 1]])
        if len(bad):
            yield int(bad[0]), p


def _first_label_violation(M, M2, pairs):
    hits = list(_check_labels(M, M2, pairs))
    if not hits:
        return None
    k, p = min(hits)
    q, q2 = pairs[k]
    return {"states": [M.states[q], M2.states[q2]], "atom": p}


def _epistemic_violation(M, M2, coalition, pairs):
    """Condition 1b: each ~'_i step from q' is matched by a ~_i step from q."""
    N2 = M2.n_states
    best = None
    for i, j, name in _agent_pairs(M, M2, coalition):
        b1 = M.blocks[i].astype(np.int64)
        b2 = M2.blocks[j].astype(np.int64)
        have = np.unique(b1[pairs[:, 0]] * N2 + pairs[:, 1])
        combo = b1[pairs[:, 0]] * (int(b2.max()) + 1) + b2[pairs[:, 1]]
        uniq, first = np.unique(combo, return_index=True)
        order2 = np.argsort(b2, kind="stable")
        ptr2 = np.searchsorted(b2[order2], np.arange(int(b2.max()) + 2))
        reps = pairs[first]
        owner, offs = _expand(ptr2, b2[reps[:, 1]])
        members = order2[offs]
        miss = ~_in_sorted(have, b1[reps[owner, 0]] * N2 + members)
        if miss.any():
            bad_combo = np.unique(owner[miss])
            k = int(first[bad_combo].min())
            if best is None or k < best[0]:
                loc = int(np.flatnonzero(first == k)[0])
                r2 = int(members[miss & (owner == loc)][0])
                best = (k, name, r2)
    if best is None:
        return None
    k, name, r2 = best
    q, q2 = pairs[k]
    return {"states": [M.states[q], M2.states[q2]], "agent": name, "unmatched": M2.states[r2]}


def _injectivity_violation(M, M2, A, pairs):
    """Condition 2: all states related to one q' share a common knowledge neighbourhood."""
    ids = M.ckn_ids(A)
    order = np.lexsort((pairs[:, 0], pairs[:, 1]))
    p = pairs[order]
    c = ids[p[:, 0]]
    starts = np.flatnonzero(np.r_[True, p[1:, 1] != p[:-1, 1]])
    lo = np.minimum.reduceat(c, starts)
    hi = np.maximum.reduceat(c, starts)
    bad = np.flatnonzero(lo != hi)
    if not len(bad):
        return None
    g = int(bad[0])
    seg = p[starts[g]:(starts[g + 1] if g + 1 < len(starts) else len(p))]
    q1 = int(seg[0, 0])
    q2 = int(seg[ids[seg[:, 0]] != ids[q1]][0, 0])
    return {"states": [M2.states[int(seg[0, 1])], M.states[q1], M.states[q2]]}


def _transfer(M, M2, coalition, pairs, mode):
    """Condition 1c (mode 'ckn') or (c') (mode 'ekn'). Returns (witness or None, simulator)."""
    A, A2 = M.coalition(coalition), M2.coalition(coalition)
    rel_ptr, rel_val = _csr(pairs[:, 0], pairs[:, 1], M.n_states)
    ok, avail, avail2 = _transfer_table(M, M2, A, A2, pairs[:, 0], pairs[:, 1], rel_ptr, rel_val)
    side, side2 = _Side(M, A), _Side(M2, A2)
    rel = None

    def refute(c_of, ks, choice):
        nonlocal rel
        if rel is None:
            rel = set(map(tuple, pairs.tolist()))
        for k in ks:
            r, r2 = int(pairs[k, 0]), int(pairs[k, 1])
            c2 = side2.cid(r2, choice) if A2 else 0
            s2 = _refutation(M, M2, A, A2, rel, r, r2, c_of[k], c2)
            if s2 is not None:
                return {"r": M.states[r], "r'": M2.states[r2], "s'": s2}
        return {}

    if len(A) <= 1:
        ids = M.ckn_ids(A).astype(np.int64)
        ids2 = M2.ckn_ids(A2).astype(np.int64)
        gkey = ids[pairs[:, 0]] * (int(ids2.max()) + 1) + ids2[pairs[:, 1]]
        order = np.argsort(gkey, kind="stable")
        starts = np.flatnonzero(np.r_[True, gkey[order][1:] != gkey[order][:-1]])
        okg = np.logical_and.reduceat(ok[order], starts, axis=0)
        av = np.logical_or.reduceat(avail[order], starts, axis=0)
        av2 = np.logical_or.reduceat(avail2[order], starts, axis=0)
        resp = okg & av2[:, None, :]
        has = resp.any(axis=2)
        failing = np.flatnonzero((av & ~has).any(axis=1))
        if len(failing):
            lead = order[starts]
            g = int(failing[np.argmin(lead[failing])])
            seg = order[starts[g]:(starts[g + 1] if g + 1 < len(starts) else len(order))]
            c = int(np.flatnonzero(av[g] & ~has[g])[0])
            k0 = int(seg.min())
            choice = {(A[0], int(M.blocks[A[0], pairs[k0, 0]])): side.table[c][0]} if A else {}
            refs = []
            for c2 in np.flatnonzero(av2[g]):
                ch2 = {(A2[0], int(M2.blocks[A2[0], pairs[k0, 1]])): side2.table[c2][0]} if A2 else {}
                bad_k = [int(k) for k in sorted(seg) if not ok[k, c, c2]]
                r = refute({k: c for k in bad_k}, bad_k[:1], ch2)
                refs.append({"response": side2.to_json(ch2), **r})
            return {"states": [M.states[pairs[k0, 0]], M2.states[pairs[k0, 1]]],
                    "strategy": side.to_json(choice), "refutations": refs}, None
        answer = np.argmax(resp, axis=2)

        def build():
            out = []
            for g, st in enumerate(starts):
                k0 = int(order[st])
                r, r2 = int(pairs[k0, 0]), int(pairs[k0, 1])
                m = []
                for c in np.flatnonzero(av[g]):
                    c2 = int(answer[g, c])
                    ch = {(A[0], int(M.blocks[A[0], r])): side.table[c][0]} if A else {}
                    ch2 = {(A2[0], int(M2.blocks[A2[0], r2])): side2.table[c2][0]} if A2 else {}
                    m.append((side.to_json(ch), side2.to_json(ch2)))
                out.append((M.states[r], M2.states[r2], m))
            return out

        return None, StrategySimulator(_lazy=build)

    # general coalitions: explicit neighbourhood pairs, all strategies at once
    groups = _neighbourhood_groups(M, M2, A, A2, pairs, mode)
    entries = []

    def failure(choice, ks):
        c_of = {k: side.cid(int(pairs[k, 0]), choice) for k in ks}
        refs = []
        for ch2 in itertools.islice(side2.strategies(sorted({int(pairs[k, 1]) for k in ks})), 20):
            bad_k = [k for k in ks if side2.cid(int(pairs[k, 1]), ch2) < 0
                     or not ok[k, c_of[k], side2.cid(int(pairs[k, 1]), ch2)]]
            r = refute(c_of, bad_k[:1], ch2) if bad_k else {}
            refs.append({"response": side2.to_json(ch2), **r})
        k0 = min(ks)
        return {"states": [M.states[pairs[k0, 0]], M2.states[pairs[k0, 1]]],
                "strategy": side.to_json(choice), "refutations": refs}

    for g_states, g2_states, ks in groups:
        doms = sorted({int(pairs[k, 0]) for k in ks})
        doms2 = sorted({int(pairs[k, 1]) for k in ks})
        res = _answers(side, side2, ok, doms, doms2, pairs[:, 0], pairs[:, 1], [[k] for k in ks])
        mapping = []
        if res is not None:
            slots, ch1, slots2, ch2, answer = res
            missing = np.flatnonzero(answer < 0)
            if len(missing):
                return failure(side.choice_of(slots, ch1[missing[0]]), ks), None
            for n, m in enumerate(answer.tolist()):
                mapping.append((side.to_json(side.choice_of(slots, ch1[n])),
                                side2.to_json(side2.choice_of(slots2, ch2[m]))))
        else:
            memo = {}
            for choice in side.strategies(doms):
                c_of = {k: side.cid(int(pairs[k, 0]), choice) for k in ks}
                key = tuple(c_of[k] for k in ks)
                if key not in memo:
                    memo[key] = _solve(side2, [(int(pairs[k, 1]), ok[k, c_of[k]] & avail2[k]) for k in ks])
                if memo[key] is None:
                    return failure(choice, ks), None
                mapping.append((side.to_json(choice), side2.to_json(memo[key])))
        entries.append((M.states[g_states[0]], M2.states[g2_states[0]], mapping))
    return None, StrategySimulator(_entries=entries)


def _neighbourhood_groups(M, M2, A, A2, pairs, mode):
    """(domain in M, domain in M', related pair indices inside) per neighbourhood pair, in pair order."""
    out, seen = [], set()
    if mode == "ckn":
        ids, ids2 = M.ckn_ids(A), M2.ckn_ids(A2)
        for k, (r, r2) in enumerate(pairs.tolist()):
            key = (int(ids[r]), int(ids2[r2]))
            if key in seen:
                continue
            seen.add(key)
            ks = np.flatnonzero((ids[pairs[:, 0]] == key[0]) & (ids2[pairs[:, 1]] == key[1])).tolist()
            out.append((np.flatnonzero(ids == key[0]), np.flatnonzero(ids2 == key[1]), ks))
        return out
    for k, (r, r2) in enumerate(pairs.tolist()):
        E, E2 = M.ekn_idx(A, r), M2.ekn_idx(A2, r2)
        key = (tuple(E.tolist()), tuple(E2.tolist()))
        if key in seen:
            continue
        seen.add(key)
        ks = np.flatnonzero(np.isin(pairs[:, 0], E) & np.isin(pairs[:, 1], E2)).tolist()
        out.append((E, E2, ks))
    return out


def _simulation(M, M2, coalition, pairs, mode="ckn"):
    """Returns (violated, witness, simulator)."""
    if not len(pairs):
        raise ModelError("relation is empty")
    w = _first_label_violation(M, M2, pairs)
    if w:
        return "1a", w, None
    w = _epistemic_violation(M, M2, coalition, pairs)
    if w:
        return "1b", w, None
    w, sim = _transfer(M, M2, coalition, pairs, mode)
    if w:
        return ("1c" if mode == "ckn" else "pre-c'"), w, None
    if mode == "ckn":
        w = _injectivity_violation(M, M2, M.coalition(coalition), pairs)
        if w:
            return "2", w, None
    return None, None, sim


def _as_relation(M, M2, A, R) -> BisimRelation:
    if isinstance(R, BisimRelation):
        return R
    if isinstance(R, dict):
        return BisimRelation.from_dict(M, M2, R)
    return BisimRelation.from_names(M, M2, A, R)


def verify_simulation(M: ICGS, M2: ICGS, A, R) -> Verdict:
    """Is R an A-simulation from M to M'?"""
    R = _as_relation(M, M2, A, R)
    coalition = fm.canonical_agents(A) if A is not None else R.coalition
    v, w, sim = _simulation(M, M2, coalition, R.pairs)
    if v:
        return Verdict(False, v, "forward", w)
    return Verdict(True, simulator={"forward": sim})


def _verify_both(M, M2, A, R, mode) -> Verdict:
    R = _as_relation(M, M2, A, R)
    coalition = fm.canonical_agents(A) if A is not None else R.coalition
    v, w, sim = _simulation(M, M2, coalition, R.pairs, mode)
    if v:
        return Verdict(False, v, "forward", w)
    v, w, sim2 = _simulation(M2, M, coalition, R.pairs[:, ::-1].copy(), mode)
    if v:
        return Verdict(False, v, "converse", w)
    return Verdict(True, simulator={"forward": sim, "converse": sim2})


def verify_bisimulation(M: ICGS, M2: ICGS, A, R) -> Verdict:
    """Are R and its converse both A-simulations?"""
    return _verify_both(M, M2, A, R, "ckn")


def verify_pre_bisimulation(M: ICGS, M2: ICGS, A, R) -> Verdict:
    """Pre-bisimulation: strategy transfer over collective (not common) knowledge, no condition 2."""
    return _verify_both(M, M2, A, R, "ekn")


def covers_neighbourhoods(M: ICGS, M2: ICGS, A, R) -> bool:
    """Every state of C'_A(q') is related to some state of C_A(q), for every pair (q, q')."""
    R = _as_relation(M, M2, A, R)
    Ai, A2 = M.coalition(R.coalition), M2.coalition(R.coalition)
    ids, ids2 = M.ckn_ids(Ai).astype(np.int64), M2.ckn_ids(A2).astype(np.int64)
    w = int(ids2.max()) + 1
    have = np.unique(ids[R.pairs[:, 0]] * M2.n_states + R.pairs[:, 1])
    groups = np.unique(ids[R.pairs[:, 0]] * w + ids2[R.pairs[:, 1]])
    for key in groups.tolist():
        c, c2 = divmod(key, w)
        need = c * M2.n_states + np.flatnonzero(ids2 == c2)
        if not _in_sorted(have, need).all():
            return False
    return True


# ---------------------------------------------------------------- deciding

@dataclass
class Bisimilar:
    relation: BisimRelation
    verdict: Verdict
    explored: int = 0

    @property
    def simulator(self):
        return self.verdict.simulator


@dataclass
class NotBisimilar:
    explored: int = 0
    reason: str = ""


@dataclass
class BudgetExceeded:
    explored: int = 0


def _refine(M, M2, A, A2, coalition, P):
    """Drop pairs that no bisimulation inside P can contain, until nothing changes.

    Sound pruning rules: labels; epistemic matching against P in both
    directions; and, per pair of common knowledge neighbourhoods, the
    covering property plus a relaxed strategy transfer in which each
    state of the answering side only needs one P-partner whose successors
    match.
    """
    side, side2 = _Side(M, A), _Side(M2, A2)
    ids, ids2 = M.ckn_ids(A), M2.ckn_ids(A2)
    while True:
        before = P.sum()
        for i, j, _ in _agent_pairs(M, M2, coalition):
            B = np.eye(M.n_blocks(i), dtype=bool)[M.blocks[i]]
            B2 = np.eye(M2.n_blocks(j), dtype=bool)[M2.blocks[j]]
            pb = (B.T.astype(np.int64) @ P.astype(np.int64)) > 0          # block x state'
            fwd = ~((B2.T.astype(np.int64) @ (~pb).T.astype(np.int64)) > 0).T   # block x block'
            pb2 = (P.astype(np.int64) @ B2.astype(np.int64)) > 0          # state x block'
            bwd = ~((B.T.astype(np.int64) @ (~pb2).astype(np.int64)) > 0)  # block x block'
            P &= fwd[M.blocks[i]][:, M2.blocks[j]] & bwd[M.blocks[i]][:, M2.blocks[j]]
        pairs = np.argwhere(P)
        if not len(pairs):
            return P
        for (c, c2) in sorted({(int(ids[a]), int(ids2[b])) for a, b in pairs.tolist()}):
            C, C2 = np.flatnonzero(ids == c), np.flatnonzero(ids2 == c2)
            sub = P[np.ix_(C, C2)]
            if not sub.any():
                continue
            if not (sub.any(axis=0).all() and sub.any(axis=1).all()) \
                    or not _relaxed_transfer(M, M2, A, A2, side, side2, P, C, C2) \
                    or not _relaxed_transfer(M2, M, A2, A, side2, side, P.T, C2, C):
                P[np.ix_(C, C2)] = False
        if P.sum() == before:
            return P


def _relaxed_transfer(M, M2, A, A2, side, side2, P, C, C2) -> bool:
    pairs = np.argwhere(P[np.ix_(C, C2)])
    pairs = np.stack([C[pairs[:, 0]], C2[pairs[:, 1]]], axis=1)
    rel_ptr, rel_val = _csr(np.nonzero(P)[0], np.nonzero(P)[1], M.n_states)
    ok, avail, avail2 = _transfer_table(M, M2, A, A2, pairs[:, 0], pairs[:, 1], rel_ptr, rel_val)
    by_target = {}
    for k, r2 in enumerate(pairs[:, 1].tolist()):
        by_target.setdefault(r2, []).append(k)
    res = _answers(side, side2, ok, C.tolist(), sorted(by_target), pairs[:, 0], pairs[:, 1],
                   list(by_target.values()))
    if res is not None:
        return bool((res[4] >= 0).all())
    memo = {}
    for choice in side.strategies(C.tolist()):
        cs = [side.cid(int(r), choice) for r in pairs[:, 0]]
        key = tuple(cs)
        if key not in memo:
            cons = []
            for r2, ks in by_target.items():
                allowed = np.zeros(ok.shape[2], dtype=bool)
                for k in ks:
                    allowed |= ok[k, cs[k]]
                cons.append((r2, allowed & avail2[ks[0]]))
            memo[key] = _solve(side2, cons) is not None
        if not memo[key]:
            return False
    return True


def _connected(M, M2, A, A2, P, q, q2):
    """Pairs of P reachable from (q, q') through shared neighbourhoods and successor pairs."""
    ids, ids2 = M.ckn_ids(A), M2.ckn_ids(A2)
    keep = np.zeros_like(P)
    todo = [(q, q2)]
    keep[q, q2] = True
    while todo:
        a, b = todo.pop()
        C, C2 = np.flatnonzero(ids == ids[a]), np.flatnonzero(ids2 == ids2[b])
        nxt = M.dst[M.out_edges(a)]
        nxt2 = M2.dst[M2.out_edges(b)]
        for X, Y in ((C, C2), (np.unique(nxt), np.unique(nxt2))):
            sub = P[np.ix_(X, Y)] & ~keep[np.ix_(X, Y)]
            for i, j in np.argwhere(sub).tolist():
                keep[X[i], Y[j]] = True
                todo.append((int(X[i]), int(Y[j])))
    return keep



class _Cached:
    """Replayable view of a generator; `cut` records an early stop by the budget."""

    def __init__(self, gen):
        self.gen, self.items, self.done, self.cut = gen, [], False, False

    def _pull(self) -> bool:
        if self.done:
            return False
        try:
            item = next(self.gen)
        except StopIteration as stop:
            self.done, self.cut = True, bool(stop.value)
            return False
        self.items.append(item)
        return True

    def nonempty(self) -> bool:
        return bool(self.items) or self._pull()

    def __iter__(self):
        k = 0
        while k < len(self.items) or self._pull():
            yield self.items[k]
            k += 1


def _distinct_outcomes(X, side, states, table):
    """Keep one strategy per vector of successor sets over `states`."""
    slots, choices, cids = table
    _, cid = X.coalition_actions(side.A)
    sig = np.empty_like(cids)
    for k, q in enumerate(states):
        sl = X.out_edges(q)
        seen = {}
        codes = np.full(len(side.table) + 1, -1, dtype=np.int64)
        for c in range(len(side.table) + 1):
            key = frozenset(X.dst[sl][cid[sl] == c].tolist())
            codes[c] = seen.setdefault(key, len(seen))
        sig[:, k] = codes[cids[:, k]]
    _, keep = np.unique(sig, axis=0, return_index=True)
    keep.sort()
    return slots, choices[keep], cids[keep]


class _SubRelations:
    """Covering sub-relations of P on one neighbourhood pair (C, C').

    Cells are decided in order, included before excluded.  A branch is cut
    when a state of C or C' can no longer be covered, or when the chosen
    cells already defeat the transfer condition in either direction with
    P standing in for the final relation outside the chosen cells.  Both
    tests only get harder as cells are added, so no candidate is lost.
    """

    def __init__(self, M, M2, A, A2, side, side2, P, C, C2):
        self.C, self.C2 = C.tolist(), C2.tolist()
        cells = np.argwhere(P[np.ix_(C, C2)])
        self.cells = [(self.C[i], self.C2[j]) for i, j in cells.tolist()]
        self.dirs = []
        if not self.cells:
            return
        r = np.array([a for a, _ in self.cells], dtype=np.int64)
        r2 = np.array([b for _, b in self.cells], dtype=np.int64)
        for (X, X2, s1, s2, Q, D, D2, ra, rb) in (
                (M, M2, side, side2, P, self.C, self.C2, r, r2),
                (M2, M, side2, side, P.T, self.C2, self.C, r2, r)):
            t1, t2 = s1.strategy_table(D, 1 << 16), s2.strategy_table(D2, 1 << 16)
            if t1 is None or t2 is None:
                continue
            t1, t2 = _distinct_outcomes(X, s1, D, t1), _distinct_outcomes(X2, s2, D2, t2)
            if len(t1[1]) * len(t2[1]) > 1 << 24:
                continue
            ptr, val = _csr(np.nonzero(Q)[0], np.nonzero(Q)[1], X.n_states)
            ok, _, _ = _transfer_table(X, X2, s1.A, s2.A, ra, rb, ptr, val)
            nc, nc2 = ok.shape[1], ok.shape[2]
            pos = {q: j for j, q in enumerate(D)}
            pos2 = {q: j for j, q in enumerate(D2)}
            okx = np.zeros((nc + 1, nc2 + 1), dtype=bool)
            packed, rows = [], []
            for k, (a, b) in enumerate(zip(ra.tolist(), rb.tolist())):
                okx[:nc, :nc2] = ok[k]
                packed.append(np.packbits(okx[:, t2[2][:, pos2[b]]], axis=1))
                rows.append(t1[2][:, pos[a]])
            self.dirs.append((packed, rows, len(t2[1]), len(t1[1])))

    def _gain(self, d, k):
        packed, rows = d[0], d[1]
        return packed[k][rows[k]]

    def covering(self, allowed, tick):
        """Yield covering cell lists; returns True when stopped by `allowed`."""
        n = len(self.cells)
        left = {}
        for a, b in self.cells:
            left[("l", a)] = left.get(("l", a), 0) + 1
            left[("r", b)] = left.get(("r", b), 0) + 1
        if len(left) < len(self.C) + len(self.C2):
            return False
        have = dict.fromkeys(left, 0)
        chosen = []
        stack = [[np.tile(np.packbits(np.ones(d[2], dtype=bool)), (d[3], 1)) for d in self.dirs]]
        stopped = [False]

        def rec(k):
            if not allowed():
                stopped[0] = True
                return
            tick()
            if k == n:
                yield list(chosen)
                return
            a, b = self.cells[k]
            accs = [acc & self._gain(d, k) for acc, d in zip(stack[-1], self.dirs)]
            if all(acc.any(axis=1).all() for acc in accs):
                chosen.append((a, b))
                stack.append(accs)
                have[("l", a)] += 1
                have[("r", b)] += 1
                left[("l", a)] -= 1
                left[("r", b)] -= 1
                yield from rec(k + 1)
                left[("l", a)] += 1
                left[("r", b)] += 1
                have[("l", a)] -= 1
                have[("r", b)] -= 1
                stack.pop()
                chosen.pop()
                if stopped[0]:
                    return
            left[("l", a)] -= 1
            left[("r", b)] -= 1
            if (have[("l", a)] or left[("l", a)]) and (have[("r", b)] or left[("r", b)]):
                yield from rec(k + 1)
            left[("l", a)] += 1
            left[("r", b)] += 1

        yield from rec(0)
        return stopped[0]


def decide_bisimilarity(M: ICGS, q, M2: ICGS, q2, A, budget: int = DEFAULT_BUDGET):
    """Exhaustively decide whether (M, q) and (M', q') are A-bisimilar.

    After sound pruning, candidates are tried in order: the name identity,
    the largest surviving relation, then unions of covering sub-relations
    over injective matchings of common knowledge neighbourhoods.  Every
    candidate is confirmed by verify_bisimulation.  Candidates and nodes of
    the sub-relation search both count against the budget.
    """
    coalition = fm.canonical_agents(A)
    Ai, A2 = M.coalition(coalition), M2.coalition(coalition)
    qi, q2i = M.state_index(q), M2.state_index(q2)
    names = sorted(set(M.atoms) | set(M2.atoms))
    L = np.stack([M.labels[:, M.atoms.index(p)] if p in M.atoms else np.zeros(M.n_states, bool)
                  for p in names], axis=1) if names else np.zeros((M.n_states, 0), bool)
    L2 = np.stack([M2.labels[:, M2.atoms.index(p)] if p in M2.atoms else np.zeros(M2.n_states, bool)
                   for p in names], axis=1) if names else np.zeros((M2.n_states, 0), bool)
    P = (L[:, None, :] == L2[None, :, :]).all(axis=2)
    P = _refine(M, M2, Ai, A2, coalition, P)
    if not P[qi, q2i]:
        return NotBisimilar(0, "the initial pair is pruned")
    P = _connected(M, M2, Ai, A2, P, qi, q2i)
    explored = 0
    tried = set()

    def attempt(mask):
        nonlocal explored
        pairs = np.argwhere(mask)
        key = pairs.tobytes()
        if key in tried or not mask[qi, q2i]:
            return None
        tried.add(key)
        explored += 1
        rel = BisimRelation(M, M2, coalition, pairs)
        v = verify_bisimulation(M, M2, coalition, rel)
        return Bisimilar(rel, v, explored) if v.passed else None

    same = np.zeros_like(P)
    pos2 = {s: k for k, s in enumerate(M2.states)}
    for k, s in enumerate(M.states):
        if s in pos2:
            same[k, pos2[s]] = True
    for cand in (P & same, P):
        if explored >= budget:
            return BudgetExceeded(explored)
        res = attempt(cand)
        if res:
            return res

    ids, ids2 = M.ckn_ids(Ai), M2.ckn_ids(A2)
    cps = sorted({(int(ids[a]), int(ids2[b])) for a, b in np.argwhere(P).tolist()},
                 key=lambda c: (c != (int(ids[qi]), int(ids2[q2i])), c))
    count = [0]

    def tick():
        count[0] += 1

    def explored_now():
        return explored + count[0]

    side, side2 = _Side(M, Ai), _Side(M2, A2)
    subs = []
    for c, c2 in cps:
        C, C2 = np.flatnonzero(ids == c), np.flatnonzero(ids2 == c2)
        search = _SubRelations(M, M2, Ai, A2, side, side2, P, C, C2)
        subs.append(_Cached(search.covering(lambda: explored_now() < budget, tick)))

    def matchings(k, used, used2):
        if k == len(cps):
            yield []
            return
        c, c2 = cps[k]
        if c not in used and c2 not in used2 and subs[k].nonempty():
            for rest in matchings(k + 1, used | {c}, used2 | {c2}):
                yield [k] + rest
        if k > 0:
            yield from matchings(k + 1, used, used2)

    def combos(chosen):
        if not chosen:
            yield []
            return
        for cells in subs[chosen[0]]:
            for rest in combos(chosen[1:]):
                yield [cells] + rest

    for chosen in matchings(0, frozenset(), frozenset()):
        for combo in combos(chosen):
            if explored_now() >= budget:
                return BudgetExceeded(explored_now())
            mask = np.zeros_like(P)
            for cells in combo:
                for a, b in cells:
                    mask[a, b] = True
            res = attempt(mask)
            if res:
                res.explored = explored_now()
                return res
    if any(s.cut for s in subs) or explored_now() >= budget:
        return BudgetExceeded(explored_now())
    explored += count[0]
    return NotBisimilar(explored, "search space exhausted")


# ---------------------------------------------------------------- runs

def run_bisimilarity(M: ICGS, run: Run, M2: ICGS, run2: Run, A, R) -> bool:
    """Pointwise relatedness of two lassos of equal shape."""
    R = _as_relation(M, M2, A, R)
    if run.shape() != run2.shape():
        raise ModelError(f"run shapes differ: {run.shape()} vs {run2.shape()}")
    names = R.pair_names()
    return all((a, b) in names for a, b in zip(run.states, run2.states))


# ------------------------------------------------------ formula enumeration

PATH_KINDS = ("X", "F", "G", "U", "R")


class FormulaEnumerator:
    """A-formulas in size order, one representative per joint truth class.

    Two formulas are in the same class when they have the same truth set
    on every listed (model, semantics).  Truth of a compound formula only
    depends on the truth sets of its parts, so building sizes from class
    representatives reaches every class a full enumeration would.
    """

    def __init__(self, models: list, coalition, semantics=(Semantics.SUBJECTIVE,), atoms=None):
        self.models = models
        self.coalition = fm.canonical_agents(coalition)
        self.semantics = [Semantics.parse(s) for s in semantics]
        shared = set(models[0].atoms)
        for m in models[1:]:
            shared &= set(m.atoms)
        self.atoms = sorted(shared) if atoms is None else list(atoms)
        self.checkers = [Checker(m, s, packed=True, keep_witnesses=False)
                         for m in models for s in self.semantics]
        self.by_size = {}
        self.seen = set()
        self.syntactic = {}

    def _key(self, f):
        h = hashlib.blake2b(digest_size=16)
        for c in self.checkers:
            h.update(np.packbits(c.label(f)).tobytes())
        return h.digest()

    def _admit(self, f, out):
        key = self._key(f)
        if key not in self.seen:
            self.seen.add(key)
            out.append(f)
        else:
            for c in self.checkers:
                c.forget(f)

    def _candidates(self, n):
        reps = self.by_size
        if n == 1:
            for p in self.atoms:
                yield fm.Atom(p)
            return
        A = self.coalition
        for f in reps.get(n - 1, []):
            yield fm.Not(f)
            yield fm.Coalition(A, fm.X(f))
            yield fm.Coalition(A, fm.F(f))
            yield fm.Coalition(A, fm.G(f))
            for a in A:
                yield fm.K(a, f)
        for a in range(1, n - 1):
            b = n - 1 - a
            for f in reps.get(a, []):
                for g in reps.get(b, []):
                    if a < b or (a == b and fm.to_text(f) <= fm.to_text(g)):
                        yield fm.And(f, g)
                        yield fm.Or(f, g)
                    yield fm.Implies(f, g)
                    yield fm.Coalition(A, fm.U(f, g))
                    yield fm.Coalition(A, fm.R(f, g))

    def level(self, n: int) -> list:
        """Class representatives first reached at size n."""
        if n not in self.by_size:
            for k in range(1, n):
                self.level(k)
            out = []
            for f in self._candidates(n):
                self._admit(f, out)
            self.by_size[n] = out
        return self.by_size[n]

    def syntactic_count(self, n: int) -> int:
        """Number of A-formulas of size exactly n, with ∧ and ∨ taken up to commutativity."""
        if n in self.syntactic:
            return self.syntactic[n]
        if n == 1:
            val = len(self.atoms)
        else:
            S = self.syntactic_count
            unary = S(n - 1) * (1 + 3 + len(self.coalition))
            ordered = sum(S(a) * S(n - 1 - a) for a in range(1, n - 1))
            comm = 0
            for a in range(1, n - 1):
                b = n - 1 - a
                if a < b:
                    comm += S(a) * S(b)
                elif a == b:
                    comm += S(a) * (S(a) + 1) // 2
            val = unary + 3 * ordered + 2 * comm
        self.syntactic[n] = val
        return val

    def upto(self, n: int):
        for k in range(1, n + 1):
            for f in self.level(k):
                yield k, f


def find_distinguishing_formula(M: ICGS, q, M2: ICGS, q2, A, semantics=Semantics.SUBJECTIVE,
                                max_size: int = 5):
    """The first A-formula, in size order, true at exactly one of (M, q), (M', q'); else None."""
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    en = FormulaEnumerator([M, M2], A, (semantics,))
    c1, c2 = en.checkers
    qi, q2i = M.state_index(q), M2.state_index(q2)
    for _, f in en.upto(max_size):
        if c1.label(f)[qi] != c2.label(f)[q2i]:
            return f
    return None


@dataclass
class PreservationReport:
    formulas: int
    classes: int
    disagreements: list

    @property
    def ok(self) -> bool:
        return not self.disagreements


def check_preservation(M: ICGS, M2: ICGS, R: BisimRelation, max_size: int = 5,
                       semantics=(Semantics.SUBJECTIVE, Semantics.OBJECTIVE), atoms=None,
                       pairs=None) -> PreservationReport:
    """Do all A-formulas up to max_size agree on every related pair, per semantics?"""
    en = FormulaEnumerator([M, M2], R.coalition, semantics, atoms)
    p = R.pairs if pairs is None else pairs
    bad = []
    total = 0
    for size, f in en.upto(max_size):
        total += 1
        for k, sem in enumerate(en.semantics):
            c1, c2 = en.checkers[k], en.checkers[len(en.semantics) + k]
            diff = np.flatnonzero(c1.label(f)[p[:, 0]] != c2.label(f)[p[:, 1]])
            if len(diff):
                a, b = p[diff[0]]
                bad.append((fm.to_text(f), sem.value, M.states[a], M2.states[b]))
    syn = sum(en.syntactic_count(k) for k in range(1, max_size + 1))
    return PreservationReport(syn, total, bad)


# ---------------------------------------------------------- SAT reduction

def _literal_name(l: int) -> str:
    return f"x{l}" if l > 0 else f"nx{-l}"


def sat_reduction_model(cnf: list, skip: bool = False) -> ICGS:
    """The three-agent gadget for a CNF (clauses of signed 1-based variables).

    Agent 1 points at a literal of the clause (uniform per clause), agent 2
    picks truth values (uniform per variable), agent 3 cannot tell literal
    states apart.  With skip=True agent 1 also has `skip`, which always
    leads to the yes state.
    """
    if not cnf:
        raise ModelError("CNF has no clauses")
    clauses = []
    for c in cnf:
        lits = list(dict.fromkeys(int(l) for l in c))
        if not lits:
            raise ModelError("CNF contains an empty clause")
        if any(l == 0 for l in lits):
            raise ModelError("literal 0 is not a variable")
        clauses.append(lits)
    lit_states = [(ci, l) for ci, c in enumerate(clauses) for l in c]
    name = {(ci, l): f"q_C{ci + 1}_{_literal_name(l)}" for ci, l in lit_states}
    states = [{"id": name[x], "label": []} for x in lit_states]
    states += [{"id": "qT", "label": ["yes"]}, {"id": "qB", "label": []}]
    lit_actions = sorted({_literal_name(l) for _, l in lit_states})
    actions = lit_actions + ["T", "F", "idle"] + (["skip"] if skip else [])
    proto = {"1": {}, "2": {}, "3": {}}
    trans = []
    for ci, l in lit_states:
        s = name[(ci, l)]
        picks = [_literal_name(x) for x in clauses[ci]] + (["skip"] if skip else [])
        proto["1"][s], proto["2"][s], proto["3"][s] = picks, ["T", "F"], ["idle"]
        for a1 in picks:
            for a2 in ("T", "F"):
                good = a1 == "skip" or a1 != _literal_name(l) or (a2 == "T") == (l > 0)
                trans.append({"from": s, "joint": [a1, a2, "idle"], "to": "qT" if good else "qB"})
    for s in ("qT", "qB"):
        for ag in proto:
            proto[ag][s] = ["idle"]
        trans.append({"from": s, "joint": ["idle"] * 3, "to": s})
    by_var = {}
    for x in lit_states:
        by_var.setdefault(abs(x[1]), []).append(name[x])
    indist = {
        "1": [[name[(ci, l)] for l in c] for ci, c in enumerate(clauses) if len(c) > 1],
        "2": [v for v in by_var.values() if len(v) > 1],
        "3": [[name[x] for x in lit_states]] if len(lit_states) > 1 else [],
    }
    doc = {"agents": ["1", "2", "3"], "atoms": ["yes"], "actions": actions, "states": states,
           "initial": name[lit_states[0]], "protocol": proto, "transitions": trans, "indist": indist}
    return ICGS.from_dict(doc)


def sat_reduction_pair(cnf: list):
    """(M_Φ, M'_Φ, initial state name) for the bisimilarity form of the reduction."""
    M = sat_reduction_model(cnf)
    return M, sat_reduction_model(cnf, skip=True), M.states[M.initial]
