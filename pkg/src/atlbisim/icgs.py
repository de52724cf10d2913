"""Concurrent game structures with imperfect information.

A model is stored as flat numpy arrays: a boolean label matrix, one
protocol-set id per (agent, state), one block id per (agent, state) for
the indistinguishability partitions, and the transition relation as
sorted ``(src, joint, dst)`` edge arrays with an interned joint-action
table.  The public API speaks in state / agent / action names; the
``*_idx`` helpers work on integer indices and are what the checker uses.
"""
from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class ModelError(ValueError):
    """Raised for malformed models, unknown identifiers and bad queries."""


@dataclass(frozen=True)
class Issue:
    kind: str  # dangling | duplicate | protocol | partition | uniformity | seriality
    message: str
    details: tuple = ()

    def __str__(self):
        return f"[{self.kind}] {self.message}"


@dataclass
class Run:
    """A lasso-shaped run: states[0] a[0] states[1] ... states[-1] a[-1] states[loop].

    ``actions[j]`` labels the step out of ``states[j]``; the last action
    closes the cycle back to ``states[loop]``.
    """
    states: list
    actions: list
    loop: int = 0

    def __post_init__(self):
        if len(self.states) != len(self.actions):
            raise ModelError("a lasso needs one action per state")
        if not self.states or not 0 <= self.loop < len(self.states):
            raise ModelError("loop index out of range")

    def at(self, j: int):
        """State at position j of the infinite unfolding."""
        k = len(self.states)
        if j < k:
            return self.states[j]
        period = k - self.loop
        return self.states[self.loop + (j - self.loop) % period]

    def shape(self):
        return (len(self.states), self.loop)


def _canonical_blocks(labels: np.ndarray) -> np.ndarray:
    """Renumber block labels by first occurrence, so ids follow state order."""
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[inv].astype(np.int32)


class ICGS:
    """An iCGS over integer-indexed states.

    Use :meth:`from_dict` / :func:`load_model` for the JSON file format and
    :meth:`from_arrays` for generated models.
    """

    def __init__(self, agents, atoms, actions, states, labels, initial,
                 proto_sets, protocol, joint, src, jact, dst, blocks,
                 initial_states=None, problems=()):
        self.agents = list(agents)
        self.atoms = list(atoms)
        self.actions = list(actions)
        self.states = states
        self.labels = np.asarray(labels, dtype=bool).reshape(len(states), len(self.atoms))
        self.initial = int(initial)
        if initial_states is None:
            initial_states = [self.initial]
        self.initial_states = np.asarray(sorted(set(int(s) for s in initial_states)), dtype=np.int64)
        self.proto_sets = [tuple(p) for p in proto_sets]
        self.protocol = np.asarray(protocol, dtype=np.int32).reshape(len(self.agents), len(states))
        self.joint = np.asarray(joint, dtype=np.int32).reshape(-1, len(self.agents))
        self.blocks = np.vstack([_canonical_blocks(b) for b in np.asarray(blocks).reshape(len(self.agents), len(states))]) \
            if len(self.agents) else np.zeros((0, len(states)), dtype=np.int32)
        self.problems = list(problems)

        src = np.asarray(src, dtype=np.int64)
        jact = np.asarray(jact, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        n = len(states)
        if len(src):
            key = (src * max(len(self.joint), 1) + jact) * n + dst
            key, idx = np.unique(key, return_index=True)
            src, jact, dst = src[idx], jact[idx], dst[idx]
        self.src = src.astype(np.int32)
        self.jact = jact.astype(np.int32)
        self.dst = dst.astype(np.int32)
        self.indptr = np.searchsorted(self.src, np.arange(n + 1)).astype(np.int64)

        self._state_index = None
        self._agent_index = {a: i for i, a in enumerate(self.agents)}
        self._atom_index = {p: i for i, p in enumerate(self.atoms)}
        self._action_index = {a: i for i, a in enumerate(self.actions)}
        self._cache = {}

    # ------------------------------------------------------------------ sizes
    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def __repr__(self):
        return (f"ICGS(agents={self.agents}, states={self.n_states}, "
                f"edges={self.n_edges}, atoms={len(self.atoms)})")

    # ------------------------------------------------------------ name lookup
    def state_index(self, name) -> int:
        if self._state_index is None:
            self._state_index = {s: i for i, s in enumerate(self.states)}
        try:
            return self._state_index[name]
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None

    def agent_index(self, name) -> int:
        try:
            return self._agent_index[name]
        except KeyError:
            raise ModelError(f"unknown agent {name!r}") from None

    def atom_index(self, name) -> int:
        try:
            return self._atom_index[name]
        except KeyError:
            raise ModelError(f"unknown atom {name!r}") from None

    def action_index(self, name) -> int:
        try:
            return self._action_index[name]
        except KeyError:
            raise ModelError(f"unknown action {name!r}") from None

    def coalition(self, agents: Iterable) -> tuple:
        """Canonical coalition: sorted tuple of agent indices."""
        return tuple(sorted({self.agent_index(a) for a in agents}))

    def coalition_names(self, A: tuple) -> tuple:
        return tuple(self.agents[i] for i in A)

    def names(self, idx: Iterable[int]) -> list:
        return [self.states[int(i)] for i in idx]

    # ------------------------------------------------------ per-state queries
    def label_set(self, s) -> frozenset:
        i = self.state_index(s)
        return frozenset(self.atoms[k] for k in np.flatnonzero(self.labels[i]))

    def protocol_idx(self, agent: int, s: int) -> tuple:
        return self.proto_sets[self.protocol[agent, s]]

    def protocol_of(self, agent, s) -> tuple:
        i = self.state_index(s)
        return tuple(self.actions[a] for a in self.protocol_idx(self.agent_index(agent), i))

    def enabled_joint_idx(self, s: int) -> list:
        sets = [self.proto_sets[self.protocol[k, s]] for k in range(len(self.agents))]
        return list(itertools.product(*sets))

    def enabled_joint_actions(self, s) -> list:
        i = self.state_index(s)
        return [tuple(self.actions[a] for a in ja) for ja in self.enabled_joint_idx(i)]

    def out_edges(self, s: int) -> slice:
        return slice(self.indptr[s], self.indptr[s + 1])

    def successors_idx(self, s: int, joint: Sequence[int]) -> list:
        sl = self.out_edges(s)
        rows = self.joint[self.jact[sl]]
        hit = np.all(rows == np.asarray(joint, dtype=np.int32), axis=1)
        return sorted(set(self.dst[sl][hit].tolist()))

    def successors(self, s, joint: Sequence) -> list:
        i = self.state_index(s)
        if len(joint) != len(self.agents):
            raise ModelError("joint action must name one action per agent")
        ja = tuple(self.action_index(a) for a in joint)
        for k, a in enumerate(ja):
            if a not in self.proto_sets[self.protocol[k, i]]:
                raise ModelError(f"joint action {tuple(joint)} is not enabled at {s!r}")
        return self.names(self.successors_idx(i, ja))

    # --------------------------------------------------------- neighbourhoods
    def block_members(self, agent: int, block: int) -> np.ndarray:
        key = ("members", agent)
        if key not in self._cache:
            order = np.argsort(self.blocks[agent], kind="stable")
            counts = np.bincount(self.blocks[agent])
            self._cache[key] = (order, np.concatenate([[0], np.cumsum(counts)]))
        order, ptr = self._cache[key]
        return order[ptr[block]:ptr[block + 1]]

    def n_blocks(self, agent: int) -> int:
        return int(self.blocks[agent].max()) + 1 if self.n_states else 0

    def ekn_idx(self, A: tuple, q: int) -> np.ndarray:
        if not A:
            return np.array([q])
        parts = [self.block_members(i, self.blocks[i, q]) for i in A]
        return np.unique(np.concatenate(parts))

    def ckn_ids(self, A: tuple) -> np.ndarray:
        """Component id per state of the transitive closure of the union of ∼_i, i ∈ A."""
        key = ("ckn", A)
        if key not in self._cache:
            n = self.n_states
            if not A:
                ids = np.arange(n, dtype=np.int32)
            else:
                rows, cols = [], []
                offset = n
                for i in A:
                    rows.append(np.arange(n))
                    cols.append(self.blocks[i] + offset)
                    offset += self.n_blocks(i)
                r = np.concatenate(rows)
                c = np.concatenate(cols)
                g = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(offset, offset))
                _, lab = connected_components(g, directed=False)
                ids = _canonical_blocks(lab[:n])
            self._cache[key] = ids
        return self._cache[key]

    def ckn_idx(self, A: tuple, q: int) -> np.ndarray:
        ids = self.ckn_ids(A)
        return np.flatnonzero(ids == ids[q])

    def ekn(self, A: Iterable, q) -> frozenset:
        return frozenset(self.names(self.ekn_idx(self.coalition(A), self.state_index(q))))

    def ckn(self, A: Iterable, q) -> frozenset:
        return frozenset(self.names(self.ckn_idx(self.coalition(A), self.state_index(q))))

    # ------------------------------------------------------------ reachability
    def reachable_mask(self) -> np.ndarray:
        seen = np.zeros(self.n_states, dtype=bool)
        frontier = np.unique(self.initial_states)
        seen[frontier] = True
        while len(frontier):
            starts, ends = self.indptr[frontier], self.indptr[frontier + 1]
            lens = ends - starts
            idx = np.repeat(starts - np.cumsum(np.concatenate([[0], lens[:-1]])), lens) + np.arange(lens.sum())
            nxt = np.unique(self.dst[idx])
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            frontier = nxt
        return seen

    def reachable(self):
        mask = self.reachable_mask()
        return frozenset(self.names(np.flatnonzero(mask))), int(mask.sum())

    # --------------------------------------------------------- coalition views
    def coalition_actions(self, A: tuple):
        """Intern the restriction of each edge's joint action to A.

        Returns (table, edge_ids): ``table[k]`` is a tuple of action indices
        (one per member of A) and ``edge_ids[e]`` indexes into it.
        """
        key = ("cact", A)
        if key not in self._cache:
            if not A or not len(self.joint):
                table = [()]
                eid = np.zeros(self.n_edges, dtype=np.int32)
            else:
                sub = self.joint[:, list(A)]
                uniq, jinv = np.unique(sub, axis=0, return_inverse=True)
                table = [tuple(int(x) for x in row) for row in uniq]
                eid = jinv.reshape(-1)[self.jact].astype(np.int32)
            self._cache[key] = (table, {t: k for k, t in enumerate(table)}, eid)
        table, _, eid = self._cache[key]
        return table, eid

    def coalition_action_id(self, A: tuple, alpha: tuple) -> int:
        self.coalition_actions(A)
        return self._cache[("cact", A)][1].get(tuple(alpha), -1)

    def choice_mask(self, A: tuple) -> np.ndarray:
        """States where some member of A has at least two enabled actions."""
        sizes = np.array([len(p) for p in self.proto_sets])
        mask = np.zeros(self.n_states, dtype=bool)
        for i in A:
            mask |= sizes[self.protocol[i]] >= 2
        return mask

    def predecessor_matrix(self):
        """Sparse matrix with row = target, column = source, value = edge count."""
        key = "predmat"
        if key not in self._cache:
            n = self.n_states
            self._cache[key] = coo_matrix((np.ones(len(self.src), dtype=np.int64),
                                           (self.dst, self.src)), shape=(n, n)).tocsr()
        return self._cache[key]

    # ---------------------------------------------------------- serialisation
    @classmethod
    def from_arrays(cls, agents, atoms, actions, states, labels, initial, protocol_sets,
                    protocol, joint, src, jact, dst, blocks, initial_states=None):
        """Build from pre-indexed arrays (used by generators)."""
        return cls(agents, atoms, actions, states, labels, initial, protocol_sets, protocol,
                   joint, src, jact, dst, blocks, initial_states=initial_states)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ICGS":
        """Parse the JSON document form.

        Dangling identifiers do not raise; they are dropped and recorded in
        ``model.problems`` so that :func:`validate` can report them.
        """
        problems = []
        try:
            agents = [str(a) for a in data["agents"]]
            atoms = [str(p) for p in data.get("atoms", [])]
            actions = [str(a) for a in data["actions"]]
            state_entries = data["states"]
        except (KeyError, TypeError) as exc:
            raise ModelError(f"model document is missing a required key: {exc}") from None
        for kind, seq in (("agents", agents), ("atoms", atoms), ("actions", actions)):
            dup = sorted(x for x, k in Counter(seq).items() if k > 1)
            if dup:
                problems.append(Issue("duplicate", f"duplicate {kind}: {dup}", tuple(dup)))
        states, label_lists = [], []
        for e in state_entries:
            if isinstance(e, str):
                states.append(e)
                label_lists.append([])
            else:
                states.append(str(e["id"]))
                label_lists.append(list(e.get("label", [])))
        dup = sorted(s for s, k in Counter(states).items() if k > 1)
        if dup:
            problems.append(Issue("duplicate", f"duplicate states: {dup}", tuple(dup)))
        if not states:
            raise ModelError("model has no states")
        sidx = {s: i for i, s in enumerate(states)}
        aidx = {a: i for i, a in enumerate(actions)}
        pidx = {p: i for i, p in enumerate(atoms)}
        gidx = {g: i for i, g in enumerate(agents)}
        n = len(states)

        labels = np.zeros((n, len(atoms)), dtype=bool)
        for i, labs in enumerate(label_lists):
            for p in labs:
                if p in pidx:
                    labels[i, pidx[p]] = True
                else:
                    problems.append(Issue("dangling", f"state {states[i]!r} is labelled with unknown atom {p!r}",
                                          (states[i], p)))

        def state_ref(name, where):
            if name in sidx:
                return sidx[name]
            problems.append(Issue("dangling", f"{where} refers to unknown state {name!r}", (name,)))
            return None

        init_name = data.get("initial")
        initial = state_ref(init_name, "initial") if init_name is not None else None
        if initial is None:
            if init_name is None:
                problems.append(Issue("dangling", "no initial state declared"))
            initial = 0
        initial_states = None
        if "initial_states" in data:
            initial_states = [i for i in (state_ref(s, "initial_states") for s in data["initial_states"])
                              if i is not None]
            if initial not in initial_states:
                initial_states.append(initial)

        proto_sets, proto_ids = [], {}

        def intern(acts):
            key = tuple(sorted(set(acts)))
            if key not in proto_ids:
                proto_ids[key] = len(proto_sets)
                proto_sets.append(key)
            return proto_ids[key]

        empty = intern(())
        protocol = np.full((len(agents), n), empty, dtype=np.int32)
        for ag, per_state in dict(data.get("protocol", {})).items():
            if ag not in gidx:
                problems.append(Issue("dangling", f"protocol names unknown agent {ag!r}", (ag,)))
                continue
            for s, acts in dict(per_state).items():
                i = state_ref(s, f"protocol of agent {ag!r}")
                if i is None:
                    continue
                good = []
                for a in acts:
                    if a in aidx:
                        good.append(aidx[a])
                    else:
                        problems.append(Issue("dangling", f"protocol of agent {ag!r} at {s!r} uses unknown action {a!r}",
                                              (ag, s, a)))
                protocol[gidx[ag], i] = intern(good)

        joints, joint_ids = [], {}
        src, jact, dst = [], [], []
        for t in data.get("transitions", []):
            a = state_ref(t.get("from"), "transition")
            b = state_ref(t.get("to"), "transition")
            ja = list(t.get("joint", []))
            if len(ja) != len(agents):
                problems.append(Issue("dangling", f"transition {t.get('from')}->{t.get('to')} has a joint action "
                                                  f"of length {len(ja)} for {len(agents)} agents", (t.get("from"),)))
                continue
            bad = [x for x in ja if x not in aidx]
            if bad:
                problems.append(Issue("dangling", f"transition {t.get('from')}->{t.get('to')} uses unknown actions {bad}",
                                      tuple(bad)))
                continue
            if a is None or b is None:
                continue
            key = tuple(aidx[x] for x in ja)
            if key not in joint_ids:
                joint_ids[key] = len(joints)
                joints.append(key)
            src.append(a)
            jact.append(joint_ids[key])
            dst.append(b)

        blocks = np.tile(np.arange(n, dtype=np.int64), (len(agents), 1))
        for ag, parts in dict(data.get("indist", {})).items():
            if ag not in gidx:
                problems.append(Issue("dangling", f"indist names unknown agent {ag!r}", (ag,)))
                continue
            k = gidx[ag]
            owner = {}
            for bno, part in enumerate(parts):
                for s in part:
                    i = state_ref(s, f"indist of agent {ag!r}")
                    if i is None:
                        continue
                    if i in owner:
                        problems.append(Issue("partition", f"state {s!r} appears in more than one block of agent {ag!r}",
                                              (ag, s)))
                        continue
                    owner[i] = bno
                    blocks[k, i] = n + bno
        joint_arr = np.array(joints, dtype=np.int32).reshape(-1, len(agents))
        return cls(agents, atoms, actions, states, labels, initial, proto_sets, protocol, joint_arr,
                   src, jact, dst, blocks, initial_states=initial_states, problems=problems)

    def to_dict(self) -> dict:
        """Inverse of :meth:`from_dict` (singleton blocks omitted)."""
        names = list(self.states)
        doc = {
            "agents": list(self.agents),
            "atoms": list(self.atoms),
            "actions": list(self.actions),
            "states": [{"id": names[i], "label": [self.atoms[k] for k in np.flatnonzero(self.labels[i])]}
                       for i in range(self.n_states)],
            "initial": names[self.initial],
        }
        if len(self.initial_states) != 1 or self.initial_states[0] != self.initial:
            doc["initial_states"] = [names[i] for i in self.initial_states]
        doc["protocol"] = {
            ag: {names[i]: [self.actions[a] for a in self.proto_sets[self.protocol[k, i]]]
                 for i in range(self.n_states)}
            for k, ag in enumerate(self.agents)
        }
        doc["transitions"] = [
            {"from": names[s], "joint": [self.actions[a] for a in self.joint[j]], "to": names[d]}
            for s, j, d in zip(self.src.tolist(), self.jact.tolist(), self.dst.tolist())
        ]
        indist = {}
        for k, ag in enumerate(self.agents):
            parts = []
            for b in range(self.n_blocks(k)):
                mem = self.block_members(k, b)
                if len(mem) > 1:
                    parts.append([names[i] for i in sorted(mem)])
            indist[ag] = parts
        doc["indist"] = indist
        return doc

    def to_json(self, indent=1) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)

    def restrict_edges(self, keep: np.ndarray) -> "ICGS":
        """Same model with only the edges where ``keep`` is true."""
        return ICGS(self.agents, self.atoms, self.actions, self.states, self.labels, self.initial,
                    self.proto_sets, self.protocol, self.joint, self.src[keep], self.jact[keep],
                    self.dst[keep], self.blocks, initial_states=self.initial_states)


# ---------------------------------------------------------------- functions

def load_model(path) -> ICGS:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON: {exc}") from None
    return ICGS.from_dict(data)


def save_model(model: ICGS, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model.to_json())
        fh.write("\n")


def validate(model: ICGS) -> list:
    """Every invariant violation of the model; an empty list means valid."""
    issues = list(model.problems)
    n = model.n_states
    sizes = np.array([len(p) for p in model.proto_sets])
    for k, ag in enumerate(model.agents):
        empty = np.flatnonzero(sizes[model.protocol[k]] == 0)
        if len(empty):
            issues.append(Issue("protocol", f"agent {ag!r} has no available action at "
                                            f"{model.names(empty[:10])}", (ag, tuple(model.names(empty)))))
        # uniformity: every block member has the protocol of the block's first member
        blk = model.blocks[k]
        first = np.zeros(model.n_blocks(k), dtype=np.int64)
        first[blk[::-1]] = np.arange(n)[::-1]
        bad = np.flatnonzero(model.protocol[k] != model.protocol[k][first[blk]])
        for b in np.unique(blk[bad]):
            mem = model.block_members(k, b)
            acts = sorted({tuple(model.actions[a] for a in model.proto_sets[model.protocol[k, i]]) for i in mem})
            issues.append(Issue("uniformity", f"agent {ag!r} has differing protocols on block "
                                              f"{model.names(mem)}: {acts}",
                                (ag, tuple(model.names(mem)))))
    n_agents = len(model.agents)
    ok = np.ones(model.n_edges, dtype=bool)
    if n_agents and model.n_edges:
        pm = np.zeros((len(model.proto_sets), max(len(model.actions), 1)), dtype=bool)
        for p, acts in enumerate(model.proto_sets):
            pm[p, list(acts)] = True
        for k in range(n_agents):
            ok &= pm[model.protocol[k, model.src], model.joint[model.jact, k]]
        for e in np.flatnonzero(~ok)[:50]:
            s, j = model.src[e], model.jact[e]
            issues.append(Issue("seriality", f"transition from {model.states[s]!r} uses disabled joint action "
                                             f"{tuple(model.actions[a] for a in model.joint[j])}",
                                (model.states[s],)))
    # every enabled joint action needs a successor
    expected = np.ones(n, dtype=np.int64)
    for k in range(n_agents):
        expected *= sizes[model.protocol[k]]
    nj = max(len(model.joint), 1)
    key = model.src.astype(np.int64)[ok] * nj + model.jact[ok]
    have = np.bincount(np.unique(key) // nj, minlength=n) if len(key) else np.zeros(n, dtype=np.int64)
    for s in np.flatnonzero((have < expected) & (expected > 0))[:50]:
        sl = model.out_edges(s)
        present = {tuple(int(a) for a in model.joint[j]) for j in model.jact[sl]}
        missing = [tuple(model.actions[a] for a in ja) for ja in model.enabled_joint_idx(s)
                   if ja not in present]
        issues.append(Issue("seriality", f"state {model.states[s]!r} has enabled joint actions without "
                                         f"successors: {missing[:5]}", (model.states[s],)))
    return issues


def enabled_joint_actions(model: ICGS, s) -> list:
    return model.enabled_joint_actions(s)


def successors(model: ICGS, s, joint) -> list:
    return model.successors(s, joint)


def ekn(model: ICGS, A, q) -> frozenset:
    return model.ekn(A, q)


def ckn(model: ICGS, A, q) -> frozenset:
    return model.ckn(A, q)


def reachable(model: ICGS):
    return model.reachable()


def validate_run(model: ICGS, run: Run) -> bool:
    """True iff every consecutive step of the lasso is a transition of the model."""
    k = len(run.states)
    for j in range(k):
        nxt = run.states[j + 1] if j + 1 < k else run.states[run.loop]
        try:
            if nxt not in model.successors(run.states[j], run.actions[j]):
                return False
        except ModelError:
            return False
    return True
