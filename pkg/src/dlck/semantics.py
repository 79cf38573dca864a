"""Kripke semantics used as an independent soundness oracle.

Two model families share one evaluator:

* :class:`MuddyModel`: worlds are muddiness bitvectors (bit ``i-1`` for
  child ``i``); child ``i`` cannot tell apart worlds that differ only in
  its own bit. ``[.]`` announces ``lambda 1``; ``[*]`` announces that no
  child knows whether it is muddy.
* :class:`RelationalModel`: arbitrary finite worlds, explicit relation
  matrices and valuation, used for random-model property checks.

Announcements are eliminative and ``[a] phi`` holds vacuously where the
announcement is false. Extensions are computed as boolean arrays over all
world indices, masked by the set of live worlds.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from dlck.core import (
    POINT,
    STAR,
    And,
    Bot,
    Box,
    C,
    E,
    Eps,
    EventSym,
    Formula,
    Group,
    Imp,
    K,
    Lam,
    Mu,
    Not,
    Or,
    Prop,
    Top,
    conj,
    def_E_expansion,
    mentions_event,
)
from dlck.kernel import ProofTree, Rule
from dlck.muddy import Scenario

MAX_CHILDREN = 16


class ModelBudgetError(ValueError):
    pass


class KripkeModel:
    """Common evaluator; subclasses supply atoms, knowledge and reachability."""

    n_worlds: int
    alive: np.ndarray
    history: tuple[EventSym, ...]

    def __init__(self) -> None:
        self._ext: dict[Formula, np.ndarray] = {}
        self._after: dict[EventSym, KripkeModel] = {}
        self._labels: dict[Group, np.ndarray] = {}

    # subclass hooks -------------------------------------------------------
    def atom_ext(self, atom: Formula) -> np.ndarray:
        raise NotImplementedError

    def know_ext(self, agent: int, ext: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def common_ext(self, group: Group, ext: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def announcement(self, event: EventSym) -> Formula:
        raise NotImplementedError

    def restrict(self, alive: np.ndarray, event: EventSym) -> KripkeModel:
        raise NotImplementedError

    # shared machinery -----------------------------------------------------
    @property
    def worlds(self) -> list[int]:
        return [int(w) for w in np.flatnonzero(self.alive)]

    def extension(self, phi: Formula) -> np.ndarray:
        """Boolean array over world indices; false outside live worlds."""
        got = self._ext.get(phi)
        if got is not None:
            return got
        out = self._compute(phi) & self.alive
        out.setflags(write=False)
        self._ext[phi] = out
        return out

    def _compute(self, phi: Formula) -> np.ndarray:
        ext = self.extension
        if isinstance(phi, Top):
            return self.alive.copy()
        if isinstance(phi, Bot):
            return np.zeros(self.n_worlds, dtype=bool)
        if isinstance(phi, Not):
            return ~ext(phi.body)
        if isinstance(phi, And):
            return ext(phi.left) & ext(phi.right)
        if isinstance(phi, Or):
            return ext(phi.left) | ext(phi.right)
        if isinstance(phi, Imp):
            return ~ext(phi.left) | ext(phi.right)
        if isinstance(phi, K):
            return self.know_ext(phi.agent, ext(phi.body))
        if isinstance(phi, E):
            body = ext(phi.body)
            out = self.alive.copy()
            for i in phi.group:
                out &= self.know_ext(i, body)
            return out
        if isinstance(phi, C):
            return self.common_ext(phi.group, ext(phi.body))
        if isinstance(phi, Box):
            said = ext(self.announcement(phi.event))
            inner = self.update(phi.event).extension(phi.body)
            return ~said | inner
        return self.atom_ext(phi)

    def update(self, event: EventSym) -> KripkeModel:
        got = self._after.get(event)
        if got is None:
            alive = self.alive & self.extension(self.announcement(event))
            got = self.restrict(alive, event)
            self._after[event] = got
        return got

    def after(self, events: Iterable[EventSym]) -> KripkeModel:
        model = self
        for ev in events:
            model = model.update(ev)
        return model

    def holds(self, world: int, phi: Formula) -> bool:
        if not (0 <= world < self.n_worlds) or not self.alive[world]:
            raise ValueError(f"world {world} is not in the model")
        return bool(self.extension(phi)[world])

    def valid(self, phi: Formula, points: np.ndarray | None = None) -> bool:
        return self.countermodel(phi, points) is None

    def countermodel(self, phi: Formula, points: np.ndarray | None = None) -> int | None:
        where = self.alive if points is None else (self.alive & points)
        bad = np.flatnonzero(where & ~self.extension(phi))
        return int(bad[0]) if bad.size else None

    def relation_pairs(self, agent: int) -> np.ndarray:
        """Dense relation matrix of ``agent`` restricted to live worlds."""
        out = np.zeros((self.n_worlds, self.n_worlds), dtype=bool)
        for w in self.worlds:
            single = np.zeros(self.n_worlds, dtype=bool)
            single[w] = True
            # v is related to w iff K_i(not v) fails at w
            out[:, w] = ~self.know_ext(agent, ~single) & self.alive
        return out


def _popcounts(n_bits: int) -> np.ndarray:
    idx = np.arange(1 << n_bits)
    counts = np.zeros(1 << n_bits, dtype=np.int64)
    for b in range(n_bits):
        counts += (idx >> b) & 1
    return counts


class MuddyModel(KripkeModel):
    def __init__(self, scenario: Scenario, alive: np.ndarray | None = None,
                 history: tuple[EventSym, ...] = (), actual: int | None = None):
        super().__init__()
        if scenario.children > MAX_CHILDREN:
            raise ModelBudgetError(
                f"{scenario.children} children exceed the model budget of {MAX_CHILDREN}")
        self.scenario = scenario
        self.n_children = scenario.children
        self.n_worlds = 1 << self.n_children
        if alive is None:
            alive = np.ones(self.n_worlds, dtype=bool)
        self.alive = np.array(alive, dtype=bool)
        self.alive.setflags(write=False)
        self.history = history
        self.actual = (1 << scenario.muddy) - 1 if actual is None else actual
        self._index = np.arange(self.n_worlds)
        self._count = _popcounts(self.n_children)
        group = scenario.group
        self._announce = {
            POINT: Lam(1),
            STAR: conj(Not(K(i, Mu(i))) for i in group),
        }

    @property
    def live(self) -> bool:
        return bool(self.alive[self.actual])

    def bits(self, world: int) -> str:
        return world_bits(world, self.n_children)

    def atom_ext(self, atom: Formula) -> np.ndarray:
        if isinstance(atom, Mu):
            if not 1 <= atom.child <= self.n_children:
                return np.zeros(self.n_worlds, dtype=bool)
            return ((self._index >> (atom.child - 1)) & 1).astype(bool)
        if isinstance(atom, Lam):
            return self._count >= atom.j
        if isinstance(atom, Eps):
            return self._count == atom.j
        if isinstance(atom, Prop):
            return np.zeros(self.n_worlds, dtype=bool)
        raise TypeError(f"cannot evaluate {atom!r}")

    def know_ext(self, agent: int, ext: np.ndarray) -> np.ndarray:
        if not 1 <= agent <= self.n_children:
            raise ValueError(f"agent {agent} is not a child of this model")
        flip = self._index ^ (1 << (agent - 1))
        return ext & (ext[flip] | ~self.alive[flip]) & self.alive

    def _components(self, group: Group) -> np.ndarray:
        got = self._labels.get(group)
        if got is None:
            rows, cols = [], []
            live = self._index[self.alive]
            for i in group:
                if not 1 <= i <= self.n_children:
                    raise ValueError(f"agent {i} is not a child of this model")
                other = live ^ (1 << (i - 1))
                keep = self.alive[other]
                rows.append(live[keep])
                cols.append(other[keep])
            r = np.concatenate(rows + [self._index])
            c = np.concatenate(cols + [self._index])
            graph = coo_matrix((np.ones(r.size, dtype=bool), (r, c)),
                               shape=(self.n_worlds, self.n_worlds))
            _, got = connected_components(graph, directed=False)
            self._labels[group] = got
        return got

    def common_ext(self, group: Group, ext: np.ndarray) -> np.ndarray:
        labels = self._components(group)
        good = np.ones(labels.max() + 1, dtype=bool)
        live = self.alive
        np.logical_and.at(good, labels[live], ext[live])
        return good[labels] & live

    def announcement(self, event: EventSym) -> Formula:
        try:
            return self._announce[event]
        except KeyError:
            raise ValueError(f"event {event.name!r} has no semantics in this model") from None

    def restrict(self, alive: np.ndarray, event: EventSym) -> MuddyModel:
        return MuddyModel(self.scenario, alive, self.history + (event,), self.actual)

    def scenario_points(self) -> np.ndarray:
        """Worlds with exactly ``m + 1`` muddy children."""
        return self._count == self.scenario.muddy


class RelationalModel(KripkeModel):
    """Explicit finite model: ``relations[i][w, v]`` means v is possible at w for i."""

    def __init__(self, relations: Mapping[int, np.ndarray], valuation: Mapping[Formula, np.ndarray],
                 announcements: Mapping[EventSym, Formula] | None = None,
                 alive: np.ndarray | None = None, history: tuple[EventSym, ...] = ()):
        super().__init__()
        mats = {i: np.array(r, dtype=bool) for i, r in relations.items()}
        sizes = {r.shape for r in mats.values()}
        if len(sizes) != 1:
            raise ValueError("relations must share one square shape")
        (shape,) = sizes
        if shape[0] != shape[1]:
            raise ValueError("relations must be square")
        self.n_worlds = shape[0]
        self.relations = mats
        self.valuation = {a: np.array(v, dtype=bool) for a, v in valuation.items()}
        self.announcements = dict(announcements or {})
        self.alive = np.ones(self.n_worlds, dtype=bool) if alive is None else np.array(alive, dtype=bool)
        self.alive.setflags(write=False)
        self.history = history

    def atom_ext(self, atom: Formula) -> np.ndarray:
        got = self.valuation.get(atom)
        return np.zeros(self.n_worlds, dtype=bool) if got is None else got.copy()

    def know_ext(self, agent: int, ext: np.ndarray) -> np.ndarray:
        rel = self.relations[agent] & self.alive[None, :]
        return ~(rel & ~ext[None, :]).any(axis=1) & self.alive

    def reach(self, group: Group) -> np.ndarray:
        """Worlds reachable in one or more steps along the group's relations."""
        got = self._labels.get(group)
        if got is None:
            step = np.zeros((self.n_worlds, self.n_worlds), dtype=bool)
            for i in group:
                step |= self.relations[i]
            step &= self.alive[None, :] & self.alive[:, None]
            got = step.copy()
            while True:
                nxt = got | ((got.astype(np.int64) @ step.astype(np.int64)) > 0)
                if (nxt == got).all():
                    break
                got = nxt
            self._labels[group] = got
        return got

    def common_ext(self, group: Group, ext: np.ndarray) -> np.ndarray:
        r = self.reach(group)
        return ~(r & ~ext[None, :]).any(axis=1) & self.alive

    def announcement(self, event: EventSym) -> Formula:
        try:
            return self.announcements[event]
        except KeyError:
            raise ValueError(f"event {event.name!r} has no semantics in this model") from None

    def restrict(self, alive: np.ndarray, event: EventSym) -> RelationalModel:
        return RelationalModel(self.relations, self.valuation, self.announcements, alive,
                               self.history + (event,))


def world_bits(world: int, n_children: int) -> str:
    """Bitstring with child 1 first, e.g. ``10`` = only child 1 muddy."""
    return "".join("1" if world >> k & 1 else "0" for k in range(n_children))


def world_from_bits(bits: str) -> int:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a world bitstring: {bits!r}")
    return sum(1 << k for k, ch in enumerate(bits) if ch == "1")


# -- functional interface ----------------------------------------------------

@lru_cache(maxsize=64)
def muddy_model(s: Scenario) -> MuddyModel:
    """Full ``2^(c+1)``-world model of ``s`` (shared, immutable)."""
    return MuddyModel(s)


def evaluate(model: KripkeModel, world: int, phi: Formula) -> bool:
    return model.holds(world, phi)


def update(model: KripkeModel, event: EventSym) -> KripkeModel:
    return model.update(event)


def valid(s: Scenario, phi: Formula) -> bool:
    return muddy_model(s).valid(phi)


def parse_history(text: str) -> tuple[EventSym, ...]:
    """``".,*,*"`` -> ``(POINT, STAR, STAR)``; blank means no events."""
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if part in (".", "¤"):
            out.append(POINT)
        elif part == "*":
            out.append(STAR)
        else:
            raise ValueError(f"unknown event {part!r} in history {text!r}")
    return tuple(out)


def history_text(history: Sequence[EventSym]) -> str:
    if not history:
        return "initial"
    return ",".join("." if ev == POINT else "*" if ev == STAR else ev.name for ev in history)


def is_equivalence(model: KripkeModel, agent: int) -> bool:
    r = model.relation_pairs(agent)
    live = model.alive
    sub = r[np.ix_(live, live)]
    if not sub.diagonal().all() or not (sub == sub.T).all():
        return False
    return not ((sub.astype(np.int64) @ sub.astype(np.int64) > 0) & ~sub).any()


# -- random generators -------------------------------------------------------

def random_formula(rng: random.Random, depth: int, atoms: Sequence[Formula],
                   agents: Sequence[int], events: Sequence[EventSym] = (),
                   max_group: int = 4) -> Formula:
    """Random formula of modal/boolean depth at most ``depth``."""
    if depth <= 0 or rng.random() < 0.2:
        return rng.choice(atoms)
    d = depth - 1
    kinds = ["not", "and", "or", "imp", "K", "E", "C"] + (["box"] * 2 if events else [])
    kind = rng.choice(kinds)
    sub = lambda: random_formula(rng, d, atoms, agents, events, max_group)
    if kind == "not":
        return Not(sub())
    if kind in ("and", "or", "imp"):
        return {"and": And, "or": Or, "imp": Imp}[kind](sub(), sub())
    if kind == "K":
        return K(rng.choice(agents), sub())
    if kind == "box":
        return Box(rng.choice(events), sub())
    size = rng.randint(1, min(max_group, len(agents)))
    g = Group.of(*rng.sample(list(agents), size))
    return E(g, sub()) if kind == "E" else C(g, sub())


def random_model(rng: random.Random, n_worlds: int, agents: Sequence[int],
                 atoms: Sequence[Formula], events: Sequence[EventSym] = (),
                 density: float = 0.3) -> RelationalModel:
    """Random reflexive model; each event announces a random boolean formula."""
    np_rng = np.random.default_rng(rng.getrandbits(64))
    relations = {}
    for i in agents:
        r = np_rng.random((n_worlds, n_worlds)) < density
        np.fill_diagonal(r, True)
        relations[i] = r
    valuation = {a: np_rng.random(n_worlds) < 0.5 for a in atoms}
    anns = {ev: _random_boolean(rng, atoms) for ev in events}
    return RelationalModel(relations, valuation, anns)


def _random_boolean(rng: random.Random, atoms: Sequence[Formula]) -> Formula:
    a, b = rng.choice(atoms), rng.choice(atoms)
    return rng.choice([Or(a, b), Or(a, Not(b)), Imp(a, b), Not(And(a, b))])


def def_e_agreement(model: KripkeModel, group: Group, phi: Formula) -> bool:
    """``E_G phi`` and its conjunction of ``K_i phi`` agree at every world."""
    return bool((model.extension(E(group, phi)) == model.extension(def_E_expansion(group, phi))).all())


def c_agreement(model: KripkeModel, group: Group, phi: Formula) -> bool:
    """``C_G phi`` agrees with the conjunction of ``E_G^n phi`` for ``n = 1..N``."""
    n = int(model.alive.sum())
    acc = model.alive.copy()
    layer = phi
    for _ in range(max(n, 1)):
        layer = E(group, layer)
        acc &= model.extension(layer)
    return bool((model.extension(C(group, phi)) == acc).all())


# -- muddy endpoint ----------------------------------------------------------

def endpoint(s: Scenario) -> dict:
    """Who knows their own state at the actual world after ``m`` and ``m - 1`` stars."""
    base = muddy_model(s).update(POINT)
    out: dict = {"children": s.children, "muddy": s.muddy, "actual": world_bits(base.actual, s.children)}
    for label, rounds in (("after_m", s.m), ("after_m_minus_1", s.m - 1)):
        if rounds < 0:
            out[label] = None
            continue
        model = base.after([STAR] * rounds)
        out[label] = {
            "live": model.live,
            "knows": {i: model.live and model.holds(model.actual, K(i, Mu(i)))
                      for i in range(1, s.muddy + 1)},
        }
    return out


# -- validation reports ------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    formula: str
    rule: str
    stage: str
    points: str
    verdict: str
    countermodel: str | None = None

    def to_dict(self) -> dict:
        d = {"formula": self.formula, "rule": self.rule, "stage": self.stage,
             "points": self.points, "verdict": self.verdict}
        if self.countermodel is not None:
            d["countermodel"] = self.countermodel
        return d


@dataclass
class Report:
    scenario: Scenario
    kind: str
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(f.verdict != "invalid" for f in self.findings)

    @property
    def failures(self) -> list[Finding]:
        return [f for f in self.findings if f.verdict == "invalid"]

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.findings:
            out[f.verdict] = out.get(f.verdict, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "children": self.scenario.children, "muddy": self.scenario.muddy,
                "ok": self.ok, "counts": self.counts(),
                "findings": [f.to_dict() for f in self.findings]}


_STAGE_ALL, _STAGE_SCENARIO = "all", "scenario"


def _check(s: Scenario, phi: Formula, rule: str, history: tuple[EventSym, ...],
           points: str) -> Finding:
    model = muddy_model(s).after(history)
    mask = model.scenario_points() if points == _STAGE_SCENARIO else None
    bad = model.countermodel(phi, mask)
    return Finding(str(phi), rule, history_text(history), points,
                   "valid" if bad is None else "invalid",
                   None if bad is None else world_bits(bad, s.children))


def axiom_stage(rule: Rule) -> tuple[tuple[EventSym, ...], str]:
    """Update history and point set at which an axiom instance is checked."""
    if rule.name == "MC1_1":
        return (POINT,), _STAGE_ALL
    if rule.name == "MC1_2":
        return (POINT,), _STAGE_SCENARIO
    if rule.name == "MC2":
        return (POINT,) + (STAR,) * (rule.params[0] - 1), _STAGE_ALL
    return (), _STAGE_ALL


def _excluded(rule: Rule, phi: Formula) -> Finding:
    return Finding(str(phi), str(rule), "-", "-", "excluded")


def validate_theory(s: Scenario, n_random: int = 200, seed: int = 0) -> Report:
    """Check every axiom instance used by the Concl proofs, plus random KT1 on star."""
    from dlck.muddy import prove_concl

    report = Report(s, "theory")
    # T_Box is unsound for eliminative announcements and never used by the proofs.
    report.findings.append(Finding("[a] phi -> phi", "T_Box", "-", "-", "excluded"))
    seen: set[tuple[Formula, str]] = set()
    for i in s.group:
        for node in prove_concl(s, i).proof.nodes():
            if node.premises or node.rule.name == "Classical":
                continue
            key = (node.conclusion, node.rule.name)
            if key in seen:
                continue
            seen.add(key)
            if node.rule.name == "T_Box":
                report.findings.append(_excluded(node.rule, node.conclusion))
                continue
            history, points = axiom_stage(node.rule)
            report.findings.append(_check(s, node.conclusion, str(node.rule), history, points))
    rng = random.Random(seed)
    atoms = muddy_atoms(s)
    agents = list(s.group)
    for _ in range(n_random):
        phi = random_formula(rng, 3, atoms, agents, (POINT, STAR))
        i = rng.choice(agents)
        inst = Imp(K(i, Box(STAR, phi)), Box(STAR, K(i, phi)))
        rule = Rule("KT1", (i, STAR, phi))
        report.findings.append(_check(s, inst, str(rule), (), _STAGE_ALL))
    return report


def muddy_atoms(s: Scenario) -> list[Formula]:
    n = s.children
    return ([Mu(i) for i in range(1, n + 1)] + [Lam(j) for j in range(n + 2)]
            + [Eps(j) for j in range(n + 1)])


def _dependencies(tree: ProofTree) -> dict[int, frozenset[str]]:
    deps: dict[int, frozenset[str]] = {}
    for node in tree.nodes():
        own = frozenset({node.rule.name}) if node.rule.name in ("MC1_1", "MC1_2") else frozenset()
        for p in node.premises:
            own |= deps[id(p)]
        deps[id(node)] = own
    return deps


def trace_stage(node: ProofTree, deps: frozenset[str]) -> tuple[tuple[EventSym, ...], str]:
    """Stage for a proof line: event-free lines and lines free of MC1 go to the full model."""
    if not mentions_event(node.conclusion) or not deps:
        return (), _STAGE_ALL
    if "MC1_2" in deps:
        return (POINT,), _STAGE_SCENARIO
    return (POINT,), _STAGE_ALL


def validate_judgment_trace(s: Scenario, tree: ProofTree) -> Report:
    """Check each distinct node conclusion of ``tree`` at its update stage."""
    report = Report(s, "trace")
    deps = _dependencies(tree)
    seen: set[tuple[Formula, tuple, str]] = set()
    for node in tree.nodes():
        if node.rule.name == "T_Box":
            report.findings.append(_excluded(node.rule, node.conclusion))
            continue
        history, points = trace_stage(node, deps[id(node)])
        key = (node.conclusion, history, points)
        if key in seen:
            continue
        seen.add(key)
        report.findings.append(_check(s, node.conclusion, node.rule.name, history, points))
    return report


__all__ = [
    "MAX_CHILDREN", "Finding", "KripkeModel", "ModelBudgetError", "MuddyModel", "RelationalModel",
    "Report", "axiom_stage", "c_agreement", "def_e_agreement", "endpoint", "evaluate",
    "history_text", "is_equivalence", "muddy_atoms", "muddy_model", "parse_history",
    "random_formula", "random_model", "trace_stage", "update", "valid", "validate_judgment_trace",
    "validate_theory", "world_bits", "world_from_bits",
]
