"""Trusted proof kernel.

Only the functions in this module can mint a :class:`Judgment`. Every other
part of the package, including the proof combinators and the muddy-children
generators, builds judgments by calling :func:`axiom`, :func:`classical`,
:func:`mp`, :func:`gen` and :func:`gfp_c`, or by replaying a stored
:class:`ProofTree` through :func:`check_tree`.
"""

from __future__ import annotations

import weakref
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from dlck.core import (
    And,
    Bot,
    Box,
    C,
    E,
    EventKind,
    EventSym,
    Formula,
    Group,
    Imp,
    K,
    Not,
    Or,
    Prop,
    Top,
    boolean_skeleton,
    def_E_expansion,
    imps,
)

DEFAULT_BUDGET = 24


class KernelError(Exception):
    """Base class for every rejection raised by the kernel."""


class RuleMismatch(KernelError):
    pass


class NotTautology(KernelError):
    pass


class BudgetError(KernelError):
    pass


class EventKindError(KernelError):
    pass


class AdmissionError(KernelError):
    pass


class UnknownRule(KernelError):
    pass


class CheckError(KernelError):
    """A proof tree node failed to re-check.

    ``path`` lists premise indices from the root down to the failing node.
    """

    def __init__(self, path: tuple[int, ...], node: ProofTree, reason: str,
                 expected: Formula | None = None):
        self.path = path
        self.node = node
        self.reason = reason
        self.expected = expected
        self.stored = node.conclusion if isinstance(node, ProofTree) else None
        where = "/".join(map(str, path)) or "root"
        if isinstance(node, ProofTree):
            rule = getattr(node.rule, "name", repr(node.rule))
        else:
            rule = type(node).__name__
        msg = f"step {where} ({rule}): {reason}"
        if expected is not None:
            msg += f"\n  expected: {expected}\n  stored:   {self.stored}"
        super().__init__(msg)


# Parameter kinds: formula, agent, group, event, nat.
SIGNATURES: dict[str, tuple[str, ...]] = {
    "Classical": ("formula",),
    "MP": (),
    "K_K": ("agent", "formula", "formula"),
    "T_K": ("agent", "formula"),
    "Gen_K": ("agent",),
    "Def_E_fwd": ("group", "formula"),
    "Def_E_bwd": ("group", "formula"),
    "FixPoint_C": ("group", "formula"),
    "GFP_C": ("group", "formula", "formula"),
    "K_Box": ("event", "formula", "formula"),
    "T_Box": ("event", "formula"),
    "Gen_Box": ("event",),
    "KT1": ("agent", "event", "formula"),
}

ARITY: dict[str, int] = {name: 0 for name in SIGNATURES}
ARITY.update({"MP": 2, "Gen_K": 1, "Gen_Box": 1, "GFP_C": 1})

BUILTIN = frozenset(SIGNATURES)


@dataclass(frozen=True)
class Rule:
    """A rule name with its instance parameters.

    Names outside :data:`BUILTIN` denote theory axiom schemas.
    """

    name: str
    params: tuple = ()

    @property
    def is_theory_axiom(self) -> bool:
        return self.name not in BUILTIN

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}[{'; '.join(map(str, self.params))}]"


@dataclass(frozen=True, eq=False)
class ProofTree:
    """A rule application. ``label`` and ``lemma`` are audit metadata only."""

    rule: Rule
    premises: tuple[ProofTree, ...]
    conclusion: Formula
    label: str | None = field(default=None, compare=False)
    lemma: str | None = field(default=None, compare=False)

    def nodes(self) -> list[ProofTree]:
        """Distinct nodes in post-order (premises first, left to right)."""
        seen: set[int] = set()
        out: list[ProofTree] = []
        stack: list[tuple[ProofTree, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                out.append(node)
                continue
            stack.append((node, True))
            for p in reversed(node.premises):
                if id(p) not in seen:
                    stack.append((p, False))
        return out

    def dag_size(self) -> int:
        return len(self.nodes())

    def tree_size(self) -> int:
        """Node count with shared subproofs counted once per use."""
        sizes: dict[int, int] = {}
        for node in self.nodes():
            sizes[id(node)] = 1 + sum(sizes[id(p)] for p in node.premises)
        return sizes[id(self)]


@dataclass(frozen=True)
class Schema:
    """A theory axiom schema.

    ``admit`` returns ``None`` to accept an instance or a reason to refuse it.
    """

    name: str
    params: tuple[str, ...]
    build: Callable[..., Formula]
    admit: Callable[..., str | None] = lambda *args: None
    doc: str = ""


@dataclass(frozen=True)
class Theory:
    name: str
    events: tuple[EventSym, ...] = ()
    schemas: Mapping[str, Schema] = field(default_factory=dict)
    parameters: Mapping[str, int] = field(default_factory=dict)

    def instance(self, name: str, params: tuple) -> Formula:
        schema = self.schemas.get(name)
        if schema is None:
            raise UnknownRule(f"theory {self.name!r} has no axiom {name!r}")
        if len(params) != len(schema.params):
            raise AdmissionError(
                f"{name} takes {len(schema.params)} parameters, got {len(params)}")
        for kind, value in zip(schema.params, params):
            _check_param(kind, value)
        reason = schema.admit(*params)
        if reason is not None:
            raise AdmissionError(f"{name}{list(params)} refused: {reason}")
        return schema.build(*params)


EMPTY_THEORY = Theory("empty")


class Judgment:
    """``|- formula``, carrying the proof tree that justified it."""

    __slots__ = ("__weakref__", "formula", "proof")

    formula: Formula
    proof: ProofTree

    def __init__(self, *args, **kwargs):
        raise TypeError("judgments can only be produced by kernel rules")

    def __setattr__(self, name, value):
        raise AttributeError("judgments are immutable")

    def __delattr__(self, name):
        raise AttributeError("judgments are immutable")

    def __reduce__(self):
        raise TypeError("judgments cannot be serialized; save the proof tree instead")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __repr__(self) -> str:
        return f"|- {getattr(self, 'formula', '<unset>')}"


_minted: weakref.WeakSet[Judgment] = weakref.WeakSet()


def _mint(tree: ProofTree) -> Judgment:
    j = object.__new__(Judgment)
    object.__setattr__(j, "formula", tree.conclusion)
    object.__setattr__(j, "proof", tree)
    _minted.add(j)
    return j


def is_minted(j: object) -> bool:
    return isinstance(j, Judgment) and j in _minted


def _require(j: object, what: str = "premise") -> Judgment:
    if not is_minted(j):
        raise RuleMismatch(f"{what} is not a kernel-minted judgment: {j!r}")
    return j  # type: ignore[return-value]


def _check_param(kind: str, value: object) -> None:
    ok = {
        "formula": lambda v: isinstance(v, Formula),
        "agent": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
        "nat": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
        "group": lambda v: isinstance(v, Group),
        "event": lambda v: isinstance(v, EventSym),
    }[kind](value)
    if not ok:
        raise RuleMismatch(f"expected {kind} parameter, got {value!r}")


def _axiom_formula(rule: Rule, theory: Theory | None) -> Formula:
    name, ps = rule.name, rule.params
    if rule.is_theory_axiom:
        if theory is None:
            raise UnknownRule(f"{name} is not a kernel rule and no theory was given")
        return theory.instance(name, ps)
    sig = SIGNATURES[name]
    if ARITY[name] != 0:
        raise RuleMismatch(f"{name} is not an axiom")
    if len(ps) != len(sig):
        raise RuleMismatch(f"{name} takes {len(sig)} parameters, got {len(ps)}")
    for kind, value in zip(sig, ps):
        _check_param(kind, value)
    if name == "K_K":
        i, phi, psi = ps
        return imps(K(i, phi), K(i, Imp(phi, psi)), K(i, psi))
    if name == "T_K":
        i, phi = ps
        return Imp(K(i, phi), phi)
    if name == "Def_E_fwd":
        g, phi = ps
        return Imp(E(g, phi), def_E_expansion(g, phi))
    if name == "Def_E_bwd":
        g, phi = ps
        return Imp(def_E_expansion(g, phi), E(g, phi))
    if name == "FixPoint_C":
        g, phi = ps
        return Imp(C(g, phi), And(phi, E(g, C(g, phi))))
    if name == "K_Box":
        a, phi, psi = ps
        return imps(Box(a, phi), Box(a, Imp(phi, psi)), Box(a, psi))
    if name == "T_Box":
        a, phi = ps
        return Imp(Box(a, phi), phi)
    if name == "KT1":
        i, a, phi = ps
        if a.kind is not EventKind.EPISTEMIC:
            raise EventKindError(f"KT1 needs a purely epistemic event, {a.name!r} is {a.kind.value}")
        return Imp(K(i, Box(a, phi)), Box(a, K(i, phi)))
    raise RuleMismatch(f"{name} is not an axiom")  # pragma: no cover


def axiom(rule: Rule, theory: Theory | None = None) -> Judgment:
    """Mint an instance of a premise-free rule or of a theory axiom schema."""
    if not isinstance(rule, Rule):
        raise RuleMismatch(f"not a rule: {rule!r}")
    if rule.name == "Classical":
        (phi,) = rule.params
        return classical(phi)
    return _mint(ProofTree(rule, (), _axiom_formula(rule, theory)))


def _truth_tables(n: int) -> tuple[int, list[int]]:
    rows = 1 << n
    full = (1 << rows) - 1
    columns = []
    for k in range(n):
        block = 1 << k
        col = ((1 << block) - 1) << block
        width = 2 * block
        while width < rows:
            col |= col << width
            width *= 2
        columns.append(col & full)
    return full, columns


def is_tautology(phi: Formula, budget: int = DEFAULT_BUDGET) -> bool:
    """Decide whether the boolean skeleton of ``phi`` is a tautology.

    All valuations are evaluated at once: each placeholder is a bitmask whose
    bit ``v`` is its value under valuation ``v``.
    """
    skeleton, binding = boolean_skeleton(phi)
    n = len(binding)
    if n > budget:
        raise BudgetError(f"{n} distinct placeholders exceed the budget of {budget}")
    full, columns = _truth_tables(n)
    value = {p: columns[int(p.name[1:])] for p in binding}
    memo: dict[int, int] = {}

    def ev(f: Formula) -> int:
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, Top):
            r = full
        elif isinstance(f, Bot):
            r = 0
        elif isinstance(f, Prop):
            r = value[f]
        elif isinstance(f, Not):
            r = full ^ ev(f.body)
        elif isinstance(f, And):
            r = ev(f.left) & ev(f.right)
        elif isinstance(f, Or):
            r = ev(f.left) | ev(f.right)
        elif isinstance(f, Imp):
            r = (full ^ ev(f.left)) | ev(f.right)
        else:  # pragma: no cover
            raise TypeError(f)
        memo[key] = r
        return r

    return ev(skeleton) == full


def classical(phi: Formula, budget: int = DEFAULT_BUDGET) -> Judgment:
    """Mint ``|- phi`` when ``phi`` is a propositional tautology over its modal atoms."""
    if not isinstance(phi, Formula):
        raise RuleMismatch(f"not a formula: {phi!r}")
    if not is_tautology(phi, budget):
        raise NotTautology(f"not a tautology: {phi}")
    return _mint(ProofTree(Rule("Classical", (phi,)), (), phi))


def mp(major: Judgment, minor: Judgment) -> Judgment:
    """From ``|- a -> b`` and ``|- a`` conclude ``|- b``."""
    _require(major, "major premise")
    _require(minor, "minor premise")
    f = major.formula
    if not isinstance(f, Imp):
        raise RuleMismatch(f"MP major premise is not an implication: {f}")
    if f.left != minor.formula:
        raise RuleMismatch(f"MP antecedent {f.left} does not match {minor.formula}")
    return _mint(ProofTree(Rule("MP"), (major.proof, minor.proof), f.right))


def gen(rule: Rule, premise: Judgment) -> Judgment:
    """Necessitation: ``Gen_K(i)`` or ``Gen_Box(event)``."""
    _require(premise)
    if not isinstance(rule, Rule) or rule.name not in ("Gen_K", "Gen_Box"):
        raise RuleMismatch(f"not a generalization rule: {rule!r}")
    if len(rule.params) != 1:
        raise RuleMismatch(f"{rule.name} takes one parameter")
    (x,) = rule.params
    if rule.name == "Gen_K":
        _check_param("agent", x)
        out: Formula = K(x, premise.formula)
    else:
        _check_param("event", x)
        out = Box(x, premise.formula)
    return _mint(ProofTree(rule, (premise.proof,), out))


def gen_k(agent: int, premise: Judgment) -> Judgment:
    return gen(Rule("Gen_K", (agent,)), premise)


def gen_box(event: EventSym, premise: Judgment) -> Judgment:
    return gen(Rule("Gen_Box", (event,)), premise)


def gfp_c(group: Group, phi: Formula, rho: Formula, premise: Judgment) -> Judgment:
    """From ``|- rho -> phi & E_G rho`` conclude ``|- rho -> C_G phi``."""
    _require(premise)
    _check_param("group", group)
    _check_param("formula", phi)
    _check_param("formula", rho)
    want = Imp(rho, And(phi, E(group, rho)))
    if premise.formula != want:
        raise RuleMismatch(f"GFP_C premise should be {want}, got {premise.formula}")
    rule = Rule("GFP_C", (group, phi, rho))
    return _mint(ProofTree(rule, (premise.proof,), Imp(rho, C(group, phi))))


def relabel(j: Judgment, label: str | None = None, lemma: str | None = None) -> Judgment:
    """Attach audit metadata to the last step of ``j``; the formula is unchanged."""
    _require(j)
    t = j.proof
    return _mint(ProofTree(t.rule, t.premises, t.conclusion,
                           label if label is not None else t.label,
                           lemma if lemma is not None else t.lemma))


def _replay(rule: Rule, premises: list[Judgment], theory: Theory | None,
            budget: int) -> Judgment:
    name = rule.name
    if name in BUILTIN:
        want = ARITY[name]
        if len(premises) != want:
            raise RuleMismatch(f"{name} takes {want} premises, got {len(premises)}")
    elif premises:
        raise RuleMismatch(f"axiom {name} takes no premises, got {len(premises)}")
    if name == "Classical":
        if len(rule.params) != 1:
            raise RuleMismatch("Classical takes one formula parameter")
        return classical(rule.params[0], budget)
    if name == "MP":
        if rule.params:
            raise RuleMismatch("MP takes no parameters")
        return mp(premises[0], premises[1])
    if name in ("Gen_K", "Gen_Box"):
        return gen(rule, premises[0])
    if name == "GFP_C":
        if len(rule.params) != 3:
            raise RuleMismatch("GFP_C takes three parameters")
        return gfp_c(*rule.params, premises[0])
    return axiom(rule, theory)


def check_tree(tree: ProofTree, theory: Theory | None = None,
               budget: int = DEFAULT_BUDGET) -> Judgment:
    """Re-derive every node of ``tree`` and return the root judgment.

    Nodes are checked in post-order, so the reported failure is the
    leftmost-innermost one. Shared subtrees are checked once.
    """
    if not isinstance(tree, ProofTree):
        raise CheckError((), tree, "not a proof tree")
    done: dict[int, Judgment] = {}
    stack: list[tuple[object, tuple[int, ...], bool]] = [(tree, (), False)]
    while stack:
        node, path, expanded = stack.pop()
        if not isinstance(node, ProofTree):
            raise CheckError(path, node, "not a proof tree")  # type: ignore[arg-type]
        if id(node) in done:
            continue
        if not expanded:
            stack.append((node, path, True))
            for k in reversed(range(len(node.premises))):
                stack.append((node.premises[k], path + (k,), False))
            continue
        if not isinstance(node.rule, Rule):
            raise CheckError(path, node, f"not a rule: {node.rule!r}")
        prem = [done[id(p)] for p in node.premises]
        try:
            j = _replay(node.rule, prem, theory, budget)
        except KernelError as exc:
            raise CheckError(path, node, str(exc)) from exc
        except (TypeError, ValueError) as exc:
            raise CheckError(path, node, f"malformed step: {exc}") from exc
        if j.formula != node.conclusion:
            raise CheckError(path, node, "stored conclusion differs from the derived one",
                             expected=j.formula)
        if node.label is not None or node.lemma is not None:
            j = relabel(j, node.label, node.lemma)
        done[id(node)] = j
    return done[id(tree)]


def theory_instances(tree: ProofTree) -> list[Rule]:
    """Every theory-axiom instance used in ``tree``, in first-use order."""
    out: list[Rule] = []
    seen: set[Rule] = set()
    for node in tree.nodes():
        if node.rule.is_theory_axiom and node.rule not in seen:
            seen.add(node.rule)
            out.append(node.rule)
    return out


__all__ = [
    "ARITY",
    "BUILTIN",
    "DEFAULT_BUDGET",
    "EMPTY_THEORY",
    "SIGNATURES",
    "AdmissionError",
    "BudgetError",
    "CheckError",
    "EventKindError",
    "Judgment",
    "KernelError",
    "NotTautology",
    "ProofTree",
    "Rule",
    "RuleMismatch",
    "Schema",
    "Theory",
    "UnknownRule",
    "axiom",
    "check_tree",
    "classical",
    "gen",
    "gen_box",
    "gen_k",
    "gfp_c",
    "is_minted",
    "is_tautology",
    "mp",
    "relabel",
    "theory_instances",
]
