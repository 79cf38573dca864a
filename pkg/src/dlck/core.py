"""Object language: agents, groups, events and formulas.

Formulas are immutable trees compared structurally. Each node caches its
hash, so deep formulas can be used as dictionary keys without re-walking
them. Iterated modalities (``[*]^k``, ``E^n``) and the shared-knowledge
expansion are plain functions returning ordinary formulas.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, fields

Agent = int


@dataclass(frozen=True)
class Group:
    """A nonempty set of agents kept in strictly increasing order."""

    members: tuple[Agent, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("a group needs at least one agent")
        for a in self.members:
            if not isinstance(a, int) or isinstance(a, bool) or a < 0:
                raise ValueError(f"agent ids are natural numbers, got {a!r}")
        if any(a >= b for a, b in zip(self.members, self.members[1:])):
            raise ValueError(f"group members must be strictly increasing: {self.members}")

    @classmethod
    def of(cls, *agents: Agent) -> Group:
        return cls(tuple(sorted(set(agents))))

    def __iter__(self) -> Iterator[Agent]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, agent: object) -> bool:
        return agent in self.members

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


class EventKind(enum.Enum):
    EPISTEMIC = "epistemic"
    # Events that may change the physical world; KT1 and PERSIST refuse them.
    ONTIC = "ontic"


@dataclass(frozen=True)
class EventSym:
    name: str
    kind: EventKind = EventKind.EPISTEMIC

    def __str__(self) -> str:
        return {"point": ".", "star": "*"}.get(self.name, self.name)


POINT = EventSym("point")
STAR = EventSym("star")


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __ne__(self, other: object) -> bool:
        return not self == other

    _names: tuple[str, ...] = ()

    def _key(self) -> tuple:
        return tuple(getattr(self, n) for n in self._names)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((type(self).__name__, self._key())))

    def __str__(self) -> str:
        from dlck.syntax import print_formula

        return print_formula(self)

    def children(self) -> tuple[Formula, ...]:
        return ()


def _node(cls):
    cls = dataclass(frozen=True, eq=False)(cls)
    cls._names = tuple(f.name for f in fields(cls) if f.name != "_hash")
    return cls


_HASH = field(init=False, repr=False, compare=False, default=0)


class Atom(Formula):
    __slots__ = ()

    physical = True


@_node
class Mu(Atom):
    """Child ``child`` has mud on their face."""

    child: Agent
    _hash: int = _HASH


@_node
class Lam(Atom):
    """At least ``j`` children are muddy."""

    j: int
    _hash: int = _HASH


@_node
class Eps(Atom):
    """Exactly ``j`` children are muddy."""

    j: int
    _hash: int = _HASH


@_node
class Prop(Atom):
    """A named proposition letter; ``physical`` marks world-describing ones."""

    name: str
    is_physical: bool = True
    _hash: int = _HASH

    @property
    def physical(self) -> bool:  # type: ignore[override]
        return self.is_physical


@_node
class Top(Formula):
    _hash: int = _HASH


@_node
class Bot(Formula):
    _hash: int = _HASH


@_node
class Not(Formula):
    body: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.body,)


@_node
class And(Formula):
    left: Formula
    right: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


@_node
class Or(Formula):
    left: Formula
    right: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


@_node
class Imp(Formula):
    left: Formula
    right: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


@_node
class K(Formula):
    agent: Agent
    body: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.body,)


@_node
class E(Formula):
    group: Group
    body: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.body,)


@_node
class C(Formula):
    group: Group
    body: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.body,)


@_node
class Box(Formula):
    event: EventSym
    body: Formula
    _hash: int = _HASH

    def children(self) -> tuple[Formula, ...]:
        return (self.body,)


TRUE = Top()
FALSE = Bot()

MODAL = (K, E, C, Box)
BINARY = (And, Or, Imp)


def iff(a: Formula, b: Formula) -> Formula:
    """``a <-> b``, stored as the conjunction of both implications."""
    return And(Imp(a, b), Imp(b, a))


def imps(*parts: Formula) -> Formula:
    """Right-associated implication chain ``p1 -> p2 -> ... -> pn``."""
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Imp(p, out)
    return out


def conj(parts: Iterable[Formula]) -> Formula:
    """Right-nested conjunction of a nonempty sequence."""
    items = list(parts)
    if not items:
        raise ValueError("empty conjunction")
    out = items[-1]
    for p in reversed(items[:-1]):
        out = And(p, out)
    return out


def iter_box(event: EventSym, k: int, body: Formula) -> Formula:
    if k < 0:
        raise ValueError("iteration count must be a natural number")
    for _ in range(k):
        body = Box(event, body)
    return body


def iter_E(group: Group, n: int, body: Formula) -> Formula:
    if n < 0:
        raise ValueError("iteration count must be a natural number")
    for _ in range(n):
        body = E(group, body)
    return body


def def_E_expansion(group: Group, body: Formula) -> Formula:
    """The conjunction of ``K_i body`` over the group, right-nested."""
    if not isinstance(group, Group) or len(group) == 0:
        raise ValueError("shared knowledge needs a nonempty group")
    return conj(K(i, body) for i in group)


def is_physical(phi: Formula) -> bool:
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            if not f.physical:
                return False
        elif isinstance(f, MODAL):
            return False
        else:
            stack.extend(f.children())
    return True


def subformulas(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(f.children())


def size(phi: Formula) -> int:
    return sum(1 for _ in subformulas(phi))


def depth(phi: Formula) -> int:
    kids = phi.children()
    return 1 + max(map(depth, kids)) if kids else 0


def mentions_event(phi: Formula) -> bool:
    return any(isinstance(f, Box) for f in subformulas(phi))


def placeholder(k: int) -> Prop:
    return Prop(f"p{k}")


def boolean_skeleton(phi: Formula) -> tuple[Formula, dict[Prop, Formula]]:
    """Abstract every maximal atom- or modality-headed subformula.

    Structurally equal subformulas share a placeholder, so ``K1 x -> K1 x``
    becomes ``p0 -> p0``.
    """
    index: dict[Formula, Prop] = {}
    binding: dict[Prop, Formula] = {}

    def walk(f: Formula) -> Formula:
        if isinstance(f, (Top, Bot)):
            return f
        if isinstance(f, Not):
            return Not(walk(f.body))
        if isinstance(f, BINARY):
            return type(f)(walk(f.left), walk(f.right))
        p = index.get(f)
        if p is None:
            p = placeholder(len(index))
            index[f] = p
            binding[p] = f
        return p

    return walk(phi), binding


def substitute(phi: Formula, binding: dict[Prop, Formula]) -> Formula:
    """Replace placeholder atoms by their bound formulas (booleans only)."""
    if isinstance(phi, Prop) and phi in binding:
        return binding[phi]
    if isinstance(phi, Not):
        return Not(substitute(phi.body, binding))
    if isinstance(phi, BINARY):
        return type(phi)(substitute(phi.left, binding), substitute(phi.right, binding))
    return phi
