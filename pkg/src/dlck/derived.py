"""Derived rules used by the muddy-children proofs.

Everything here is ordinary client code of the kernel: each combinator
glues kernel rules together and returns the resulting judgment. A bug in
this module can make a combinator fail, never make it prove something false.
Most combinators take an optional ``label`` that tags the final step for
the audit trace.
"""

from __future__ import annotations

from dlck import kernel
from dlck.core import (
    FALSE,
    And,
    Box,
    C,
    E,
    EventSym,
    Formula,
    Group,
    Imp,
    K,
    Or,
    conj,
    imps,
    iter_box,
)
from dlck.kernel import Judgment, Rule, axiom, classical, mp


def _tag(j: Judgment, label: str | None) -> Judgment:
    return kernel.relabel(j, label) if label else j


def _parts(j: Judgment) -> tuple[Formula, Formula]:
    f = j.formula
    if not isinstance(f, Imp):
        raise kernel.RuleMismatch(f"expected an implication, got {f}")
    return f.left, f.right


def _conj_parts(f: Formula) -> tuple[Formula, Formula]:
    if not isinstance(f, And):
        raise kernel.RuleMismatch(f"expected a conjunction, got {f}")
    return f.left, f.right


def taut_mp(schema: Formula, *premises: Judgment) -> Judgment:
    """Instantiate a tautology ``p1 -> ... -> pn -> q`` and discharge it."""
    j = classical(schema)
    for p in premises:
        j = mp(j, p)
    return j


def identity(phi: Formula) -> Judgment:
    return classical(Imp(phi, phi))


def cut(ab: Judgment, bc: Judgment, label: str | None = None) -> Judgment:
    """``a -> b`` and ``b -> c`` give ``a -> c``."""
    a, b = _parts(ab)
    _, c = _parts(bc)
    return _tag(taut_mp(imps(Imp(a, b), Imp(b, c), Imp(a, c)), ab, bc), label)


def and_intro_imp(ab: Judgment, ac: Judgment, label: str | None = None,
                  right_first: bool = False) -> Judgment:
    """``a -> b`` and ``a -> c`` give ``a -> b & c``.

    ``right_first`` orders the proof so the ``a -> c`` branch comes first,
    matching trees that display that branch on the left.
    """
    a, b = _parts(ab)
    _, c = _parts(ac)
    goal = Imp(a, And(b, c))
    if right_first:
        return _tag(taut_mp(imps(Imp(a, c), Imp(a, b), goal), ac, ab), label)
    return _tag(taut_mp(imps(Imp(a, b), Imp(a, c), goal), ab, ac), label)


def and_elim_left(abc: Judgment, label: str | None = None) -> Judgment:
    a, bc = _parts(abc)
    b, _ = _conj_parts(bc)
    return _tag(taut_mp(Imp(abc.formula, Imp(a, b)), abc), label)


def and_elim_right(abc: Judgment, label: str | None = None) -> Judgment:
    a, bc = _parts(abc)
    _, c = _conj_parts(bc)
    return _tag(taut_mp(Imp(abc.formula, Imp(a, c)), abc), label)


def and_map(ab: Judgment, cd: Judgment) -> Judgment:
    """``a -> b`` and ``c -> d`` give ``a & c -> b & d``."""
    a, b = _parts(ab)
    c, d = _parts(cd)
    return taut_mp(imps(Imp(a, b), Imp(c, d), Imp(And(a, c), And(b, d))), ab, cd)


def imp_map(antecedent: Formula, bc: Judgment) -> Judgment:
    """``b -> c`` gives ``(x -> b) -> (x -> c)``."""
    b, c = _parts(bc)
    x = antecedent
    return taut_mp(imps(Imp(b, c), Imp(x, b), Imp(x, c)), bc)


# K_i and [a] share one derivation pattern; these helpers pick the
# distribution axiom and generalization rule for K_i and [a].

def _k_axiom(kind: str, x, phi: Formula, psi: Formula) -> Judgment:
    return axiom(Rule("K_K" if kind == "K" else "K_Box", (x, phi, psi)))


def _gen(kind: str, x, j: Judgment) -> Judgment:
    return kernel.gen_k(x, j) if kind == "K" else kernel.gen_box(x, j)


def _wrap(kind: str, x, phi: Formula) -> Formula:
    return K(x, phi) if kind == "K" else Box(x, phi)


def _mono(kind: str, x, pq: Judgment) -> Judgment:
    phi, psi = _parts(pq)
    dist = _k_axiom(kind, x, phi, psi)
    mp_, mpq, mq = _wrap(kind, x, phi), _wrap(kind, x, pq.formula), _wrap(kind, x, psi)
    swapped = taut_mp(Imp(dist.formula, imps(mpq, mp_, mq)), dist)
    return mp(swapped, _gen(kind, x, pq))


def _and_dist(kind: str, x, phi: Formula, psi: Formula) -> Judgment:
    both = And(phi, psi)
    pair = classical(imps(phi, psi, both))
    lifted = _mono(kind, x, pair)
    dist = _k_axiom(kind, x, psi, both)
    a, b = _wrap(kind, x, phi), _wrap(kind, x, Imp(psi, both))
    c, d = _wrap(kind, x, psi), _wrap(kind, x, both)
    glue = imps(Imp(a, b), imps(c, b, d), Imp(And(a, c), d))
    return taut_mp(glue, lifted, dist)


def k_mono(agent: int, pq: Judgment, label: str | None = None) -> Judgment:
    """``phi -> psi`` gives ``K_i phi -> K_i psi``."""
    return _tag(_mono("K", agent, pq), label)


def box_mono(event: EventSym, pq: Judgment, label: str | None = None) -> Judgment:
    """``phi -> psi`` gives ``[a] phi -> [a] psi``."""
    return _tag(_mono("Box", event, pq), label)


def iter_box_mono(event: EventSym, k: int, pq: Judgment,
                  label: str | None = None) -> Judgment:
    """``phi -> psi`` gives ``[a]^k phi -> [a]^k psi``."""
    _parts(pq)
    for _ in range(k):
        pq = _mono("Box", event, pq)
    return _tag(pq, label)


def k_and_dist(agent: int, phi: Formula, psi: Formula, label: str | None = None) -> Judgment:
    """``K_i phi & K_i psi -> K_i (phi & psi)``."""
    return _tag(_and_dist("K", agent, phi, psi), label)


def box_and_dist(event: EventSym, phi: Formula, psi: Formula,
                 label: str | None = None) -> Judgment:
    """``[a] phi & [a] psi -> [a] (phi & psi)``."""
    return _tag(_and_dist("Box", event, phi, psi), label)


def iter_box_and_dist(event: EventSym, k: int, phi: Formula, psi: Formula,
                      label: str | None = None) -> Judgment:
    """``[a]^k phi & [a]^k psi -> [a]^k (phi & psi)``."""
    if k == 0:
        return _tag(identity(And(phi, psi)), label)
    inner = iter_box_and_dist(event, k - 1, phi, psi)
    outer = box_and_dist(event, iter_box(event, k - 1, phi), iter_box(event, k - 1, psi))
    return _tag(cut(outer, box_mono(event, inner)), label)


def e_to_k(group: Group, agent: int, phi: Formula, label: str | None = None) -> Judgment:
    """``E_G phi -> K_i phi`` for a member ``i`` of ``G``."""
    if agent not in group:
        raise kernel.RuleMismatch(f"agent {agent} is not in group {group}")
    fwd = axiom(Rule("Def_E_fwd", (group, phi)))
    return _tag(taut_mp(Imp(fwd.formula, Imp(E(group, phi), K(agent, phi))), fwd), label)


def e_intro(group: Group, phi: Formula, per_agent: dict[int, Judgment]) -> Judgment:
    """From ``x -> K_i phi`` for every member, conclude ``x -> E_G phi``."""
    members = list(group)
    acc = per_agent[members[-1]]
    for i in reversed(members[:-1]):
        acc = and_intro_imp(per_agent[i], acc)
    return cut(acc, axiom(Rule("Def_E_bwd", (group, phi))))


def e_mono(group: Group, pq: Judgment, label: str | None = None) -> Judgment:
    """``phi -> psi`` gives ``E_G phi -> E_G psi``."""
    phi, psi = _parts(pq)
    per = {i: cut(e_to_k(group, i, phi), k_mono(i, pq)) for i in group}
    return _tag(e_intro(group, psi, per), label)


def iter_e_mono(group: Group, n: int, pq: Judgment) -> Judgment:
    for _ in range(n):
        pq = e_mono(group, pq)
    return pq


def e_and_dist(group: Group, phi: Formula, psi: Formula, label: str | None = None) -> Judgment:
    """``E_G phi & E_G psi -> E_G (phi & psi)``."""
    per = {}
    for i in group:
        both = and_map(e_to_k(group, i, phi), e_to_k(group, i, psi))
        per[i] = cut(both, k_and_dist(i, phi, psi))
    return _tag(e_intro(group, And(phi, psi), per), label)


def t_e(group: Group, phi: Formula, label: str | None = None) -> Judgment:
    """``E_G phi -> phi`` through the first member's truth axiom."""
    first = group.members[0]
    t = axiom(Rule("T_K", (first, phi)))
    return _tag(cut(e_to_k(group, first, phi), t), label)


def box_conj(event: EventSym, parts: list[Formula]) -> Judgment:
    """``[a]p1 & ([a]p2 & ...) -> [a](p1 & (p2 & ...))``, right-nested."""
    if len(parts) == 1:
        return identity(Box(event, parts[0]))
    rest = box_conj(event, parts[1:])
    head = identity(Box(event, parts[0]))
    return cut(and_map(head, rest), box_and_dist(event, parts[0], conj(parts[1:])))


def e_box_commute(group: Group, event: EventSym, phi: Formula,
                  label: str | None = None) -> Judgment:
    """``E_G [a] phi -> [a] E_G phi``: KT1 for every member, then Def_E."""
    members = list(group)
    steps = {}
    for i in members:
        kt1 = axiom(Rule("KT1", (i, event, phi)))
        steps[i] = cut(e_to_k(group, i, Box(event, phi)), kt1)
    acc = steps[members[-1]]
    for i in reversed(members[:-1]):
        acc = and_intro_imp(steps[i], acc)
    gathered = box_conj(event, [K(i, phi) for i in members])
    fold = box_mono(event, axiom(Rule("Def_E_bwd", (group, phi))))
    return _tag(cut(cut(acc, gathered), fold), label)


def e_pers(group: Group, event: EventSym, pers: Judgment, label: str | None = None) -> Judgment:
    """``phi -> [a] phi`` gives ``E_G phi -> [a] E_G phi``."""
    phi, boxed = _parts(pers)
    if boxed != Box(event, phi):
        raise kernel.RuleMismatch(f"expected {phi} -> [{event}] {phi}, got {pers.formula}")
    return _tag(cut(e_mono(group, pers), e_box_commute(group, event, phi)), label)


def c_unfold(group: Group, n: int, p: Formula, label: str | None = None) -> Judgment:
    """``C_G p -> E_G^n p``."""
    fix = axiom(Rule("FixPoint_C", (group, p)))
    if n == 0:
        return _tag(and_elim_left(fix), label)
    rec = c_unfold(group, n - 1, p)
    return _tag(cut(and_elim_right(fix), e_mono(group, rec)), label)


def c_mono(group: Group, pq: Judgment, label: str | None = None) -> Judgment:
    """``psi -> phi`` gives ``C_G psi -> C_G phi`` via the greatest fixpoint rule."""
    psi, phi = _parts(pq)
    rho = C(group, psi)
    fix = axiom(Rule("FixPoint_C", (group, psi)))
    e_rho = E(group, rho)
    glue = imps(pq.formula, fix.formula, Imp(rho, And(phi, e_rho)))
    return _tag(kernel.gfp_c(group, phi, rho, taut_mp(glue, pq, fix)), label)


def bot_or_elim(p: Formula) -> Judgment:
    """``FALSE | p -> p``."""
    return classical(Imp(Or(FALSE, p), p))


__all__ = [
    "and_elim_left", "and_elim_right", "and_intro_imp", "and_map", "bot_or_elim",
    "box_and_dist", "box_conj", "box_mono", "c_mono", "c_unfold", "cut", "e_and_dist",
    "e_box_commute", "e_intro", "e_mono", "e_pers", "e_to_k", "identity", "imp_map",
    "iter_box_and_dist", "iter_box_mono", "iter_e_mono", "k_and_dist", "k_mono", "t_e",
    "taut_mp",
]

