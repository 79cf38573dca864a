"""The muddy-children theory and generators for its lemmas.

A :class:`Scenario` has ``c + 1`` children, ``m + 1`` of them muddy. The
generators build kernel judgments step for step along the published proof
trees; the final step of each named tree step carries a ``label`` and each
lemma root carries a ``lemma`` tag, so :func:`audit_trace` can list the
steps in order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache

from dlck import derived as d
from dlck import kernel
from dlck.core import (
    FALSE,
    POINT,
    STAR,
    TRUE,
    And,
    Box,
    C,
    E,
    Eps,
    EventKind,
    EventSym,
    Formula,
    Group,
    Imp,
    K,
    Lam,
    Mu,
    Not,
    Or,
    iff,
    imps,
    is_physical,
    iter_box,
    iter_E,
)
from dlck.kernel import Judgment, ProofTree, Rule, Schema, Theory

EVENTS = (POINT, STAR)
SCHEMAS = ("EQ_le", "PERSIST", "MC1_1", "MC1_2", "PERS_MC1_2", "MC2", "MC3")
LEMMAS = ("GainConn", "MultGainConn", "ComImpPartIt", "PointImpPartIt", "PointImpProgr",
          "ResInter1", "ResInter2", "Concl")


@dataclass(frozen=True)
class Scenario:
    """``c + 1`` children of whom ``m + 1`` are muddy."""

    c: int
    m: int

    def __post_init__(self) -> None:
        for name in ("c", "m"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"{name} must be a natural number, got {v!r}")
        if self.m > self.c:
            raise ValueError(f"need m <= c, got c={self.c}, m={self.m}")

    @property
    def children(self) -> int:
        return self.c + 1

    @property
    def muddy(self) -> int:
        return self.m + 1

    @property
    def group(self) -> Group:
        return Group(tuple(range(1, self.c + 2)))


def group(s: Scenario) -> Group:
    return s.group


def eq_formula(j: int) -> Formula:
    return iff(Eps(j), And(Lam(j), Not(Lam(j + 1))))


def mc1_2_body(s: Scenario, i: int) -> Formula:
    return Imp(Mu(i), K(i, Or(Eps(s.m), Eps(s.m + 1))))


def concl_formula(s: Scenario, i: int) -> Formula:
    return Imp(Box(POINT, TRUE), iter_box(STAR, s.m, Imp(Mu(i), K(i, Mu(i)))))


@cache
def muddy_theory(s: Scenario) -> Theory:
    if not isinstance(s, Scenario):
        raise TypeError(f"not a scenario: {s!r}")
    G = s.group

    def declared(ev: EventSym) -> str | None:
        if ev not in EVENTS:
            return f"event {ev.name!r} is not declared by the theory"
        return None

    def member(i: int) -> str | None:
        return None if i in G else f"agent {i} is not one of the children {G}"

    def persist_ok(p: Formula, ev: EventSym) -> str | None:
        if not is_physical(p):
            return f"{p} is not a physical proposition"
        if ev.kind is not EventKind.EPISTEMIC:
            return f"event {ev.name!r} is not epistemic"
        return declared(ev)

    def pers_mc1_2_ok(ev: EventSym, i: int) -> str | None:
        return declared(ev) or member(i)

    schemas = {
        "EQ_le": Schema("EQ_le", ("nat",), eq_formula,
                        doc="eps_j <-> lambda_j & ~lambda_(j+1)"),
        "PERSIST": Schema("PERSIST", ("formula", "event"),
                          lambda p, ev: Imp(p, Box(ev, p)), persist_ok,
                          doc="physical propositions survive epistemic events"),
        "MC1_1": Schema("MC1_1", (), lambda: Imp(Box(POINT, TRUE), C(G, Lam(1))),
                        doc="after the father speaks, lambda_1 is common knowledge"),
        "MC1_2": Schema("MC1_2", ("agent",),
                        lambda i: Imp(Box(POINT, TRUE), mc1_2_body(s, i)), member,
                        doc="a muddy child counts m or m+1 muddy faces"),
        "PERS_MC1_2": Schema("PERS_MC1_2", ("event", "agent"),
                             lambda ev, i: Imp(mc1_2_body(s, i), Box(ev, mc1_2_body(s, i))),
                             pers_mc1_2_ok, doc="the count is remembered"),
        "MC2": Schema("MC2", ("nat",),
                      lambda j: Imp(E(G, E(G, Lam(j))), Box(STAR, E(G, Not(Eps(j))))),
                      lambda j: None if j >= 1 else "MC2 is stated for j >= 1",
                      doc="an injunction rules out exactly j muddy children"),
        "MC3": Schema("MC3", ("agent",),
                      lambda i: imps(Mu(i), K(i, Eps(s.m + 1)), K(i, Mu(i))), member,
                      doc="knowing the exact count, a muddy child knows it is muddy"),
    }
    return Theory("muddy", EVENTS, schemas, {"c": s.c, "m": s.m})


def _ax(s: Scenario, name: str, *params, label: str | None = None) -> Judgment:
    j = kernel.axiom(Rule(name, tuple(params)), muddy_theory(s))
    return kernel.relabel(j, label) if label else j


def _lemma(j: Judgment, name: str) -> Judgment:
    return kernel.relabel(j, lemma=name)


@cache
def lem_imp_lambda_eps(s: Scenario, j: int) -> Judgment:
    """``lambda_j & ~eps_j -> lambda_(j+1)``."""
    eq = _ax(s, "EQ_le", j)
    goal = Imp(And(Lam(j), Not(Eps(j))), Lam(j + 1))
    return d.taut_mp(Imp(eq.formula, goal), eq)


@cache
def lem_exclu_lambda_eps(s: Scenario, j: int) -> Judgment:
    """``~(lambda_(j+1) & eps_j)``."""
    eq = _ax(s, "EQ_le", j)
    return d.taut_mp(Imp(eq.formula, Not(And(Lam(j + 1), Eps(j)))), eq)


@cache
def gain_conn(s: Scenario, j: int) -> Judgment:
    """``E_G E_G lambda_j -> [*] E_G lambda_(j+1)``."""
    if j < 1:
        raise ValueError("GainConn needs j >= 1")
    G = s.group
    lam, neps = Lam(j), Not(Eps(j))
    mc2 = _ax(s, "MC2", j, label="MC2")
    te = d.t_e(G, E(G, lam), label="T_E")
    pers = _ax(s, "PERSIST", lam, STAR, label="PERS")
    epers = d.e_pers(G, STAR, pers, label="EPers")
    branch = d.cut(te, epers, label="Cut")
    both = d.and_intro_imp(branch, mc2, label="AndIntro", right_first=True)
    boxed = d.cut(both, d.box_and_dist(STAR, E(G, lam), E(G, neps)), label="*/AndDist")
    inner = d.cut(boxed, d.box_mono(STAR, d.e_and_dist(G, lam, neps)), label="E/AndDist")
    step = d.box_mono(STAR, d.e_mono(G, lem_imp_lambda_eps(s, j)))
    return _lemma(d.cut(inner, step, label="IMP_le"), "GainConn")


@cache
def mult_gain_conn(s: Scenario, n: int, j: int) -> Judgment:
    """``E_G^(n+1) lambda_j -> [*] E_G^n lambda_(j+1)``."""
    if n < 1:
        raise ValueError("MultGainConn needs n >= 1")
    if n == 1:
        return _lemma(gain_conn(s, j), "GainConn")
    G = s.group
    rec = mult_gain_conn(s, n - 1, j)
    lifted = d.e_mono(G, rec, label="EDist")
    commute = d.e_box_commute(G, STAR, iter_E(G, n - 1, Lam(j + 1)), label="KT1")
    return _lemma(d.cut(lifted, commute, label="Cut"), "MultGainConn")


@cache
def com_imp_part_it(s: Scenario, n: int, p: Formula = Lam(1)) -> Judgment:  # noqa: B008
    """``C_G p -> E_G^n p``."""
    if n < 0:
        raise ValueError("ComImpPartIt needs n >= 0")
    G = s.group
    fix = kernel.relabel(kernel.axiom(Rule("FixPoint_C", (G, p))), "FixPoint_C")
    if n == 0:
        return _lemma(d.and_elim_left(fix, label="AndElim"), "ComImpPartIt")
    head = d.and_elim_right(fix, label="AndElim")
    rec = com_imp_part_it(s, n - 1, p)
    out = d.cut(head, d.e_mono(G, rec, label="EDist"), label="Cut")
    return _lemma(out, "ComImpPartIt")


@cache
def point_imp_part_it(s: Scenario, n: int) -> Judgment:
    """``[.] TRUE -> E_G^n lambda_1``."""
    mc11 = _ax(s, "MC1_1", label="MC1_1")
    return _lemma(d.cut(mc11, com_imp_part_it(s, n), label="Cut"), "PointImpPartIt")


@cache
def point_imp_progr(s: Scenario, n: int, j: int) -> Judgment:
    """``[.] TRUE -> [*]^(j-1) E_G^(n-j+1) lambda_j`` for ``n >= j >= 1``."""
    if not 1 <= j <= n:
        raise ValueError(f"PointImpProgr needs n >= j >= 1, got n={n}, j={j}")
    if j == 1:
        return _lemma(point_imp_part_it(s, n), "PointImpProgr")
    rec = point_imp_progr(s, n, j - 1)
    # rec ends in E_G^(n-j+2) lambda_(j-1), which is E_G E_G^(n-j+1) lambda_(j-1)
    gain = mult_gain_conn(s, n - j + 1, j - 1)
    lifted = d.iter_box_mono(STAR, j - 2, gain, label="(j-1)*Dist")
    return _lemma(d.cut(rec, lifted, label="Cut"), "PointImpProgr")


def res_inter_1(s: Scenario, n: int) -> Judgment:
    """``[.] TRUE -> [*]^m E_G^(n-m) lambda_(m+1)`` for ``n > m``."""
    return _lemma(point_imp_progr(s, n, s.m + 1), "ResInter1")


@cache
def res_inter(s: Scenario) -> Judgment:
    """``[.] TRUE -> [*]^m E_G lambda_(m+1)``."""
    return _lemma(res_inter_1(s, s.m + 1), "ResInter2")


def _persist_lift(s: Scenario, i: int, k: int) -> Judgment:
    body = mc1_2_body(s, i)
    if k == 0:
        return d.identity(body)
    one = _ax(s, "PERS_MC1_2", STAR, i)
    prev = _persist_lift(s, i, k - 1)
    return d.cut(prev, d.iter_box_mono(STAR, k - 1, one))


@cache
def prove_concl(s: Scenario, i: int) -> Judgment:
    """``[.] TRUE -> [*]^m (mu_i -> K_i mu_i)``."""
    G = s.group
    if i not in G:
        raise ValueError(f"agent {i} is not one of the children {G}")
    m = s.m
    lam = Lam(m + 1)
    chi = Or(Eps(m), Eps(m + 1))
    mu, p_body = Mu(i), mc1_2_body(s, i)

    def under(j: Judgment, inner: Judgment, label: str) -> Judgment:
        return d.cut(j, d.iter_box_mono(STAR, m, inner), label=label)

    mc12 = _ax(s, "MC1_2", i, label="MC1_2")
    j = d.and_intro_imp(res_inter(s), mc12, label="ResInter2&MC1_2")
    keep = d.and_map(d.identity(iter_box(STAR, m, E(G, lam))), _persist_lift(s, i, m))
    j = d.cut(j, keep, label="PERS_MC1_2")
    j = d.cut(j, d.iter_box_and_dist(STAR, m, E(G, lam), p_body), label="*/AndDist")
    j = under(j, d.and_map(d.e_to_k(G, i, lam), d.identity(p_body)), "E->K")
    regroup = Imp(And(K(i, lam), p_body), Imp(mu, And(K(i, lam), K(i, chi))))
    j = under(j, d.classical(regroup), "a&(b->c)->(b->a&c)")
    j = under(j, d.imp_map(mu, d.k_and_dist(i, lam, chi)), "K/AndDist")
    split = Or(And(lam, Eps(m)), And(lam, Eps(m + 1)))
    j = under(j, d.imp_map(mu, d.k_mono(i, d.classical(Imp(And(lam, chi), split)))),
              "And/OrDist")
    weak = Or(And(lam, Eps(m)), Eps(m + 1))
    j = under(j, d.imp_map(mu, d.k_mono(i, d.classical(Imp(split, weak)))), "LamEps")
    exclu = lem_exclu_lambda_eps(s, m)
    kill = d.taut_mp(Imp(exclu.formula, Imp(weak, Or(FALSE, Eps(m + 1)))), exclu)
    j = under(j, d.imp_map(mu, d.k_mono(i, kill)), "EXCLU_le")
    j = under(j, d.imp_map(mu, d.k_mono(i, d.bot_or_elim(Eps(m + 1)))), "BotOr")
    mc3 = _ax(s, "MC3", i)
    j = under(j, d.taut_mp(Imp(mc3.formula, Imp(Imp(mu, K(i, Eps(m + 1))), Imp(mu, K(i, mu)))),
                           mc3), "MC3")
    return _lemma(j, "Concl")


def audit_trace(tree: ProofTree) -> list[str]:
    """Step labels in proof order; nested lemmas appear as their name only.

    Each distinct step is listed once even when reused.
    """
    out: list[str] = []
    seen: set[int] = set()
    stack: list[tuple[ProofTree, bool]] = [(tree, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if node.lemma is not None and node is not tree:
            seen.add(id(node))
            out.append(node.lemma)
            continue
        if expanded:
            seen.add(id(node))
            if node.label is not None:
                out.append(node.label)
            continue
        stack.append((node, True))
        for p in reversed(node.premises):
            stack.append((p, False))
    return out


def lemma_suite(s: Scenario, size: int = 5) -> dict[str, Judgment]:
    """Named instances of every lemma, as used for the acceptance suite."""
    out: dict[str, Judgment] = {}
    for j in range(1, size + 1):
        out[f"GainConn_j{j}"] = gain_conn(s, j)
    for n in range(1, size):
        for j in range(1, size):
            out[f"MultGainConn_n{n}_j{j}"] = mult_gain_conn(s, n, j)
    for n in range(size + 1):
        out[f"ComImpPartIt_n{n}"] = com_imp_part_it(s, n)
    for n in range(size + 1):
        out[f"PointImpPartIt_n{n}"] = point_imp_part_it(s, n)
    for n in range(1, size + 1):
        for j in range(1, n + 1):
            out[f"PointImpProgr_n{n}_j{j}"] = point_imp_progr(s, n, j)
    out["ResInter2"] = res_inter(s)
    for i in s.group:
        out[f"Concl_i{i}"] = prove_concl(s, i)
    return out
