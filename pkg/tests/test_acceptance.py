"""Acceptance criteria 1-9. Each prints one PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` or as part of pytest.
"""

import itertools
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import record
from mutation import is_benign, mutate_node, replace, replay_all
from strategies import EVENTS, random_syntax_formula

from dlck import kernel, muddy, semantics
from dlck.core import FALSE, STAR, TRUE, And, Group, Imp, Mu, Not, Or, Prop, placeholder
from dlck.kernel import KernelError, check_tree
from dlck.muddy import Scenario
from dlck.script import check_script, dump_script, read_script
from dlck.syntax import parse_formula, print_formula


def _settle(n, ok, detail):
    record(n, ok, detail)
    assert ok, detail


# -- 1 -----------------------------------------------------------------------

def test_criterion_1_concl_sweep():
    t0 = time.perf_counter()
    bad, count = [], 0
    for c in range(7):
        for m in range(c + 1):
            s = Scenario(c, m)
            theory = muddy.muddy_theory(s)
            for i in s.group:
                count += 1
                try:
                    j = check_tree(muddy.prove_concl(s, i).proof, theory)
                    if j.formula != muddy.concl_formula(s, i):
                        bad.append((c, m, i, "wrong conclusion"))
                except KernelError as exc:
                    bad.append((c, m, i, str(exc)))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    _settle(1, ok, f"{count - len(bad)}/{count} proofs accepted in {elapsed:.1f}s; failures {bad[:3]}")


# -- 2 -----------------------------------------------------------------------

SUITE_SCENARIOS = (Scenario(1, 0), Scenario(2, 1), Scenario(3, 2))
_suite_state = {"done": set(), "bad": []}


def _suite_check(lemma, build):
    bad, count = [], 0
    for s in SUITE_SCENARIOS:
        theory = muddy.muddy_theory(s)
        for key, thunk in build(s):
            count += 1
            try:
                j = thunk()
                if check_tree(j.proof, theory).formula != j.formula:
                    bad.append((s.c, s.m, key))
            except KernelError as exc:
                bad.append((s.c, s.m, key, str(exc)))
    _suite_state["done"].add(lemma)
    _suite_state["bad"] += bad
    ok = not _suite_state["bad"]
    detail = f"{lemma}: {count - len(bad)}/{count} accepted; {len(_suite_state['done'])}/6 lemmas checked"
    record(2, ok, detail)
    assert not bad, bad


def test_GainConn():
    _suite_check("GainConn", lambda s: [(j, lambda j=j: muddy.gain_conn(s, j)) for j in range(1, 6)])


def test_MultGainConn():
    _suite_check("MultGainConn", lambda s: [((n, j), lambda n=n, j=j: muddy.mult_gain_conn(s, n, j))
                                            for n in range(1, 5) for j in range(1, 5)])


def test_ComImpPartIt():
    _suite_check("ComImpPartIt", lambda s: [(n, lambda n=n: muddy.com_imp_part_it(s, n)) for n in range(6)])


def test_PointImpPartIt():
    _suite_check("PointImpPartIt", lambda s: [(n, lambda n=n: muddy.point_imp_part_it(s, n)) for n in range(6)])


def test_PointImpProgr():
    _suite_check("PointImpProgr", lambda s: [((n, j), lambda n=n, j=j: muddy.point_imp_progr(s, n, j))
                                             for n in range(1, 6) for j in range(1, n + 1)])


def test_ResInter2():
    _suite_check("ResInter2", lambda s: [("ResInter2", lambda: muddy.res_inter(s))])


# -- 3 -----------------------------------------------------------------------

def test_criterion_3_mutations():
    s = Scenario(2, 1)
    theory = muddy.muddy_theory(s)
    rng = random.Random(2024)
    trees = {i: muddy.prove_concl(s, i).proof for i in s.group}
    tables = {i: replay_all(t, theory) for i, t in trees.items()}
    nodes = {i: t.nodes() for i, t in trees.items()}
    total = benign = rejected = silent = crashed = 0
    for _ in range(1200):
        i = rng.choice(list(s.group))
        node = rng.choice(nodes[i])
        _, new = mutate_node(rng, node)
        harmless = is_benign(new, node, theory, tables[i])
        total += 1
        benign += harmless
        try:
            check_tree(replace(trees[i], node, new), theory)
            accepted = True
        except KernelError:
            accepted = False
        except Exception:  # noqa: BLE001 - a crash is not a clean rejection
            crashed += 1
            continue
        if not harmless:
            if accepted:
                silent += 1
            else:
                rejected += 1
    changed = total - benign
    ok = total >= 1000 and silent == 0 and crashed == 0 and rejected == changed
    _settle(3, ok, f"{total} mutations, {changed} change a conclusion, {rejected} rejected, "
                   f"{silent} silently accepted, {crashed} crashes, {benign} benign")


# -- 4 -----------------------------------------------------------------------

def test_criterion_4_endpoint():
    t0 = time.perf_counter()
    bad, count = [], 0
    for c in range(1, 5):
        for m in range(c + 1):
            s = Scenario(c, m)
            count += 1
            e = semantics.endpoint(s)
            after = e["after_m"]
            if not after["live"] or not all(after["knows"].values()):
                bad.append((c, m, "after m"))
            if m >= 1:
                before = e["after_m_minus_1"]
                if all(before["knows"].values()):
                    bad.append((c, m, "after m-1"))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1
    _settle(4, ok, f"{count - len(bad)}/{count} scenarios in {elapsed:.3f}s; failures {bad}")


# -- 5 -----------------------------------------------------------------------

def _has_t_box(tree):
    return any(n.rule.name == "T_Box" for n in tree.nodes())


def test_criterion_5_trace_soundness():
    bad, nodes = [], 0
    for s in (Scenario(1, 0), Scenario(2, 1), Scenario(3, 2)):
        for i in s.group:
            tree = muddy.prove_concl(s, i).proof
            report = semantics.validate_judgment_trace(s, tree)
            nodes += len(report.findings)
            if not report.ok:
                bad.append((s.c, s.m, i, [f.formula for f in report.failures[:2]]))
            if _has_t_box(tree):
                bad.append((s.c, s.m, i, "T_Box used"))
    suite_t_box = [name for s in (Scenario(2, 1),) for name, j in muddy.lemma_suite(s).items()
                   if _has_t_box(j.proof)]
    ok = not bad and not suite_t_box
    _settle(5, ok, f"{nodes} trace steps checked; failures {bad}; T_Box in suite {suite_t_box}")


# -- 6 -----------------------------------------------------------------------

def test_criterion_6_theory_validation():
    bad, count, findings = [], 0, 0
    for c in range(5):
        for m in range(c + 1):
            s = Scenario(c, m)
            report = semantics.validate_theory(s, n_random=200, seed=c * 10 + m)
            count += 1
            findings += len(report.findings)
            kt1 = sum(1 for f in report.findings if f.rule.startswith("KT1["))
            if not report.ok or kt1 < 200:
                bad.append((c, m, [f.formula for f in report.failures[:2]], kt1))
    ok = not bad
    _settle(6, ok, f"{count} scenarios, {findings} findings; failures {bad}")


# -- 7 -----------------------------------------------------------------------

PLACEHOLDERS = [placeholder(k) for k in range(4)]
BINARY = {"and": And, "or": Or, "imp": Imp}


def _shapes(n):
    if n == 0:
        yield None
        return
    for s in _shapes(n - 1):
        yield ("not", s)
    for k in range(n):
        for a in _shapes(k):
            for b in _shapes(n - 1 - k):
                for op in BINARY:
                    yield (op, a, b)


def _leaf_count(shape):
    return 1 if shape is None else sum(_leaf_count(x) for x in shape[1:])


def _fillings(n):
    # placeholders numbered by first occurrence, so renamings are not repeated
    def rec(i, used):
        if i == n:
            yield ()
            return
        for v in (TRUE, FALSE):
            for rest in rec(i + 1, used):
                yield (v,) + rest
        for k in range(min(used + 1, 4)):
            for rest in rec(i + 1, max(used, k + 1)):
                yield (PLACEHOLDERS[k],) + rest
    yield from rec(0, 0)


def _build(shape, leaves):
    if shape is None:
        return next(leaves)
    if shape[0] == "not":
        return Not(_build(shape[1], leaves))
    return BINARY[shape[0]](_build(shape[1], leaves), _build(shape[2], leaves))


def _oracle_value(f, v):
    if f == TRUE:
        return True
    if f == FALSE:
        return False
    if isinstance(f, Prop):
        return v[f]
    if isinstance(f, Not):
        return not _oracle_value(f.body, v)
    a, b = _oracle_value(f.left, v), _oracle_value(f.right, v)
    if isinstance(f, And):
        return a and b
    if isinstance(f, Or):
        return a or b
    return (not a) or b


def _oracle(f, atoms):
    return all(_oracle_value(f, dict(zip(atoms, vals)))
               for vals in itertools.product((False, True), repeat=len(atoms)))


def _accepts(f):
    try:
        return kernel.classical(f).formula == f
    except kernel.NotTautology:
        return False


def test_criterion_7_classical_exhaustive():
    t0 = time.perf_counter()
    total = tautologies = 0
    disagree = []
    for size in range(5):
        for shape in _shapes(size):
            for fill in _fillings(_leaf_count(shape)):
                f = _build(shape, iter(fill))
                atoms = sorted({x for x in fill if isinstance(x, Prop)}, key=lambda p: p.name)
                expected = _oracle(f, atoms)
                total += 1
                tautologies += expected
                if _accepts(f) != expected:
                    disagree.append(print_formula(f))
    elapsed = time.perf_counter() - t0
    ok = not disagree and total == 940863 and tautologies == 356515
    _settle(7, ok, f"{total} formulas up to 4 connectives, {tautologies} tautologies, "
                   f"{len(disagree)} disagreements, {elapsed:.0f}s")


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_structural_oracles():
    rng = random.Random(8)
    atoms = [Mu(1), Mu(2), Prop("p", False)]
    bad, sizes = [], []
    for k in range(100):
        agents = list(range(1, rng.randint(1, 4) + 1))
        n = rng.randint(1, 16)
        sizes.append(n)
        model = semantics.random_model(rng, n, agents, atoms, (STAR,))
        for _ in range(5):
            g = Group.of(*rng.sample(agents, rng.randint(1, len(agents))))
            phi = semantics.random_formula(rng, 3, atoms, agents, (STAR,))
            if not semantics.def_e_agreement(model, g, phi):
                bad.append((k, "Def_E", print_formula(phi)))
            if not semantics.c_agreement(model, g, phi):
                bad.append((k, "C", print_formula(phi)))
    ok = not bad
    _settle(8, ok, f"100 models with {min(sizes)}-{max(sizes)} worlds, 500 formula/group pairs; failures {bad[:3]}")


# -- 9 -----------------------------------------------------------------------

def test_criterion_9_round_trips():
    rng = random.Random(9)
    mismatches = []
    for _ in range(10_000):
        f = random_syntax_formula(rng, rng.randint(0, 6))
        text = print_formula(f)
        if parse_formula(text, EVENTS) != f:
            mismatches.append(text)

    s = Scenario(2, 1)
    theory = muddy.muddy_theory(s)
    suite = muddy.lemma_suite(s)
    # one deliberately broken proof so a rejection verdict is round-tripped too
    concl = suite["Concl_i1"].proof
    leaf = next(n for n in concl.nodes() if n.rule.name == "Classical")
    broken = replace(concl, leaf, kernel.ProofTree(leaf.rule, leaf.premises, Not(leaf.conclusion)))
    lemmas = [(name, j.proof) for name, j in suite.items()] + [("Broken", broken)]

    def verdict(tree):
        try:
            return ("accepted", check_tree(tree, theory).formula)
        except KernelError:
            return ("rejected", None)

    before = {name: verdict(tree) for name, tree in lemmas}
    results = check_script(read_script(dump_script(lemmas, theory)))
    after = {r.lemma: ("accepted" if r.ok else "rejected", parse_formula(r.formula) if r.ok else None)
             for r in results}
    changed = [name for name in before if before[name] != after.get(name)]
    ok = not mismatches and not changed and before["Broken"][0] == "rejected"
    _settle(9, ok, f"10000 formulas, {len(mismatches)} print/parse mismatches; "
                   f"{len(lemmas)} lemmas saved and reloaded, {len(changed)} verdicts changed")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
