import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import formulas, groups

from dlck.core import (
    FALSE,
    STAR,
    TRUE,
    And,
    Bot,
    Box,
    E,
    Eps,
    Group,
    Imp,
    K,
    Lam,
    Mu,
    Not,
    Or,
    Prop,
    boolean_skeleton,
    def_E_expansion,
    depth,
    iff,
    is_physical,
    iter_box,
    iter_E,
    mentions_event,
    placeholder,
    size,
    subformulas,
    substitute,
)

G3 = Group.of(1, 2, 3)
phi = Mu(1)


def test_group_is_sorted_and_deduplicated():
    assert Group.of(3, 1, 2, 1).members == (1, 2, 3)
    assert str(Group.of(2, 1)) == "{1,2}"


@pytest.mark.parametrize("members", [(), (2, 1), (1, 1), (-1,)])
def test_group_invariants(members):
    with pytest.raises(ValueError):
        Group(members)


def test_iter_box_examples():
    assert iter_box(STAR, 0, phi) == phi
    assert iter_box(STAR, 1, Mu(1)) == Box(STAR, Mu(1))
    assert iter_box(STAR, 2, TRUE) == Box(STAR, Box(STAR, TRUE))


def test_iter_E_examples():
    g = Group.of(1, 2)
    assert iter_E(g, 0, Lam(1)) == Lam(1)
    assert iter_E(g, 1, Lam(1)) == E(g, Lam(1))
    assert iter_E(g, 2, Lam(1)) == E(g, E(g, Lam(1)))


def test_def_E_expansion_nesting():
    assert def_E_expansion(Group.of(1), phi) == K(1, phi)
    assert def_E_expansion(Group.of(1, 2), phi) == And(K(1, phi), K(2, phi))
    assert def_E_expansion(G3, phi) == And(K(1, phi), And(K(2, phi), K(3, phi)))


def test_iff_is_expanded():
    assert iff(Mu(1), Mu(2)) == And(Imp(Mu(1), Mu(2)), Imp(Mu(2), Mu(1)))


def test_is_physical_examples():
    assert is_physical(Lam(3))
    assert not is_physical(K(1, Mu(1)))
    assert is_physical(And(Mu(1), Not(Eps(2))))
    assert not is_physical(Prop("x", is_physical=False))


def test_boolean_skeleton_examples():
    k = K(1, phi)
    sk, binding = boolean_skeleton(Imp(k, k))
    p0 = placeholder(0)
    assert sk == Imp(p0, p0) and binding == {p0: k}
    sk, binding = boolean_skeleton(And(Mu(1), K(1, Mu(1))))
    assert sk == And(placeholder(0), placeholder(1))
    assert binding == {placeholder(0): Mu(1), placeholder(1): K(1, Mu(1))}
    sk, binding = boolean_skeleton(Or(FALSE, Eps(2)))
    assert sk == Or(Bot(), placeholder(0)) and binding == {placeholder(0): Eps(2)}


def test_formulas_are_immutable():
    f = K(1, phi)
    with pytest.raises(dataclasses.FrozenInstanceError):
        f.agent = 2  # type: ignore[misc]


def test_size_depth_and_events():
    f = Imp(K(1, Mu(1)), Box(STAR, Mu(2)))
    assert size(f) == 5
    assert depth(f) == 2
    assert mentions_event(f) and not mentions_event(K(1, Mu(1)))
    assert len(list(subformulas(f))) == 5


@given(formulas)
def test_equality_agrees_with_hash_and_rebuild(f):
    g = substitute(*boolean_skeleton(f))
    assert g == f and hash(g) == hash(f)


@given(formulas, st.integers(0, 4), st.integers(0, 4))
def test_iter_box_additive(f, a, b):
    assert iter_box(STAR, a + b, f) == iter_box(STAR, a, iter_box(STAR, b, f))


@given(groups, formulas, st.integers(0, 4), st.integers(0, 4))
def test_iter_E_additive(g, f, a, b):
    assert iter_E(g, a + b, f) == iter_E(g, a, iter_E(g, b, f))


@given(groups, formulas)
def test_def_E_deterministic(g, f):
    assert def_E_expansion(g, f) == def_E_expansion(Group(g.members), f)


@given(formulas)
def test_physical_is_hereditary(f):
    if is_physical(f):
        assert all(is_physical(s) for s in subformulas(f))


@given(formulas)
def test_skeleton_is_propositional(f):
    sk, binding = boolean_skeleton(f)
    assert all(is_physical(s) for s in subformulas(sk))
    assert len(set(binding.values())) == len(binding)
