import random

import pytest
from hypothesis import given, settings
from strategies import EVENTS, formulas, random_syntax_formula

from dlck.core import (
    POINT,
    STAR,
    TRUE,
    And,
    Box,
    C,
    Group,
    Imp,
    K,
    Lam,
    Mu,
    Not,
    Or,
    Prop,
    iff,
)
from dlck.syntax import ParseError, parse_formula, print_formula


def test_documented_examples():
    assert parse_formula("K 1 [*] lambda 3") == K(1, Box(STAR, Lam(3)))
    assert parse_formula("[.] TRUE -> C {1,2} lambda 1") == Imp(Box(POINT, TRUE), C(Group.of(1, 2), Lam(1)))
    assert parse_formula("[*]^2 (mu 1 -> K 1 mu 1)") == Box(STAR, Box(STAR, Imp(Mu(1), K(1, Mu(1)))))


def test_precedence_and_associativity():
    assert parse_formula("mu 1 -> mu 2 -> mu 3") == Imp(Mu(1), Imp(Mu(2), Mu(3)))
    assert parse_formula("~mu 1 | mu 2 & mu 3") == Or(Not(Mu(1)), parse_formula("mu 2 & mu 3"))
    assert parse_formula("mu 1 <-> mu 2") == iff(Mu(1), Mu(2))
    assert parse_formula("K 1 mu 1 -> mu 1") == Imp(K(1, Mu(1)), Mu(1))


def test_aliases_and_atoms():
    assert parse_formula("[¤] TRUE") == Box(POINT, TRUE)
    assert parse_formula("¬mu 1 ∨ mu 2") == Or(Not(Mu(1)), Mu(2))
    assert parse_formula("@rain & ?idea") == And(Prop("rain", True), Prop("idea", False))
    assert parse_formula("?idea") == Prop("idea", False)
    assert parse_formula("E^0 {1} mu 1") == Mu(1)


def test_printer_compresses_iterations():
    assert print_formula(parse_formula("[*] [*] mu 1")) == "[*]^2 mu 1"
    assert print_formula(parse_formula("E {2,1} E {1,2} lambda 1")) == "E^2 {1,2} lambda 1"
    assert print_formula(parse_formula("(mu 1 -> mu 2) -> mu 3")) == "(mu 1 -> mu 2) -> mu 3"


@pytest.mark.parametrize("text,column", [
    ("K 1 (", 6),
    ("mu", 3),
    ("E {1,1} mu 1", 3),
    ("mu 1 $ mu 2", 6),
    ("mu 1 mu 2", 6),
    ("[*", 3),
])
def test_errors_carry_positions(text, column):
    with pytest.raises(ParseError) as info:
        parse_formula(text)
    assert info.value.pos + 1 == column
    assert f"column {column}" in str(info.value)


@given(formulas)
@settings(max_examples=500)
def test_parse_print_identity(f):
    assert parse_formula(print_formula(f), EVENTS) == f


@given(formulas)
@settings(max_examples=200)
def test_print_is_stable_modulo_whitespace(f):
    text = print_formula(f)
    spaced = text.replace(" ", "   ").replace("(", "( ")
    assert print_formula(parse_formula(spaced, EVENTS)) == text


def test_seeded_round_trip_deep():
    rng = random.Random(7)
    for _ in range(500):
        f = random_syntax_formula(rng, 6)
        assert parse_formula(print_formula(f), EVENTS) == f
