"""Trusted-kernel proof checker for dynamic epistemic logic with common knowledge.

Modules: ``core`` (formulas), ``syntax`` (parser/printer), ``kernel`` (the only
place judgments are minted), ``derived`` (untrusted combinators), ``muddy``
(the muddy-children theory and proofs), ``semantics`` (Kripke oracle),
``script`` (proof files) and ``cli``.
"""

from dlck.core import POINT, STAR, Formula, Group
from dlck.kernel import Judgment, ProofTree, Rule, check_tree
from dlck.muddy import Scenario, prove_concl
from dlck.syntax import parse_formula, print_formula

__version__ = "0.1.0"

__all__ = [
    "POINT", "STAR", "Formula", "Group", "Judgment", "ProofTree", "Rule", "Scenario",
    "check_tree", "parse_formula", "print_formula", "prove_concl",
]
