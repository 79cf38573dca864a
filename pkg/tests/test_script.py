import pytest
from hypothesis import given, settings
from strategies import FLIP, formulas

from dlck import derived as d
from dlck.core import TRUE, EventKind, Mu
from dlck.kernel import (
    EMPTY_THEORY,
    ProofTree,
    UnknownRule,
    check_tree,
    classical,
    gen_box,
)
from dlck.muddy import Scenario, gain_conn, muddy_theory, prove_concl
from dlck.script import (
    ScriptError,
    check_script,
    dump_script,
    load_script,
    read_script,
    save_proof,
)

S = Scenario(2, 1)
T = muddy_theory(S)


def test_empty_script(tmp_path):
    path = tmp_path / "empty.dlck"
    path.write_text("")
    assert load_script(path) == []


def test_gain_conn_replays(tmp_path):
    path = tmp_path / "gain.dlck"
    j = gain_conn(S, 1)
    save_proof(j, path, T)
    text = path.read_text()
    assert text.startswith("theory muddy c=2 m=1\n")
    assert "lemma GainConn" in text and "label=EPers" in text
    (tree,) = load_script(path)
    assert tree.conclusion == j.formula
    assert tree.label == j.proof.label and tree.lemma == "GainConn"
    assert check_tree(tree, T).formula == j.formula


def test_sharing_survives_the_round_trip():
    j = prove_concl(S, 1)
    script = read_script(dump_script([("Concl", j.proof)], T))
    (tree,) = script.trees
    assert tree.dag_size() == j.proof.dag_size()
    assert tree.tree_size() == j.proof.tree_size()


def test_mutated_rule_name_is_unknown():
    text = dump_script([("G", gain_conn(S, 1).proof)], T).replace("= MC2[", "= MC9[", 1)
    with pytest.raises(UnknownRule):
        read_script(text)


@pytest.mark.parametrize("body,message", [
    ("s1 = Classical[TRUE](s0) :: TRUE", "dangling"),
    ("s1 = Classical[TRUE] :: TRUE &", "bad conclusion"),
    ("s1 = Classical[TRUE] TRUE", "::"),
    ("s1 = Classical[TRUE :: TRUE", "unbalanced"),
    ("s1 = Classical[TRUE; TRUE] :: TRUE", "parameters"),
    ("s1 = Gen_K[x](s1) :: TRUE", "natural number"),
    ("s1 = Classical[TRUE] :: TRUE\ns1 = Classical[TRUE] :: TRUE", "duplicate"),
])
def test_malformed_steps(body, message):
    with pytest.raises(ScriptError, match=message) as info:
        read_script(f"lemma L\n{body}\nend\n")
    assert info.value.line >= 2


@pytest.mark.parametrize("text,message", [
    ("lemma L\ns1 = Classical[TRUE] :: TRUE\n", "missing 'end'"),
    ("lemma L\nend\n", "no steps"),
    ("theory nonsense\n", "unknown theory"),
    ("theory muddy c=2\n", "needs parameter"),
    ("event flip sideways\n", "epistemic|ontic"),
    ("s1 = Classical[TRUE] :: TRUE\n", "outside a lemma"),
])
def test_malformed_structure(text, message):
    with pytest.raises(ScriptError, match=message):
        read_script(text)


def test_comments_and_blank_lines():
    text = "# header comment\n\nlemma L\n# inside\ns1 = Classical[TRUE] :: TRUE\nend\n"
    (tree,) = read_script(text).trees
    assert tree.conclusion == TRUE


def test_custom_event_kind_survives():
    j = gen_box(FLIP, classical(TRUE))
    text = dump_script([("flip", j.proof)])
    assert "event flip ontic" in text
    (tree,) = read_script(text).trees
    assert tree.rule.params[0].kind is EventKind.ONTIC
    assert check_tree(tree).formula == j.formula


def test_forged_step_is_reported_by_id():
    good = d.cut(d.identity(Mu(1)), d.identity(Mu(1)))
    bad = ProofTree(good.proof.rule, good.proof.premises, Mu(2))
    script = read_script(dump_script([("forged", bad), ("fine", good.proof)]))
    forged, fine = check_script(script)
    assert not forged.ok and fine.ok
    assert forged.step == f"s{bad.dag_size()}" and forged.rule == "MP"
    assert forged.to_dict()["verdict"] == "rejected"


def test_theory_override_changes_the_verdict():
    script = read_script(dump_script([("G", gain_conn(S, 1).proof)], T))
    assert check_script(script)[0].ok
    assert not check_script(script, EMPTY_THEORY)[0].ok
    headless = dump_script([("G", gain_conn(S, 1).proof)], T).split("\n", 1)[1]
    with pytest.raises(UnknownRule):
        read_script(headless)
    assert check_script(read_script(headless, T))[0].ok


@given(formulas)
@settings(max_examples=200)
def test_identity_proofs_round_trip(f):
    j = d.identity(f)
    (tree,) = read_script(dump_script([("id", j.proof)])).trees
    assert check_tree(tree).formula == j.formula
