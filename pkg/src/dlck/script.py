"""Line-oriented proof scripts.

Example::

    theory muddy c=2 m=1
    event flip ontic

    lemma GainConn
    s1 = MC2[1] :: E {1,2,3} E {1,2,3} lambda 1 -> [*] E {1,2,3} ~eps 1
    s2 = Classical[...] :: ...
    s3 = MP(s2, s1) :: ...   ## label=IMP_le lemma=GainConn
    end

Each step names a rule, its parameters in ``[..]`` separated by ``;``, its
premise step ids in ``(..)`` and the stated conclusion after ``::``. Audit
metadata follows ``##``. The last step of a lemma is its root. Shared
subproofs are written once and cited by id.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from dlck.core import POINT, STAR, Box, EventKind, EventSym, Formula, Group
from dlck.kernel import (
    BUILTIN,
    EMPTY_THEORY,
    SIGNATURES,
    CheckError,
    Judgment,
    ProofTree,
    Rule,
    Theory,
    UnknownRule,
    check_tree,
)
from dlck.syntax import ParseError, parse_formula, print_formula


class ScriptError(ValueError):
    """Malformed script; ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


def _muddy(params: Mapping[str, int]) -> Theory:
    from dlck.muddy import Scenario, muddy_theory

    try:
        return muddy_theory(Scenario(params["c"], params["m"]))
    except KeyError as exc:
        raise ValueError(f"muddy theory needs parameter {exc.args[0]}") from None


THEORIES = {
    "muddy": _muddy,
    "empty": lambda params: EMPTY_THEORY,
}


@dataclass
class Script:
    theory: Theory = EMPTY_THEORY
    events: dict[str, EventSym] = field(default_factory=dict)
    lemmas: list[tuple[str, ProofTree]] = field(default_factory=list)
    step_ids: dict[int, tuple[str, str]] = field(default_factory=dict)
    _texts: dict[str, Formula] = field(default_factory=dict, repr=False)
    _table: dict[Formula, Formula] = field(default_factory=dict, repr=False)

    def formula(self, text: str) -> Formula:
        got = self._texts.get(text)
        if got is None:
            got = parse_formula(text, self.events, self._table)
            self._texts[text] = got
        return got

    @property
    def trees(self) -> list[ProofTree]:
        return [t for _, t in self.lemmas]

    def where(self, node: ProofTree) -> tuple[str, str] | None:
        """``(lemma, step id)`` at which ``node`` was defined."""
        return self.step_ids.get(id(node))


# -- writing -----------------------------------------------------------------

def _event_text(ev: EventSym) -> str:
    if ev == POINT:
        return "."
    if ev == STAR:
        return "*"
    return ev.name


def _param_text(value: object) -> str:
    if isinstance(value, Formula):
        return print_formula(value)
    if isinstance(value, EventSym):
        return _event_text(value)
    if isinstance(value, (Group, int)):
        return str(value)
    raise TypeError(f"cannot serialize parameter {value!r}")


def _rule_text(rule: Rule) -> str:
    if not rule.params:
        return rule.name
    return f"{rule.name}[{'; '.join(_param_text(p) for p in rule.params)}]"


def _custom_events(trees: Iterable[ProofTree]) -> dict[str, EventSym]:
    """Events other than ``*`` and ``.`` mentioned anywhere in the trees."""
    out: dict[str, EventSym] = {}
    seen: set[int] = set()
    stack: list[object] = []
    for tree in trees:
        for node in tree.nodes():
            stack.append(node.conclusion)
            stack.extend(node.rule.params)
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, EventSym):
            if x not in (POINT, STAR):
                out[x.name] = x
        elif isinstance(x, Box):
            stack.extend((x.event, x.body))
        elif isinstance(x, Formula):
            stack.extend(x.children())
    return out


def dump_script(lemmas: Iterable[tuple[str, ProofTree]], theory: Theory = EMPTY_THEORY) -> str:
    lemmas = list(lemmas)
    lines = []
    if theory.name != "empty" or theory.parameters:
        params = " ".join(f"{k}={v}" for k, v in sorted(theory.parameters.items()))
        lines.append(f"theory {theory.name} {params}".rstrip())
    for ev in _custom_events(t for _, t in lemmas).values():
        lines.append(f"event {ev.name} {ev.kind.value}")
    for name, tree in lemmas:
        lines.append("")
        lines.append(f"lemma {name}")
        ids: dict[int, str] = {}
        for k, node in enumerate(tree.nodes(), 1):
            sid = f"s{k}"
            ids[id(node)] = sid
            prem = ", ".join(ids[id(p)] for p in node.premises)
            text = f"{sid} = {_rule_text(node.rule)}"
            if node.premises:
                text += f"({prem})"
            text += f" :: {print_formula(node.conclusion)}"
            meta = []
            if node.label is not None:
                meta.append(f"label={node.label}")
            if node.lemma is not None:
                meta.append(f"lemma={node.lemma}")
            if meta:
                text += "  ## " + " ".join(meta)
            lines.append(text)
        lines.append("end")
    return "\n".join(lines) + "\n"


def save_proof(tree: ProofTree | Judgment, path: str | Path, theory: Theory = EMPTY_THEORY,
               name: str | None = None) -> None:
    if isinstance(tree, Judgment):
        tree = tree.proof
    name = name or tree.lemma or "main"
    Path(path).write_text(dump_script([(name, tree)], theory), encoding="utf-8")


def save_script(lemmas: Iterable[tuple[str, ProofTree]], path: str | Path,
                theory: Theory = EMPTY_THEORY) -> None:
    Path(path).write_text(dump_script(lemmas, theory), encoding="utf-8")


# -- reading -----------------------------------------------------------------

_STEP = re.compile(r"(?P<id>[A-Za-z_][\w]*)\s*=\s*(?P<rule>[A-Za-z_][\w]*)")
_META = re.compile(r"(label|lemma)=(\S+)")
_NAME = re.compile(r"[A-Za-z_][\w]*$")


def _split_params(text: str, start: int, lineno: int) -> tuple[list[str], int]:
    """Parse ``[a; b]`` at ``text[start]``, honouring nested brackets."""
    depth, k = 0, start
    while k < len(text):
        ch = text[k]
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                inner = text[start + 1:k]
                return [p.strip() for p in inner.split(";")], k + 1
        k += 1
    raise ScriptError("unbalanced '[' in rule parameters", lineno)


def _param(kind: str, text: str, script: Script, lineno: int) -> object:
    events = script.events
    try:
        if kind == "formula":
            return script.formula(text)
        if kind in ("agent", "nat"):
            if not text.isdigit():
                raise ValueError(f"expected a natural number, got {text!r}")
            return int(text)
        if kind == "group":
            if not (text.startswith("{") and text.endswith("}")):
                raise ValueError(f"expected a group, got {text!r}")
            ids = [int(x) for x in text[1:-1].split(",")]
            if len(set(ids)) != len(ids):
                raise ValueError(f"repeated agent in {text!r}")
            return Group.of(*ids)
        if kind == "event":
            if text in (".", "¤"):
                return POINT
            if text == "*":
                return STAR
            if _NAME.match(text):
                return events.get(text, EventSym(text))
            raise ValueError(f"expected an event, got {text!r}")
    except ParseError as exc:
        raise ScriptError(f"bad formula parameter: {exc}", lineno) from exc
    except ValueError as exc:
        raise ScriptError(str(exc), lineno) from exc
    raise ScriptError(f"unknown parameter kind {kind!r}", lineno)  # pragma: no cover


def _signature(name: str, theory: Theory, lineno: int) -> tuple[str, ...]:
    if name in BUILTIN:
        return SIGNATURES[name]
    schema = theory.schemas.get(name)
    if schema is None:
        raise UnknownRule(f"line {lineno}: unknown rule {name!r}")
    return schema.params


def _parse_step(line: str, lineno: int, script: Script,
                steps: dict[str, ProofTree]) -> tuple[str, ProofTree]:
    body, _, meta = line.partition("##")
    head, sep, concl = body.partition("::")
    if not sep:
        raise ScriptError("step lacks '::' and a conclusion", lineno)
    m = _STEP.match(head.strip())
    if m is None:
        raise ScriptError("expected 'id = RULE'", lineno)
    sid, name = m.group("id"), m.group("rule")
    if sid in steps:
        raise ScriptError(f"duplicate step id {sid!r}", lineno)
    rest = head.strip()[m.end():].strip()
    sig = _signature(name, script.theory, lineno)
    raw: list[str] = []
    if rest.startswith("["):
        raw, end = _split_params(rest, 0, lineno)
        rest = rest[end:].strip()
    if len(raw) != len(sig):
        raise ScriptError(f"{name} takes {len(sig)} parameters, got {len(raw)}", lineno)
    params = tuple(_param(kind, t, script, lineno) for kind, t in zip(sig, raw))
    premises: tuple[ProofTree, ...] = ()
    if rest:
        if not (rest.startswith("(") and rest.endswith(")")):
            raise ScriptError(f"unexpected text {rest!r}", lineno)
        refs = [r.strip() for r in rest[1:-1].split(",") if r.strip()]
        missing = [r for r in refs if r not in steps]
        if missing:
            raise ScriptError(f"dangling premise id {missing[0]!r}", lineno)
        premises = tuple(steps[r] for r in refs)
    try:
        conclusion = script.formula(concl.strip())
    except ParseError as exc:
        raise ScriptError(f"bad conclusion: {exc}", lineno) from exc
    tags = dict(_META.findall(meta))
    node = ProofTree(Rule(name, params), premises, conclusion,
                     tags.get("label"), tags.get("lemma"))
    return sid, node


def read_script(text: str, theory: Theory | None = None) -> Script:
    """Parse a script; ``theory``, when given, overrides the header."""
    script = Script()
    if theory is not None:
        script.theory = theory
        script.events.update({ev.name: ev for ev in theory.events})
    current: str | None = None
    steps: dict[str, ProofTree] = {}
    last: ProofTree | None = None
    names: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words = line.split()
        if current is None:
            if words[0] == "theory":
                if script.lemmas:
                    raise ScriptError("theory header must precede all lemmas", lineno)
                maker = THEORIES.get(words[1]) if len(words) > 1 else None
                if maker is None:
                    raise ScriptError(f"unknown theory {' '.join(words[1:])!r}", lineno)
                params = {}
                for kv in words[2:]:
                    key, eq, value = kv.partition("=")
                    if not eq or not value.isdigit():
                        raise ScriptError(f"bad theory parameter {kv!r}", lineno)
                    params[key] = int(value)
                try:
                    declared = maker(params)
                except ValueError as exc:
                    raise ScriptError(str(exc), lineno) from exc
                if theory is None:
                    script.theory = declared
                    script.events.update({ev.name: ev for ev in declared.events})
            elif words[0] == "event":
                if len(words) != 3 or words[2] not in {k.value for k in EventKind}:
                    raise ScriptError("expected 'event NAME epistemic|ontic'", lineno)
                script.events[words[1]] = EventSym(words[1], EventKind(words[2]))
            elif words[0] == "lemma":
                if len(words) != 2:
                    raise ScriptError("expected 'lemma NAME'", lineno)
                if words[1] in names:
                    raise ScriptError(f"duplicate lemma {words[1]!r}", lineno)
                current, steps, last = words[1], {}, None
                names.add(current)
            else:
                raise ScriptError(f"unexpected {words[0]!r} outside a lemma", lineno)
            continue
        if line == "end":
            if last is None:
                raise ScriptError(f"lemma {current!r} has no steps", lineno)
            script.lemmas.append((current, last))
            current = None
            continue
        sid, node = _parse_step(line, lineno, script, steps)
        steps[sid] = node
        script.step_ids[id(node)] = (current, sid)
        last = node
    if current is not None:
        raise ScriptError(f"lemma {current!r} is missing 'end'", len(text.splitlines()))
    return script


def read_script_file(path: str | Path, theory: Theory | None = None) -> Script:
    return read_script(Path(path).read_text(encoding="utf-8"), theory)


def load_script(path: str | Path) -> list[ProofTree]:
    return read_script_file(path).trees


@dataclass(frozen=True)
class LemmaResult:
    lemma: str
    ok: bool
    formula: str | None = None
    step: str | None = None
    rule: str | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        d = {"lemma": self.lemma, "verdict": "accepted" if self.ok else "rejected"}
        for key in ("formula", "step", "rule", "reason"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        return d


def check_script(script: Script, theory: Theory | None = None) -> list[LemmaResult]:
    """Kernel-check every lemma; failures name the offending step."""
    theory = theory or script.theory
    out = []
    for name, tree in script.lemmas:
        try:
            j = check_tree(tree, theory)
        except CheckError as exc:
            where = script.where(exc.node) if isinstance(exc.node, ProofTree) else None
            out.append(LemmaResult(name, False, step=where[1] if where else None,
                                   rule=exc.node.rule.name if isinstance(exc.node, ProofTree) else None,
                                   reason=exc.reason))
        else:
            out.append(LemmaResult(name, True, formula=print_formula(j.formula)))
    return out


__all__ = [
    "THEORIES",
    "LemmaResult",
    "Script",
    "ScriptError",
    "check_script",
    "dump_script",
    "load_script",
    "read_script",
    "read_script_file",
    "save_proof",
    "save_script",
]
