"""Command-line driver. Exit codes: 0 success, 1 logical failure, 2 usage or parse error."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from dlck import kernel, muddy, semantics
from dlck.kernel import KernelError
from dlck.muddy import Scenario
from dlck.script import ScriptError, check_script, read_script_file, save_script
from dlck.syntax import ParseError, parse_formula, print_formula

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _scenario(args: argparse.Namespace) -> Scenario:
    children, m = args.children, args.muddy
    if children is None or m is None:
        raise UsageError("--children and --muddy are required")
    if children < 1:
        raise UsageError("--children must be at least 1")
    if not 0 <= m < children:
        raise UsageError("--muddy M means M+1 muddy children, so 0 <= M < children")
    return Scenario(children - 1, m)


def _agents(args: argparse.Namespace, s: Scenario) -> list[int]:
    if getattr(args, "agent", None) is None:
        return list(s.group)
    if args.agent not in s.group:
        raise UsageError(f"--agent must be one of {s.group}")
    return [args.agent]


def _emit(args: argparse.Namespace, payload: dict, lines: list[str]) -> None:
    if args.json:
        json.dump(payload, sys.stdout, indent=2, sort_keys=False)
        sys.stdout.write("\n")
    else:
        for line in lines:
            print(line)


# -- commands ----------------------------------------------------------------

def cmd_check(args: argparse.Namespace) -> int:
    theory = None
    if args.theory is not None:
        if args.theory == "muddy":
            theory = muddy.muddy_theory(_scenario(args))
        elif args.theory == "empty":
            theory = kernel.EMPTY_THEORY
        else:
            raise UsageError(f"unknown theory {args.theory!r}")
    script = read_script_file(args.script, theory)
    results = check_script(script)
    ok = all(r.ok for r in results)
    lines = []
    for r in results:
        if r.ok:
            lines.append(f"ok      {r.lemma}: {r.formula}")
        else:
            lines.append(f"FAILED  {r.lemma}, step {r.step} ({r.rule}): {r.reason}")
    lines.append(f"{sum(r.ok for r in results)}/{len(results)} lemmas accepted")
    _emit(args, {"ok": ok, "lemmas": [r.to_dict() for r in results]}, lines)
    return OK if ok else FAIL


def cmd_prove(args: argparse.Namespace) -> int:
    s = _scenario(args)
    theory = muddy.muddy_theory(s)
    rows, lines, lemmas = [], [], []
    ok = True
    for i in _agents(args, s):
        t0 = time.perf_counter()
        j = muddy.prove_concl(s, i)
        built = time.perf_counter() - t0
        try:
            checked = kernel.check_tree(j.proof, theory)
            accepted = checked.formula == muddy.concl_formula(s, i)
            reason = None if accepted else "conclusion differs from the stated theorem"
        except KernelError as exc:
            accepted, reason = False, str(exc)
        ok &= accepted
        row = {"lemma": f"Concl_i{i}", "agent": i, "verdict": "accepted" if accepted else "rejected",
               "formula": print_formula(j.formula), "dag_size": j.proof.dag_size(),
               "tree_size": j.proof.tree_size(), "seconds": round(built, 4)}
        if reason:
            row["reason"] = reason
        if args.trace:
            row["trace"] = muddy.audit_trace(j.proof)
        rows.append(row)
        lemmas.append((f"Concl_i{i}", j.proof))
        lines.append(f"{row['verdict']:9} child {i}: |- {row['formula']}")
        lines.append(f"          {row['dag_size']} distinct steps, {row['tree_size']} as a tree")
        if args.trace:
            lines.append("          trace: " + " ; ".join(row["trace"]))
    if args.suite:
        lemmas = [(name, j.proof) for name, j in muddy.lemma_suite(s).items()]
    if args.emit:
        save_script(lemmas, args.emit, theory)
        lines.append(f"wrote {len(lemmas)} lemmas to {args.emit}")
    _emit(args, {"ok": ok, "children": s.children, "muddy": s.muddy, "proofs": rows}, lines)
    return OK if ok else FAIL


def cmd_model_check(args: argparse.Namespace) -> int:
    s = _scenario(args)
    phi = parse_formula(args.formula)
    history = semantics.parse_history(args.after)
    model = semantics.muddy_model(s).after(history)
    payload: dict = {"formula": print_formula(phi), "stage": semantics.history_text(history),
                     "actual": model.bits(model.actual), "worlds": [model.bits(w) for w in model.worlds]}
    lines = [f"stage {payload['stage']}: {len(model.worlds)} worlds left"]
    if args.all_worlds:
        values = {model.bits(w): model.holds(w, phi) for w in model.worlds}
        payload["values"] = values
        ok = all(values.values())
        lines += [f"  {w}: {'true' if v else 'false'}" for w, v in values.items()]
        verdict = "valid" if ok else "invalid"
        lines.append(f"{verdict} at this stage")
    elif not model.live:
        ok, verdict = False, "eliminated"
        lines.append(f"actual world {payload['actual']} has been eliminated")
    else:
        ok = model.holds(model.actual, phi)
        verdict = "true" if ok else "false"
        lines.append(f"{verdict} at actual world {payload['actual']}")
    payload["verdict"] = verdict
    _emit(args, payload, lines)
    return OK if ok else FAIL


def cmd_validate(args: argparse.Namespace) -> int:
    s = _scenario(args)
    theory = semantics.validate_theory(s, n_random=args.random, seed=args.seed)
    traces = [semantics.validate_judgment_trace(s, muddy.prove_concl(s, i).proof) for i in s.group]
    ok = theory.ok and all(t.ok for t in traces)
    lines = [f"theory: {theory.counts()}"]
    for f in theory.failures:
        lines.append(f"  invalid at {f.stage}/{f.points}, world {f.countermodel}: {f.rule}")
    for i, t in zip(s.group, traces):
        lines.append(f"Concl child {i}: {t.counts()}")
        for f in t.failures:
            lines.append(f"  invalid at {f.stage}/{f.points}, world {f.countermodel}: {f.formula}")
    lines.append("all valid" if ok else "INVALID")
    payload = {"ok": ok, "theory": theory.to_dict(),
               "traces": [dict(t.to_dict(), agent=i) for i, t in zip(s.group, traces)]}
    if not args.verbose:
        for part in [payload["theory"], *payload["traces"]]:
            part["findings"] = [f for f in part["findings"] if f["verdict"] != "valid"]
    _emit(args, payload, lines)
    return OK if ok else FAIL


REPORT_FIELDS = ["children", "muddy_children", "agent", "verdict", "dag_size", "tree_size", "seconds"]


def proof_size_rows(max_children: int) -> list[dict]:
    rows = []
    for children in range(1, max_children + 1):
        for m in range(children):
            s = Scenario(children - 1, m)
            theory = muddy.muddy_theory(s)
            for i in s.group:
                t0 = time.perf_counter()
                j = muddy.prove_concl(s, i)
                try:
                    kernel.check_tree(j.proof, theory)
                    verdict = "accepted"
                except KernelError:
                    verdict = "rejected"
                rows.append({"children": children, "muddy_children": s.muddy, "agent": i,
                             "verdict": verdict, "dag_size": j.proof.dag_size(), "tree_size": j.proof.tree_size(),
                             "seconds": round(time.perf_counter() - t0, 4)})
    return rows


def plot_sizes(rows: list[dict], path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.ticker import MaxNLocator

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    first = [r for r in rows if r["agent"] == 1]
    for ax, key, title in ((axes[0], "dag_size", "distinct steps"), (axes[1], "tree_size", "tree nodes")):
        for muddy_count in sorted({r["muddy_children"] for r in first}):
            pts = [(r["children"], r[key]) for r in first if r["muddy_children"] == muddy_count]
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=f"{muddy_count} muddy")
        ax.set_yscale("log")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_xlabel("children")
        ax.set_ylabel(title)
        ax.set_title(f"Concl proof size ({title})")
        ax.legend(fontsize="small")
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_report(args: argparse.Namespace) -> int:
    if not 1 <= args.max_children <= 8:
        raise UsageError("--max-children must be between 1 and 8")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = proof_size_rows(args.max_children)
    csv_path = out / "proof_sizes.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    png_path = out / "proof_sizes.png"
    plot_sizes(rows, png_path)
    ok = all(r["verdict"] == "accepted" for r in rows)
    lines = [f"{len(rows)} proofs, {'all accepted' if ok else 'SOME REJECTED'}",
             f"wrote {csv_path}", f"wrote {png_path}"]
    _emit(args, {"ok": ok, "csv": str(csv_path), "figure": str(png_path), "rows": rows}, lines)
    return OK if ok else FAIL


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--children", type=int, help="number of children (c+1)")
    scen.add_argument("--muddy", type=int, help="M, where M+1 children are muddy")

    p = argparse.ArgumentParser(prog="dlck", description="Proof checker for dynamic epistemic logic "
                                "with common knowledge, with a muddy-children prover and model checker.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common, scen], help="kernel-check a proof script")
    c.add_argument("script")
    c.add_argument("--theory", choices=["muddy", "empty"], help="override the script's theory header")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("prove-muddy", parents=[common, scen], help="generate and check Concl")
    c.add_argument("--agent", type=int)
    c.add_argument("--emit", metavar="PATH", help="write the proof(s) as a script")
    c.add_argument("--suite", action="store_true", help="with --emit, write the whole lemma suite")
    c.add_argument("--trace", action="store_true", help="print the step audit trace")
    c.set_defaults(func=cmd_prove)

    c = sub.add_parser("model-check", parents=[common, scen], help="evaluate a formula in the muddy model")
    c.add_argument("--after", default="", help='event history, e.g. ".,*,*"')
    c.add_argument("--formula", required=True)
    c.add_argument("--all-worlds", action="store_true")
    c.set_defaults(func=cmd_model_check)

    c = sub.add_parser("validate", parents=[common, scen], help="semantic soundness audit")
    c.add_argument("--random", type=int, default=200, help="random KT1 instances")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--verbose", action="store_true", help="include valid findings in --json")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("report", parents=[common], help="proof-size CSV and figure")
    c.add_argument("--max-children", type=int, default=6)
    c.add_argument("--out", default="report")
    c.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except (UsageError, ParseError, ScriptError, kernel.UnknownRule,
            semantics.ModelBudgetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
