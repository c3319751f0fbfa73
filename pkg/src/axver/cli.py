"""Command-line front end: ``axver <command> <file>``.

Exit codes: 0 verified / coherent / feasible, 1 refuted / infeasible,
2 incoherent, 3 unsupported or contradictory axioms, 4 parse errors,
5 when ``--max-states`` is exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from axver import verifier
from axver.errors import ContradictoryAxioms, ParseError, StateLimitExceeded, UnsupportedAxiom
from axver.executions import (
    append_post_violation, build_exec_nfa, format_execution,
)
from axver.instrumentation import build_pipeline, instrument
from axver.scc_automaton import KERNEL_NAME
from axver.syntax import load

EXIT = {"verified": 0, "coherent": 0, "feasible": 0, "refuted": 1, "infeasible": 1,
        "incoherent": 2, "unsupported": 3, "parse-error": 4, "state-limit": 5}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="axver", description=(
        "Verify uninterpreted coherent programs modulo axioms on relations and functions."))
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in [
        ("verify", "check the postcondition on every feasible execution"),
        ("check-coherence", "decide whether every execution is coherent"),
        ("check-trace", "judge a single execution with the oracle and the automata"),
        ("instrument", "print the axiom-elimination pipeline and the instrumented NFA"),
        ("stats", "print sizes of the program's execution automata"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("file")
        p.add_argument("--json", action="store_true", help="print a JSON report")
        if name in ("verify", "check-coherence"):
            p.add_argument("--dump-nfa", action="store_true",
                           help="also print the instrumented execution NFA")
            p.add_argument("--max-states", type=int, default=None, metavar="N",
                           help="give up after N product states (exit 5)")
            p.add_argument("--threads", type=int, default=1, metavar="N",
                           help="expand each BFS level in N chunks concurrently")
    return ap


def _emit(report: dict, as_json: bool, out) -> None:
    if as_json:
        json.dump(report, out, indent=2, sort_keys=True)
        out.write("\n")
        return
    out.write(f"outcome: {report['outcome']}\n")
    for key, value in report.items():
        if key == "outcome" or value is None:
            continue
        if key == "counterexample":
            out.write("counterexample:\n")
            for i, a in enumerate(value, 1):
                out.write(f"  {i:3d}. {a}\n")
        elif isinstance(value, dict):
            out.write(f"{key}: " + ", ".join(f"{k}={v}" for k, v in value.items()) + "\n")
        elif isinstance(value, list):
            out.write(f"{key}:\n" + "".join(f"  {v}\n" for v in value))
        else:
            out.write(f"{key}: {value}\n")


def _error(outcome: str, exc: Exception, as_json: bool, out, err) -> int:
    report = {"outcome": outcome, "error": str(exc)}
    if isinstance(exc, UnsupportedAxiom):
        report["axiom"] = exc.kind
    if isinstance(exc, ParseError) and exc.line:
        report["line"], report["column"] = exc.line, exc.column
    if as_json:
        _emit(report, True, out)
    err.write(f"axver: {exc}\n")
    return EXIT[outcome]


def _program_command(args, out) -> int:
    with open(args.file, encoding="utf-8") as fh:
        source = fh.read()
    p, _sig, ax, post = load(source)
    if args.command == "stats":
        pipeline = build_pipeline(ax)
        n = build_exec_nfa(p, ax)
        inst = instrument(n, pipeline).without_epsilon()
        report = {"outcome": "ok", "variables": len(p.vars), "constants": len(p.consts),
                  "exec_nfa": {"states": n.n_states, "edges": len(n.edges)},
                  "instrumented_nfa": {"states": inst.n_states, "edges": len(inst.edges)},
                  "alphabet": len(inst.alphabet()), "pipeline": pipeline.describe(),
                  "kernel": KERNEL_NAME, "axioms_echo": ax.echo()}
        _emit(report, args.json, out)
        return 0
    if args.command == "instrument":
        pipeline = build_pipeline(ax)
        n = build_exec_nfa(p, ax)
        if post is not None:
            n = append_post_violation(n, post, ax)
        inst = instrument(n, pipeline).without_epsilon()
        if args.json:
            _emit({"outcome": "ok", "pipeline": pipeline.describe(),
                   "nfa": inst.dump().splitlines()}, True, out)
        else:
            out.write("\n".join(pipeline.describe()) + "\n" + inst.dump() + "\n")
        return 0
    kw = {"max_states": args.max_states, "threads": args.threads}
    if args.command == "check-coherence":
        verdict = verifier.check_coherence(p, ax, **kw)
    else:
        if post is None:
            raise ParseError("verify needs a post section")
        verdict = verifier.verify(p, post, ax, **kw)
    report = verdict.report()
    if verdict.witness is not None and verdict.witness != verdict.counterexample:
        report["instrumented"] = [str(a) for a in verdict.witness]
    if args.dump_nfa:
        pipeline = build_pipeline(ax)
        n = build_exec_nfa(p, ax)
        if post is not None and args.command == "verify":
            n = append_post_violation(n, post, ax)
        report["nfa"] = instrument(n, pipeline).without_epsilon().dump().splitlines()
    _emit(report, args.json, out)
    return EXIT[verdict.outcome]


def _trace_command(args, out) -> int:
    with open(args.file, encoding="utf-8") as fh:
        rho, ax = verifier.load_trace(fh.read())
    result = verifier.check_trace(rho, ax)
    report = result.report()
    report["trace"] = format_execution(rho)
    report["axioms_echo"] = ax.echo()
    _emit(report, args.json, out)
    return EXIT[result.outcome]


def run_cli(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = _parser().parse_args(argv)
    try:
        if args.command == "check-trace":
            return _trace_command(args, out)
        return _program_command(args, out)
    except (UnsupportedAxiom, ContradictoryAxioms) as exc:
        return _error("unsupported", exc, args.json, out, err)
    except ParseError as exc:
        return _error("parse-error", exc, args.json, out, err)
    except StateLimitExceeded as exc:
        return _error("state-limit", exc, args.json, out, err)
    except OSError as exc:
        return _error("parse-error", exc, args.json, out, err)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
