"""Command-line entry point: ``infpset {run,fuzz,laws,memory}``.

Exit codes: 0 success, 1 a check failed (assertion, convergence,
counterexample), 2 bad input (missing file, parse error, out-of-range
parameter).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Sequence

from . import laws
from .baselines import memory_workload
from .netsim import (
    DEFAULT_SEED,
    FaultPolicy,
    ScenarioError,
    ScenarioParseError,
    load_scenario,
    run_fuzz,
    run_scenario,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SWEEP = (1, 2, 4, 8)


class UsageError(Exception):
    pass


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def _emit(args, report: dict, render) -> None:
    if args.format == "json":
        print(_dump(report))
    else:
        print(render(report))


def _seed(args) -> int:
    if args.random_seed:
        return int.from_bytes(os.urandom(4), "big")
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    return args.seed


def _policy(args) -> FaultPolicy:
    try:
        return FaultPolicy(args.p_drop, args.duplicate, args.max_reorder)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"expected non-negative integers, got {text!r}")
    return values


# -- run --------------------------------------------------------------------


def _render_scenario(r: dict) -> str:
    lines = [f"scenario {r['scenario']} (seed {r['seed']}): {'PASS' if r['passed'] else 'FAIL'}"]
    for a in r["assertions"]:
        lines.append(f"  {'ok  ' if a['passed'] else 'FAIL'} line {a['line']}: {a['text']}  [{a['detail']}]")
    for rid, rep in r["replicas"].items():
        state = rep["state"].replace("\t", ":").replace("\n", " ").strip() or "{}"
        flag = " (crashed)" if rep["crashed"] else ""
        lines.append(f"  {rid}{flag}: {state}")
    lines.append(f"  converged: {r['converged']}  oracle agreement: {r['oracleAgreement']}")
    ch = r["channel"]
    lines.append(
        f"  messages: sent {ch['sent']}, delivered {ch['delivered']}, dropped {ch['dropped']}, "
        f"duplicated {ch['duplicated']}"
    )
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        script = load_scenario(args.scenario)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioParseError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_scenario(script, _seed(args), _policy(args))
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(args, report.to_dict(), _render_scenario)
    for a in report.assertions:
        if not a["passed"]:
            print(f"assertion failed at line {a['line']}: {a['text']}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- fuzz -------------------------------------------------------------------


def _render_fuzz(r: dict) -> str:
    lines = []
    for run in r["runs"]:
        p = run["params"]
        status = "converged" if run["converged"] else "DIVERGED"
        lines.append(
            f"seed {p['seed']}: {status}, digest {run['digest'][:16]}, "
            f"{run['divergenceBeforeQuiesce']['distinctStates']} distinct states before quiesce, "
            f"{len(run['crashes'])} crash(es), quiesce rounds {run['quiesceRounds']}"
        )
        for problem in run["lostOps"]:
            lines.append(f"  LOST: {problem}")
        for row in run["oracleDisagreements"]:
            lines.append(f"  ORACLE: {row}")
    lines.append(f"{r['converged']}/{len(r['runs'])} runs converged")
    return "\n".join(lines)


def cmd_fuzz(args) -> int:
    if args.replicas < 2:
        raise UsageError("--replicas must be >= 2")
    if args.ops < 0 or args.universe < 1 or args.runs < 1 or args.crashes < 0:
        raise UsageError("--ops/--crashes must be >= 0, --universe and --runs >= 1")
    policy = _policy(args)
    seed = _seed(args)
    runs = [
        run_fuzz(args.replicas, args.ops, args.universe, policy, seed + k, crashes=args.crashes)
        for k in range(args.runs)
    ]
    report = {"runs": [r.to_dict() for r in runs], "converged": sum(r.converged for r in runs)}
    _emit(args, report, _render_fuzz)
    if not all(r.ok for r in runs):
        for r in runs:
            if not r.ok:
                print(f"error: seed {r.params['seed']} failed:\n{_dump(r.to_dict())}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- laws -------------------------------------------------------------------


def _render_laws(r: dict) -> str:
    sp = r["space"]
    lines = [f"state space: {sp['elements']} x counters 1..{sp['maxCounter']} ({sp['states']} states)"]
    for rep in r["reports"]:
        status = "PASS" if rep["passed"] else "FAIL"
        note = f" ({'; '.join(rep['notes'])})" if rep["notes"] else ""
        lines.append(
            f"{status} {rep['lawName']}: {rep['casesChecked']} cases, "
            f"{len(rep['counterexamples'])} counterexamples{note}"
        )
        for cx in rep["counterexamples"][:5]:
            lines.append(f"    {cx['clause']}: {[s.replace(chr(10), ' ') for s in cx['states']]}")
    for rep in r.get("selfTests", []):
        found = len(rep["counterexamples"])
        lines.append(f"{'PASS' if found else 'FAIL'} mutant {rep['lawName']}: {found} counterexamples found")
    return "\n".join(lines)


def cmd_laws(args) -> int:
    try:
        space = laws.StateSpace.of_size(args.elements, args.max_counter)
    except laws.SpaceTooLargeError as exc:
        print(f"error: refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 <= args.phase_depth <= 3:
        raise UsageError("--phase-depth must be between 0 and 3")
    if args.histories < 0:
        raise UsageError("--histories must be >= 0")
    seed = _seed(args)

    reports = [laws.check_partial_order(space), laws.check_lub(space), laws.check_monotonicity(space)]
    if args.phase_depth:
        histories = laws.sample_histories(args.histories, elements=space.elements, seed=seed)
        reports.append(laws.check_phase_equivalence(args.phase_depth, histories))
        single = laws.sample_single_phase_histories(args.histories, elements=space.elements, seed=seed)
        reports.append(laws.check_two_phase_agreement(single))
    report = {
        "space": {"elements": list(space.elements), "maxCounter": space.max_counter, "states": space.size},
        "seed": seed,
        "reports": [r.to_dict() for r in reports],
    }
    ok = all(r.passed for r in reports)
    if args.self_test:
        mutants = laws.run_self_tests(space)
        report["selfTests"] = [r.to_dict() for r in mutants.values()]
        ok = ok and all(r.counterexamples for r in mutants.values())
    _emit(args, report, _render_laws)
    return EXIT_OK if ok else EXIT_FAIL


# -- memory -----------------------------------------------------------------


def _render_memory(r: dict) -> str:
    names = r["structures"]
    header = f"{'m':>3} {'k':>3} {'n':>3}  " + "  ".join(f"{n:>9}" for n in names)
    lines = ["metadata tokens (stored atoms; see README for the counting model)", header]
    for row in r["rows"]:
        cells = "  ".join(f"{row['tokens'][n]:>9}" for n in names)
        lines.append(f"{row['elements']:>3} {row['alternations']:>3} {row['concurrentAdds']:>3}  {cells}")
    return "\n".join(lines)


def cmd_memory(args) -> int:
    if args.elements < 0:
        raise UsageError("--elements must be >= 0")
    rows = []
    for k in args.alternations:
        for n in args.concurrent_adds:
            row = memory_workload(args.elements, k, n)
            rows.append(
                {"elements": row.elements, "alternations": k, "concurrentAdds": n, "tokens": row.tokens}
            )
    report = {"structures": list(rows[0]["tokens"]) if rows else [], "rows": rows}
    _emit(args, report, _render_memory)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"default {DEFAULT_SEED}")
    common.add_argument("--random-seed", action="store_true", help="draw a fresh seed (reported in the output)")

    faults = argparse.ArgumentParser(add_help=False)
    faults.add_argument("--p-drop", type=float, default=0.0)
    faults.add_argument("--duplicate", type=float, default=0.0)
    faults.add_argument("--max-reorder", type=int, default=0)

    parser = argparse.ArgumentParser(prog="infpset", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common, faults], help="execute a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fuzz", parents=[common], help="random convergence runs")
    p.add_argument("--replicas", type=int, default=5)
    p.add_argument("--ops", type=int, default=200)
    p.add_argument("--universe", type=int, default=10)
    p.add_argument("--p-drop", type=float, default=0.3)
    p.add_argument("--duplicate", type=float, default=0.2)
    p.add_argument("--max-reorder", type=int, default=10)
    p.add_argument("--crashes", type=int, default=1, help="crash/recover pairs per run")
    p.add_argument("--runs", type=int, default=1, help="repetitions with seeds seed, seed+1, ...")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("laws", parents=[common], help="lattice-law suites over a bounded state space")
    p.add_argument("--elements", type=int, default=2)
    p.add_argument("--max-counter", type=int, default=3)
    p.add_argument("--phase-depth", type=int, default=2, help="0 skips the phase-set suites")
    p.add_argument("--histories", type=int, default=500)
    p.add_argument("--self-test", action="store_true", help="also run each suite against an injected fault")
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("memory", parents=[common], help="metadata footprint of each set type")
    p.add_argument("--elements", type=int, default=1, help="m: number of elements")
    p.add_argument("--alternations", type=_int_list, default=list(SWEEP), help="k values, comma-separated")
    p.add_argument("--concurrent-adds", type=_int_list, default=list(SWEEP), help="n values, comma-separated")
    p.set_defaults(func=cmd_memory)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
