"""Command line entry point: ``bnsat {solve,gen,analyze,bench,psweep}``.

Exit codes for ``solve``: 10 solved, 20 budget exhausted, 1 input error.
``analyze`` exits 0 when the verdict holds and 3 when a check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis, harness
from .formula import FormulaError, GenSpec, generate_with_witness, read_dimacs, write_dimacs
from .mapping import compile_formula, describe
from .solvers import ALGORITHMS, GsatParams, SolveBudget, solve

EXIT_SOLVED, EXIT_EXHAUSTED, EXIT_ERROR, EXIT_CHECK_FAILED = 10, 20, 1, 3


def model_line(model) -> str:
    return "v " + " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(model)) + " 0"


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys use option names with ``_`` or ``-``."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _budget(args) -> SolveBudget:
    return SolveBudget(max_iterations=args.max_iter, restart_coefficient=args.restart_coeff,
                       wall_clock_limit=args.time_limit, max_micro_updates=args.max_micro)


def _add_budget_flags(p: argparse.ArgumentParser, max_iter: int = 10 ** 6) -> None:
    p.add_argument("--max-iter", type=int, default=max_iter, help="cap on native iterations")
    p.add_argument("--max-micro", type=int, default=None, help="cap on node evaluations")
    p.add_argument("--restart-coeff", type=float, default=1.0,
                   help="restart PBN/ABN every coeff * n^2 transitions")
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock seconds per run")
    p.add_argument("--max-flips", type=int, default=None, help="GSAT flips per try (default 5n)")


def cmd_solve(args) -> int:
    try:
        f = read_dimacs(args.input, tautologies=args.tautologies)
    except (OSError, FormulaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = solve(f, args.algo, _budget(args), args.seed, p=args.p,
                gsat=GsatParams(max_flips=args.max_flips))
    rec = out.to_record()
    if args.format == "json":
        if out.solved:
            print(model_line(out.model))
        print(json.dumps(rec))
    else:
        print("s SATISFIABLE" if out.solved else "s UNKNOWN")
        if out.solved:
            print(model_line(out.model))
        for k, v in rec.items():
            print(f"c {k}: {v}")
    return EXIT_SOLVED if out.solved else EXIT_EXHAUSTED


def cmd_gen(args) -> int:
    try:
        spec = GenSpec(args.n, args.m, args.k, args.forced, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.emit_witness and not (args.forced and args.out):
        print("error: --emit-witness needs --forced and --out", file=sys.stderr)
        return EXIT_ERROR
    f, witness = generate_with_witness(spec)
    text = write_dimacs(f, comments=[f.source_name])
    if args.out:
        Path(args.out).write_text(text)
        if args.emit_witness:
            Path(str(args.out) + ".witness").write_text(model_line(witness) + "\n")
    else:
        sys.stdout.write(text)
    return 0


def cmd_analyze(args) -> int:
    try:
        f = read_dimacs(args.input, tautologies=args.tautologies)
        net = compile_formula(f)
        if args.mode == "graph":
            graph = analysis.build_transition_graph(net)
            report = analysis.classify(graph)
            if args.dot:
                Path(args.dot).write_text(analysis.export_dot(graph))
            payload = report.to_dict()
            payload["functions"] = describe(net)
            print(json.dumps(payload, indent=2))
            return 0
        if args.mode == "prop1":
            res = analysis.check_prop1(f)
            print(json.dumps({"ok": res.ok, "counterexample":
                              None if res.counterexample is None
                              else "".join(map(str, res.counterexample))}))
            return 0 if res.ok else EXIT_CHECK_FAILED
        chain = analysis.build_markov_chain(net, args.chain, args.p if args.chain == "pbn" else None)
        sols = analysis.brute_force_solutions(f)
        res = analysis.check_absorption(chain, sols, f)
        if args.dot:
            Path(args.dot).write_text(analysis.export_dot(chain))
        print(json.dumps({
            "ok": res.ok, "vacuous": res.vacuous, "absorbing_match": res.absorbing_match,
            "stuck_states": ["".join(map(str, s)) for s in res.stuck_states],
            "flip_edge_violations": ["".join(map(str, s)) for s in res.flip_edge_violations],
            "max_row_sum_error": float(abs(chain.row_sums() - 1.0).max()),
        }))
        return 0 if res.ok else EXIT_CHECK_FAILED
    except (OSError, FormulaError, analysis.CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _parse_rows(spec: str, instances: int, seed: int) -> tuple[harness.BenchRow, ...]:
    rows = []
    for item in spec.split(","):
        n, _, m = item.strip().lower().partition("x")
        rows.append(harness.BenchRow(int(n), int(m), instances, seed))
    return tuple(rows)


def cmd_bench(args) -> int:
    plan = harness.BenchPlan(
        rows=_parse_rows(args.rows, args.instances, args.seed),
        algorithms=tuple(a.strip() for a in args.algos.split(",") if a.strip()),
        budget=_budget(args), gsat=GsatParams(max_flips=args.max_flips))
    report = harness.run_bench(plan, args.threads)
    paths = harness.write_report(report, args.out_dir)
    sys.stdout.write(harness.markdown_table(report))
    print(f"raw runs: {paths['raw']}")
    return 0


def cmd_psweep(args) -> int:
    grid = [float(x) for x in args.grid.split(",")]
    cells, report = harness.run_p_sweep(args.n, args.m, grid, args.instances, _budget(args),
                                        args.seed, args.threads)
    text = harness.sweep_csv(cells)
    if args.out:
        Path(args.out).write_text(text)
        Path(args.out).with_suffix(".runs.csv").write_text(harness.raw_csv(report.runs))
    sys.stdout.write(text)
    print(f"best p: {harness.best_p(cells):g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bnsat", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file supplying option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a DIMACS CNF file")
    p.add_argument("input", help="CNF path or - for stdin")
    p.add_argument("--algo", choices=ALGORITHMS, default="abn")
    p.add_argument("--p", type=float, default=0.2, help="PBN function probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--tautologies", choices=("reject", "drop"), default="reject")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate a random k-SAT instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--forced", action="store_true", help="plant a hidden satisfying assignment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--emit-witness", action="store_true",
                   help="write the planted assignment to OUT.witness")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="exhaustive state-space analysis")
    p.add_argument("input")
    p.add_argument("--mode", choices=("graph", "prop1", "absorption"), default="graph")
    p.add_argument("--chain", choices=("pbn", "abn"), default="pbn")
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--dot", help="write a Graphviz file")
    p.add_argument("--tautologies", choices=("reject", "drop"), default="reject")
    p.set_defaults(func=cmd_analyze)

    for name, func in (("bench", cmd_bench), ("psweep", cmd_psweep)):
        p = sub.add_parser(name, help="benchmark rows of forced 3-SAT" if name == "bench"
                           else "PBN solved share over a grid of p")
        if name == "bench":
            p.add_argument("--rows", default="50x100,50x150,50x215", help="e.g. 50x100,80x160")
            p.add_argument("--algos", default="abn,pbn:0.2,gsat")
            p.add_argument("--out-dir", default="bench_out")
        else:
            p.add_argument("--n", type=int, default=50)
            p.add_argument("--m", type=int, default=150)
            p.add_argument("--grid", default="0.05,0.1,0.2,0.35,0.5,0.8")
            p.add_argument("--out", help="CSV path; raw runs go next to it")
        p.add_argument("--instances", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker processes (default ${harness.THREADS_ENV} or 1)")
        _add_budget_flags(p, max_iter=10 ** 9)
        p.set_defaults(func=func, time_limit=10.0, max_micro=10 ** 6)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            typed = {}
            for act in sp._actions:
                if act.dest in values:
                    raw = values[act.dest]
                    if act.type is not None:
                        typed[act.dest] = act.type(raw)
                    elif isinstance(act.const, bool):
                        typed[act.dest] = raw.lower() in ("1", "true", "yes", "on")
                    else:
                        typed[act.dest] = raw
            sp.set_defaults(**typed)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
