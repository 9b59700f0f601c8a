"""Benchmark runner: forced random 3-SAT rows, solver comparison tables and p-sweeps.

Every instance and every run gets its own seed derived from the row seed,
so a plan reproduces the same raw runs regardless of worker count or
scheduling order. Only the ``elapsed_ms`` column depends on the machine.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import platform
import statistics
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .formula import GenSpec, generate
from .solvers import GsatParams, SolveBudget, parse_algorithm, solve

log = logging.getLogger(__name__)

THREADS_ENV = "BNSAT_THREADS"
RAW_COLUMNS = ("row", "n", "m", "instance", "instance_seed", "algorithm", "seed", "solved",
               "iterations", "micro_updates", "restarts", "elapsed_ms")
TIMING_COLUMNS = ("elapsed_ms",)


def derive_seed(*parts: int) -> int:
    """A 64-bit seed derived from integer parts via numpy's SeedSequence."""
    lo, hi = np.random.SeedSequence([int(p) for p in parts]).generate_state(2, np.uint32)
    return int(hi) << 32 | int(lo)


def _algo_code(tag: str) -> int:
    return zlib.crc32(tag.encode())


@dataclass(frozen=True)
class BenchRow:
    n: int
    m: int
    instances: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instance count must be >= 1")

    def instance_seed(self, k: int) -> int:
        return derive_seed(self.seed, self.n, self.m, k)

    def run_seed(self, k: int, algorithm: str) -> int:
        return derive_seed(self.seed, self.n, self.m, k, _algo_code(algorithm))


@dataclass(frozen=True)
class BenchPlan:
    rows: tuple[BenchRow, ...] = ()
    algorithms: tuple[str, ...] = ("abn", "pbn:0.2", "gsat")
    budget: SolveBudget = SolveBudget()
    gsat: GsatParams = GsatParams()

    def __post_init__(self):
        for tag in self.algorithms:
            parse_algorithm(tag)

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class CellSummary:
    n: int
    m: int
    algorithm: str
    runs: int
    solved_pct: float
    median_elapsed_ms: float | None
    median_iterations: float | None
    median_micro_updates: float | None


@dataclass
class BenchReport:
    runs: list[dict] = field(default_factory=list)
    cells: list[CellSummary] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, n: int, m: int, algorithm: str) -> CellSummary:
        for c in self.cells:
            if (c.n, c.m, c.algorithm) == (n, m, algorithm):
                return c
        raise KeyError((n, m, algorithm))


def _run_one(task) -> dict:
    row_idx, row, k, algo, budget, gsat = task
    f = generate(GenSpec(row.n, row.m, 3, True, row.instance_seed(k)))
    return _solve_record(row_idx, row, k, f, algo, budget, gsat)


def _solve_record(row_idx, row, k, f, algo, budget, gsat) -> dict:
    seed = row.run_seed(k, algo)
    out = solve(f, algo, budget, seed, gsat=gsat)
    rec = out.to_record()
    rec.update(row=row_idx, instance=k, instance_seed=row.instance_seed(k), algorithm=algo)
    return {c: rec[c] for c in RAW_COLUMNS}


def default_workers() -> int:
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def run_bench(plan: BenchPlan, workers: int | None = None) -> BenchReport:
    workers = default_workers() if workers is None else workers
    tasks = [(ri, row, k, algo, plan.budget, plan.gsat)
             for ri, row in enumerate(plan.rows)
             for k in range(row.instances)
             for algo in plan.algorithms]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        runs = []
        for ri, row in enumerate(plan.rows):
            for k in range(row.instances):
                f = generate(GenSpec(row.n, row.m, 3, True, row.instance_seed(k)))
                for algo in plan.algorithms:
                    runs.append(_solve_record(ri, row, k, f, algo, plan.budget, plan.gsat))
                    log.debug("row %d instance %d %s done", ri, k, algo)
    order = {a: i for i, a in enumerate(plan.algorithms)}
    runs.sort(key=lambda r: (r["row"], r["instance"], order[r["algorithm"]]))
    return BenchReport(runs, summarize(runs), {
        "config_hash": plan.config_hash(),
        "machine": f"{platform.machine()} {platform.processor() or ''} {platform.python_version()}".strip(),
        "row_seeds": [row.seed for row in plan.rows],
        "budget": asdict(plan.budget),
    })


def _median(values):
    return statistics.median(values) if values else None


def summarize(runs: list[dict]) -> list[CellSummary]:
    """Per (row, algorithm) medians over all runs; unsolved runs count at their budget cap."""
    groups: dict[tuple, list[dict]] = {}
    for r in runs:
        groups.setdefault((r["row"], r["n"], r["m"], r["algorithm"]), []).append(r)
    cells = []
    for (_, n, m, algo), rs in groups.items():
        solved = sum(1 for r in rs if r["solved"])
        pct = 100.0 * solved / len(rs)
        if solved:
            med = [_median([r[c] for r in rs]) for c in ("elapsed_ms", "iterations", "micro_updates")]
        else:
            med = [None, None, None]
        cells.append(CellSummary(n, m, algo, len(rs), pct, *med))
    return cells


def raw_csv(runs: list[dict], drop_timing: bool = False) -> str:
    cols = [c for c in RAW_COLUMNS if not (drop_timing and c in TIMING_COLUMNS)]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in runs:
        w.writerow({c: int(r[c]) if c == "solved" else r[c] for c in cols})
    return buf.getvalue()


def summary_csv(cells: list[CellSummary]) -> str:
    buf = io.StringIO()
    fields = list(CellSummary.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for c in cells:
        w.writerow({k: ("" if v is None else v) for k, v in asdict(c).items()})
    return buf.getvalue()


def _fmt(x, digits=0) -> str:
    if x is None:
        return "-"
    return f"{x:.{digits}f}" if digits else f"{x:g}"


def markdown_table(report: BenchReport) -> str:
    """Table with one line per (n, m) and a time / iter. / solved triple per algorithm."""
    algos = list(dict.fromkeys(c.algorithm for c in report.cells))
    rows = list(dict.fromkeys((c.n, c.m) for c in report.cells))
    head = ["n", "m"]
    for a in algos:
        head += [f"{a} time (msec)", f"{a} iter.", f"{a} solved"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for n, m in rows:
        cells = [str(n), str(m)]
        for a in algos:
            c = report.cell(n, m, a)
            cells += [_fmt(c.median_elapsed_ms, 1), _fmt(c.median_iterations),
                      f"{c.solved_pct:g}%"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_report(report: BenchReport, out_dir, stem: str = "bench") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "raw": out / f"{stem}_runs.csv",
        "summary": out / f"{stem}_summary.csv",
        "markdown": out / f"{stem}_summary.md",
        "metadata": out / f"{stem}_meta.json",
    }
    paths["raw"].write_text(raw_csv(report.runs))
    paths["summary"].write_text(summary_csv(report.cells))
    paths["markdown"].write_text(markdown_table(report))
    paths["metadata"].write_text(json.dumps(report.metadata, indent=2, sort_keys=True) + "\n")
    return paths


# --- p sweep ------------------------------------------------------------------------

@dataclass
class SweepCell:
    p: float
    solved_pct: float
    median_iterations: float | None
    median_micro_updates: float | None


def run_p_sweep(n: int, m: int, p_grid, instances: int = 100,
                budget: SolveBudget = SolveBudget(), seed: int = 0,
                workers: int | None = None) -> tuple[list[SweepCell], BenchReport]:
    """Probabilistic solver over a grid of p on one shared forced corpus."""
    grid = [float(p) for p in p_grid]
    for p in grid:
        if not 0.0 < p < 1.0:
            raise ValueError(f"sweep values must lie in (0, 1), got {p}")
    plan = BenchPlan((BenchRow(n, m, instances, seed),), tuple(f"pbn:{p:g}" for p in grid), budget)
    report = run_bench(plan, workers)
    cells = []
    for p, tag in zip(grid, plan.algorithms):
        c = report.cell(n, m, tag)
        cells.append(SweepCell(p, c.solved_pct, c.median_iterations, c.median_micro_updates))
    return cells, report


def best_p(cells: list[SweepCell]) -> float:
    """Highest solved share first, then fewest median iterations."""
    def key(c):
        return (-c.solved_pct, float("inf") if c.median_iterations is None else c.median_iterations)
    return min(cells, key=key).p


def sweep_csv(cells: list[SweepCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "solved_pct", "median_iterations", "median_micro_updates"])
    for c in cells:
        w.writerow([f"{c.p:g}", f"{c.solved_pct:g}", _fmt(c.median_iterations),
                    _fmt(c.median_micro_updates)])
    return buf.getvalue()
