"""Incomplete SAT solvers driven by network dynamics, plus a GSAT baseline.

Every solver takes an explicit integer seed for numpy's PCG64 generator and
returns a :class:`SolveOutcome`. Iteration counters use each algorithm's
native unit:

* ``sbn``: synchronous steps that reached a new state (the step that closes
  an attractor loop is not counted);
* ``pbn``: probabilistic steps taken;
* ``abn``: macro-transitions taken, including the one that detects the
  fixed point;
* ``gsat``: flips.

``micro_updates`` normalises across algorithms: n per synchronous,
probabilistic or macro step, and n per GSAT flip (one score lookup per
candidate variable). Counters accumulate across restarts.
"""

from __future__ import annotations

import math
import time
from dataclasses import InitVar, dataclass, field

import numpy as np

from .dynamics import (DEFAULT_MAX_STATES, AsyncEngine, PbnParams, StepCounters,
                       Trajectory, pbn_step, sbn_step)
from .formula import Formula, evaluate_formula, state_str
from .mapping import Network, clause_values, compile_formula

ALGORITHMS = ("sbn", "pbn", "abn", "gsat")


class UnsoundSolutionError(AssertionError):
    """A solver tried to report an assignment that does not satisfy the formula."""


class InconsistentDynamicsError(RuntimeError):
    """An asynchronous macro-step left the state unchanged on a non-solution."""


@dataclass(frozen=True)
class SolveBudget:
    max_iterations: int = 10 ** 6
    restart_coefficient: float = 1.0
    wall_clock_limit: float | None = None  # seconds
    max_micro_updates: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.restart_coefficient > 0:
            raise ValueError("restart_coefficient must be > 0")

    def restart_threshold(self, n: int) -> int:
        return max(1, math.ceil(self.restart_coefficient * n * n))


@dataclass(frozen=True)
class GsatParams:
    max_flips: int | None = None  # None means 5 * n
    max_tries: int | None = None  # None means until the budget runs out

    def __post_init__(self):
        if self.max_flips is not None and self.max_flips < 1:
            raise ValueError("max_flips must be >= 1")

    def flips_for(self, n: int) -> int:
        return self.max_flips if self.max_flips is not None else 5 * n


@dataclass
class SolveOutcome:
    algorithm: str
    n: int
    m: int
    seed: int
    model: np.ndarray | None
    counters: StepCounters = field(default_factory=StepCounters)
    elapsed: float = 0.0
    formula: InitVar[Formula | None] = None

    def __post_init__(self, formula):
        if self.model is not None:
            if formula is None:
                raise ValueError("a solution must be checked against its formula")
            if not evaluate_formula(formula, self.model).satisfied:
                raise UnsoundSolutionError(
                    f"{self.algorithm} returned non-model {state_str(self.model)}")

    @property
    def solved(self) -> bool:
        return self.model is not None

    def to_record(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "solved": self.solved,
            "iterations": self.counters.transitions,
            "micro_updates": self.counters.micro_updates,
            "restarts": self.counters.restarts,
            "elapsed_ms": round(self.elapsed * 1000.0, 3),
        }


class _Meter:
    """Budget bookkeeping shared by the solver loops."""

    def __init__(self, budget: SolveBudget, counters: StepCounters):
        self.budget = budget
        self.counters = counters
        self.t0 = time.perf_counter()

    def allows(self, cost: int) -> bool:
        b, c = self.budget, self.counters
        if c.transitions >= b.max_iterations:
            return False
        if b.max_micro_updates is not None and c.micro_updates + cost > b.max_micro_updates:
            return False
        if b.wall_clock_limit is not None and time.perf_counter() - self.t0 >= b.wall_clock_limit:
            return False
        return True

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0


def _random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.random(n) < 0.5


def _outcome(tag, f, seed, model, counters, meter) -> SolveOutcome:
    return SolveOutcome(tag, f.num_vars, f.num_clauses, seed, model, counters,
                        meter.elapsed(), formula=f)


def solve_sbn(f: Formula, budget: SolveBudget = SolveBudget(), seed: int = 0,
              max_states: int = DEFAULT_MAX_STATES) -> SolveOutcome:
    """Synchronous dynamics from random states, restarting whenever a cycle is entered."""
    net = compile_formula(f)
    rng = np.random.default_rng(seed)
    counters = StepCounters()
    meter = _Meter(budget, counters)
    n = f.num_vars
    while meter.allows(n):
        traj = Trajectory(_random_state(rng, n))
        while meter.allows(n):
            nxt = sbn_step(net, traj.current, counters)
            if nxt in traj:
                if traj.index(nxt) == len(traj) - 1:
                    return _outcome("sbn", f, seed, nxt, counters, meter)
                break
            if len(traj) >= max_states:
                break
            traj.append(nxt)
            counters.transitions += 1
        else:
            break
        counters.restarts += 1
    return _outcome("sbn", f, seed, None, counters, meter)


def _satisfied(net: Network, state: np.ndarray) -> bool:
    return bool(clause_values(net, state[None, :]).all())


def solve_pbn(f: Formula, params: PbnParams = PbnParams(), budget: SolveBudget = SolveBudget(),
              seed: int = 0) -> SolveOutcome:
    """Single probabilistic trajectory; a repeated state is tested against the formula."""
    net = compile_formula(f)
    rng = np.random.default_rng(seed)
    counters = StepCounters()
    meter = _Meter(budget, counters)
    n = f.num_vars
    threshold = budget.restart_threshold(n)
    tag = f"pbn(p={params.p:g})"
    state = _random_state(rng, n)
    since_restart = 0
    while meter.allows(n):
        if since_restart >= threshold:
            state = _random_state(rng, n)
            counters.restarts += 1
            since_restart = 0
        new = pbn_step(net, state, params, rng, counters)
        since_restart += 1
        if np.array_equal(new, state) and _satisfied(net, new):
            return _outcome(tag, f, seed, new, counters, meter)
        state = new
    return _outcome(tag, f, seed, None, counters, meter)


def solve_abn(f: Formula, budget: SolveBudget = SolveBudget(), seed: int = 0) -> SolveOutcome:
    """Asynchronous macro-transitions; an unchanged macro-step means a fixed point."""
    net = compile_formula(f)
    rng = np.random.default_rng(seed)
    counters = StepCounters()
    meter = _Meter(budget, counters)
    n = f.num_vars
    threshold = budget.restart_threshold(n)
    engine = AsyncEngine(net, _random_state(rng, n))
    since_restart = 0
    while meter.allows(n):
        if since_restart >= threshold:
            engine.reset(_random_state(rng, n))
            counters.restarts += 1
            since_restart = 0
        changed = engine.macro(rng, counters)
        since_restart += 1
        if not changed:
            if engine.num_unsat:
                raise InconsistentDynamicsError(
                    f"macro-step fixed {state_str(engine.state)} with "
                    f"{engine.num_unsat} unsatisfied clauses")
            return _outcome("abn", f, seed, engine.state_array(), counters, meter)
    return _outcome("abn", f, seed, None, counters, meter)


class GsatState:
    """Assignment with incremental true-literal counts and flip scores.

    ``score[v]`` is the drop in the number of unsatisfied clauses if ``v``
    were flipped (clauses it would make minus clauses it would break).
    """

    def __init__(self, f: Formula, state):
        self.clauses = f.clauses
        n = f.num_vars
        self.occ: list[list[int]] = [[] for _ in range(2 * n)]  # by literal code
        for j, c in enumerate(f.clauses):
            for lit in c:
                self.occ[_code(lit)].append(j)
        self.cvars = [[abs(lit) - 1 for lit in c] for c in f.clauses]
        self.reset(state)

    def reset(self, state) -> None:
        self.state = [bool(b) for b in state]
        self.count = [sum(1 for lit in c if self.state[abs(lit) - 1] == (lit > 0))
                      for c in self.clauses]
        self.score = [0] * len(self.state)
        self.num_unsat = 0
        for j, c in enumerate(self.clauses):
            if self.count[j] == 0:
                self.num_unsat += 1
                for v in self.cvars[j]:
                    self.score[v] += 1
            elif self.count[j] == 1:
                self.score[_sole_true(c, self.state)] -= 1

    def flip(self, v: int) -> None:
        state, count, score, cvars = self.state, self.count, self.score, self.cvars
        made = v + 1 if not state[v] else -(v + 1)  # literal of v that becomes true
        state[v] = not state[v]
        for j in self.occ[_code(made)]:
            if count[j] == 0:
                self.num_unsat -= 1
                for u in cvars[j]:
                    score[u] -= 1
                score[v] -= 1
            elif count[j] == 1:
                score[_sole_true(self.clauses[j], state, skip=v)] += 1
            count[j] += 1
        for j in self.occ[_code(-made)]:
            if count[j] == 1:
                self.num_unsat += 1
                score[v] += 1
                for u in cvars[j]:
                    score[u] += 1
            elif count[j] == 2:
                score[_sole_true(self.clauses[j], state)] -= 1
            count[j] -= 1


def solve_gsat(f: Formula, params: GsatParams = GsatParams(), budget: SolveBudget = SolveBudget(),
               seed: int = 0) -> SolveOutcome:
    """Plain GSAT: greedy best flip with sideways moves and uniform tie-breaking."""
    rng = np.random.default_rng(seed)
    counters = StepCounters()
    meter = _Meter(budget, counters)
    n = f.num_vars
    max_flips = params.flips_for(n)
    gs = GsatState(f, [False] * n)
    tries = 0
    while params.max_tries is None or tries < params.max_tries:
        if tries:
            counters.restarts += 1
        tries += 1
        gs.reset(_random_state(rng, n))
        if gs.num_unsat == 0:
            return _outcome("gsat", f, seed, np.array(gs.state), counters, meter)
        score = gs.score
        for _ in range(max_flips):
            if not meter.allows(n):
                return _outcome("gsat", f, seed, None, counters, meter)
            best = max(score)
            candidates = [v for v in range(n) if score[v] == best]
            gs.flip(candidates[int(rng.integers(len(candidates)))])
            counters.transitions += 1
            counters.micro_updates += n
            if gs.num_unsat == 0:
                return _outcome("gsat", f, seed, np.array(gs.state), counters, meter)
    return _outcome("gsat", f, seed, None, counters, meter)


def _code(lit: int) -> int:
    return 2 * (abs(lit) - 1) + (lit < 0)


def _sole_true(clause, state, skip: int = -1) -> int:
    for lit in clause:
        v = abs(lit) - 1
        if v != skip and state[v] == (lit > 0):
            return v
    raise AssertionError("clause has no true literal")


def parse_algorithm(tag: str) -> tuple[str, float | None]:
    """``"pbn:0.3"`` -> ``("pbn", 0.3)``; plain ``"pbn"`` uses p = 0.2."""
    name, _, arg = tag.strip().lower().partition(":")
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {tag!r}; expected one of {', '.join(ALGORITHMS)}")
    if name == "pbn":
        return name, float(arg) if arg else 0.2
    if arg:
        raise ValueError(f"algorithm {name} takes no parameter")
    return name, None


def solve(f: Formula, algorithm: str, budget: SolveBudget = SolveBudget(), seed: int = 0,
          p: float | None = None, gsat: GsatParams = GsatParams()) -> SolveOutcome:
    name, default_p = parse_algorithm(algorithm)
    if name == "sbn":
        return solve_sbn(f, budget, seed)
    if name == "pbn":
        return solve_pbn(f, PbnParams(p if p is not None else default_p), budget, seed)
    if name == "abn":
        return solve_abn(f, budget, seed)
    return solve_gsat(f, gsat, budget, seed)
