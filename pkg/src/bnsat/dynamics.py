"""Synchronous, probabilistic and asynchronous stepping over a compiled network."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO, Union

import numpy as np

from .formula import state_str
from .mapping import Network, eval_all, eval_node

DEFAULT_MAX_STATES = 2 ** 20


@dataclass
class StepCounters:
    micro_updates: int = 0  # single-node evaluations
    transitions: int = 0  # whole-state transitions (native unit of the engine)
    restarts: int = 0


@dataclass(frozen=True)
class PbnParams:
    """Probability ``p`` of applying a node's own function; identity otherwise."""

    p: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")


class Trajectory:
    """Visited states in insertion order with O(1) membership lookups."""

    def __init__(self, start=None):
        self.states: list[np.ndarray] = []
        self._index: dict[bytes, int] = {}
        if start is not None:
            self.append(start)

    def __len__(self):
        return len(self.states)

    def __contains__(self, state) -> bool:
        return np.asarray(state, dtype=bool).tobytes() in self._index

    @property
    def current(self) -> np.ndarray:
        return self.states[-1]

    def index(self, state) -> int:
        return self._index[np.asarray(state, dtype=bool).tobytes()]

    def append(self, state) -> None:
        state = np.asarray(state, dtype=bool)
        key = state.tobytes()
        if key in self._index:
            raise ValueError(f"state {state_str(state)} already visited")
        self._index[key] = len(self.states)
        self.states.append(state)


@dataclass(frozen=True)
class FixedPoint:
    state: np.ndarray
    steps: int  # transient length before reaching the fixed point


@dataclass(frozen=True)
class Cycle:
    states: tuple[np.ndarray, ...]
    period: int
    steps: int


@dataclass(frozen=True)
class Overflow:
    steps: int


Attractor = Union[FixedPoint, Cycle, Overflow]


def sbn_step(net: Network, state, counters: StepCounters | None = None) -> np.ndarray:
    if counters is not None:
        counters.micro_updates += net.n
    return eval_all(net, state)


def detect_attractor(net: Network, start, max_states: int = DEFAULT_MAX_STATES,
                     counters: StepCounters | None = None,
                     trace: TextIO | None = None) -> Attractor:
    """Follow the synchronous dynamics from ``start`` until a state repeats.

    ``counters.transitions`` is advanced once per step that reaches a new
    state; the final step that closes the loop is not counted.
    """
    if max_states < 1:
        raise ValueError("max_states must be >= 1")
    traj = Trajectory(start)
    if trace is not None:
        trace.write(state_str(traj.current) + "\n")
    while True:
        nxt = sbn_step(net, traj.current, counters)
        if nxt in traj:
            first = traj.index(nxt)
            steps = len(traj) - 1
            loop = tuple(traj.states[first:])
            if len(loop) == 1:
                return FixedPoint(nxt, steps)
            return Cycle(loop, len(loop), steps)
        if len(traj) >= max_states:
            return Overflow(len(traj) - 1)
        traj.append(nxt)
        if counters is not None:
            counters.transitions += 1
        if trace is not None:
            trace.write(state_str(nxt) + "\n")


def pbn_step(net: Network, state, params: PbnParams, rng: np.random.Generator,
             counters: StepCounters | None = None) -> np.ndarray:
    """Each node takes its image value with probability p, else keeps its value.

    The image is computed once from ``state``; exactly n uniforms are drawn
    from ``rng`` in node order.
    """
    state = np.asarray(state, dtype=bool)
    image = eval_all(net, state)
    take = rng.random(net.n) < params.p
    if counters is not None:
        counters.micro_updates += net.n
        counters.transitions += 1
    return np.where(take, image, state)


def abn_micro_step(net: Network, state, i: int,
                   counters: StepCounters | None = None) -> np.ndarray:
    out = np.array(state, dtype=bool)
    out[i] = eval_node(net, i, out)
    if counters is not None:
        counters.micro_updates += 1
    return out


class AsyncEngine:
    """Sequential node updates backed by per-clause true-literal counters.

    A variable's literal in an unsatisfied clause is necessarily false, so
    ``F_i(s) != s_i`` exactly when variable ``i`` occurs in an unsatisfied
    clause. A micro-step therefore only inspects the clauses where the
    variable's literal is currently false, and a flip touches only the
    variable's occurrences.
    """

    def __init__(self, net: Network, state):
        self.net = net
        self.n = net.n
        self._pos = [sorted(node.occurs_pos) for node in net.nodes]
        self._neg = [sorted(node.occurs_neg) for node in net.nodes]
        self.reset(state)

    def reset(self, state) -> None:
        self.state = [bool(b) for b in state]
        if len(self.state) != self.n:
            raise ValueError(f"state has length {len(self.state)}, expected {self.n}")
        counts = [0] * self.net.formula.num_clauses
        for j, clause in enumerate(self.net.formula.clauses):
            counts[j] = sum(1 for lit in clause if self.state[abs(lit) - 1] == (lit > 0))
        self.true_count = counts
        self.num_unsat = counts.count(0)

    def micro(self, i: int) -> bool:
        """Update node ``i`` in place; return whether its value changed."""
        counts = self.true_count
        if self.state[i]:
            falsified, satisfied = self._neg[i], self._pos[i]
        else:
            falsified, satisfied = self._pos[i], self._neg[i]
        for j in falsified:
            if counts[j] == 0:
                break
        else:
            return False
        self.state[i] = not self.state[i]
        for j in falsified:
            if counts[j] == 0:
                self.num_unsat -= 1
            counts[j] += 1
        for j in satisfied:
            counts[j] -= 1
            if counts[j] == 0:
                self.num_unsat += 1
        return True

    def macro(self, rng: np.random.Generator, counters: StepCounters | None = None) -> bool:
        """Update every node once in a fresh uniformly random order."""
        changed = False
        micro = self.micro
        for i in rng.permutation(self.n).tolist():
            if micro(i):
                changed = True
        if counters is not None:
            counters.micro_updates += self.n
            counters.transitions += 1
        return changed

    def state_array(self) -> np.ndarray:
        return np.array(self.state, dtype=bool)


def abn_macro_step(net: Network, state, rng: np.random.Generator,
                   counters: StepCounters | None = None) -> tuple[np.ndarray, bool]:
    engine = AsyncEngine(net, state)
    changed = engine.macro(rng, counters)
    return engine.state_array(), changed
