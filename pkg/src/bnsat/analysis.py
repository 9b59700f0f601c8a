"""Exhaustive state-space analysis for small networks.

States are indexed as integers with bit ``i`` holding ``x_{i+1}``
(little-endian in variable order); the same convention is used by every
export in this module.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .formula import Formula, evaluate_formula, satisfied_mask, state_str
from .mapping import Network, compile_formula, eval_all_batch, is_fixed_point

GRAPH_CAP = 20
PBN_CHAIN_CAP = 14
ABN_CHAIN_CAP = 16


class CapExceeded(ValueError):
    pass


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapExceeded(f"{what} needs n <= {cap} (got n = {n}); the state space has 2^n states")


def all_states(n: int) -> np.ndarray:
    """``(2^n, n)`` matrix whose row ``k`` is the state with index ``k``."""
    idx = np.arange(2 ** n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(bool)


def state_index(state) -> int:
    return sum(1 << i for i, b in enumerate(state) if b)


def index_state(k: int, n: int) -> tuple[int, ...]:
    return tuple((k >> i) & 1 for i in range(n))


def _indices(states: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(states.shape[1], dtype=np.int64)
    return states.astype(np.int64) @ weights


# --- synchronous transition graph -------------------------------------------------

@dataclass(frozen=True)
class TransitionGraph:
    n: int
    successor: np.ndarray  # successor[k] = index of the synchronous image of state k


def build_transition_graph(net: Network, cap: int = GRAPH_CAP) -> TransitionGraph:
    _check_cap(net.n, cap, "transition graph")
    return TransitionGraph(net.n, _indices(eval_all_batch(net, all_states(net.n))))


@dataclass(frozen=True)
class Attractor:
    states: tuple[tuple[int, ...], ...]  # cycle order, starting from the lowest index
    basin_size: int

    @property
    def period(self) -> int:
        return len(self.states)


@dataclass
class AttractorReport:
    n: int
    attractors: list[Attractor] = field(default_factory=list)
    basin_of: np.ndarray | None = field(default=None, repr=False)  # attractor id per state

    @property
    def fixed_points(self) -> list[tuple[int, ...]]:
        return [a.states[0] for a in self.attractors if a.period == 1]

    @property
    def cycles(self) -> list[tuple[tuple[tuple[int, ...], ...], int]]:
        return [(a.states, a.period) for a in self.attractors if a.period > 1]

    @property
    def basin_sizes(self) -> dict[tuple[tuple[int, ...], ...], int]:
        return {a.states: a.basin_size for a in self.attractors}

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "fixed_points": [state_str(s) for s in self.fixed_points],
            "cycles": [{"states": [state_str(s) for s in states], "period": period}
                       for states, period in self.cycles],
            "attractors": [{"states": [state_str(s) for s in a.states], "period": a.period,
                            "basin_size": a.basin_size} for a in self.attractors],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def classify(graph: TransitionGraph) -> AttractorReport:
    """Find every attractor of a deterministic map and the exact size of its basin."""
    succ = graph.successor.tolist()
    size = len(succ)
    # 0 = unseen, 1 = on the current path, 2 = finished
    mark = bytearray(size)
    cycles: list[list[int]] = []
    for start in range(size):
        if mark[start]:
            continue
        path = []
        k = start
        while not mark[k]:
            mark[k] = 1
            path.append(k)
            k = succ[k]
        if mark[k] == 1:
            loop = path[path.index(k):]
            first = loop.index(min(loop))
            cycles.append(loop[first:] + loop[:first])
        for k in path:
            mark[k] = 2
    cycles.sort(key=lambda c: (len(c), c[0]))

    # basins by breadth-first search over predecessors from each attractor
    order = np.argsort(graph.successor, kind="stable")
    bounds = np.searchsorted(graph.successor[order], np.arange(size + 1))
    order, bounds = order.tolist(), bounds.tolist()
    basin_of = np.full(size, -1, dtype=np.int64)
    attractors = []
    for a, cyc in enumerate(cycles):
        queue = deque(cyc)
        for k in cyc:
            basin_of[k] = a
        count = len(cyc)
        while queue:
            k = queue.popleft()
            for pred in order[bounds[k]:bounds[k + 1]]:
                if basin_of[pred] < 0:
                    basin_of[pred] = a
                    count += 1
                    queue.append(pred)
        attractors.append(Attractor(tuple(index_state(k, graph.n) for k in cyc), count))
    return AttractorReport(graph.n, attractors, basin_of)


# --- fixed points versus models ----------------------------------------------------

def brute_force_solutions(f: Formula, cap: int = GRAPH_CAP) -> set[tuple[int, ...]]:
    """All models by direct enumeration, independent of the network."""
    _check_cap(f.num_vars, cap, "brute-force enumeration")
    states = all_states(f.num_vars)
    return {tuple(int(b) for b in row) for row in states[satisfied_mask(f, states)]}


def brute_force_solutions_naive(f: Formula) -> set[tuple[int, ...]]:
    """Same as :func:`brute_force_solutions` via itertools and per-clause evaluation."""
    return {bits for bits in product((0, 1), repeat=f.num_vars)
            if evaluate_formula(f, bits).satisfied}


@dataclass(frozen=True)
class Prop1Result:
    ok: bool
    counterexample: tuple[int, ...] | None = None
    fixed_points: frozenset = frozenset()
    solutions: frozenset = frozenset()


def fixed_points_exhaustive(net: Network) -> set[tuple[int, ...]]:
    """Fixed points by calling :func:`is_fixed_point` on every state."""
    return {bits for bits in product((0, 1), repeat=net.n) if is_fixed_point(net, bits)}


def check_prop1(f: Formula, cap: int = GRAPH_CAP) -> Prop1Result:
    """Compare the network's fixed points with the formula's models over all 2^n states."""
    _check_cap(f.num_vars, cap, "fixed-point/model comparison")
    net = compile_formula(f)
    states = all_states(f.num_vars)
    fixed = np.all(eval_all_batch(net, states) == states, axis=1)
    fps = {tuple(int(b) for b in row) for row in states[fixed]}
    sols = brute_force_solutions(f, cap)
    diff = sorted(fps ^ sols)
    return Prop1Result(not diff, diff[0] if diff else None, frozenset(fps), frozenset(sols))


# --- Markov chains ----------------------------------------------------------------

@dataclass(frozen=True)
class MarkovChain:
    n: int
    kind: str  # "pbn" or "abn"
    p: float | None
    rows: tuple[tuple[tuple[int, float], ...], ...]  # per state: (successor, prob) with prob > 0

    def row_sums(self) -> np.ndarray:
        return np.array([sum(pr for _, pr in row) for row in self.rows])

    def absorbing_states(self) -> list[int]:
        return [k for k, row in enumerate(self.rows) if len(row) == 1 and row[0][0] == k]

    def to_dense(self) -> np.ndarray:
        P = np.zeros((len(self.rows), len(self.rows)))
        for k, row in enumerate(self.rows):
            for j, pr in row:
                P[k, j] += pr
        return P


def build_markov_chain(net: Network, kind: str, p: float | None = None,
                       cap: int | None = None) -> MarkovChain:
    """Exact transition probabilities of the probabilistic or asynchronous dynamics.

    ``kind="pbn"``: each node independently takes its image value with
    probability ``p``. ``kind="abn"``: one node chosen uniformly at random is
    updated (a single micro-transition).
    """
    n = net.n
    if kind == "pbn":
        if p is None or not 0.0 < p <= 1.0:
            raise ValueError("a PBN chain needs p in (0, 1]")
        _check_cap(n, PBN_CHAIN_CAP if cap is None else cap, "PBN chain")
    elif kind == "abn":
        _check_cap(n, ABN_CHAIN_CAP if cap is None else cap, "ABN chain")
    else:
        raise ValueError(f"unknown chain kind {kind!r}")
    states = all_states(n)
    disagree = (eval_all_batch(net, states) != states).tolist()
    rows = []
    for k in range(2 ** n):
        flips = [1 << i for i in range(n) if disagree[k][i]]
        if kind == "abn":
            row = {k: (n - len(flips)) / n} if len(flips) < n else {}
            for bit in flips:
                row[k ^ bit] = 1.0 / n
        else:
            row = _pbn_row(k, flips, p)
        rows.append(tuple(sorted(row.items())))
    return MarkovChain(n, kind, p if kind == "pbn" else None, tuple(rows))


def _pbn_row(k: int, flips: list[int], p: float) -> dict[int, float]:
    d = len(flips)
    row = {}
    for mask in range(2 ** d):
        taken = bin(mask).count("1")
        prob = p ** taken * (1.0 - p) ** (d - taken)
        if prob > 0.0:
            target = k
            for b in range(d):
                if mask >> b & 1:
                    target ^= flips[b]
            row[target] = prob
    return row


@dataclass(frozen=True)
class AbsorptionResult:
    ok: bool
    vacuous: bool = False  # no solutions: the convergence hypothesis does not apply
    absorbing_match: bool = True
    stuck_states: tuple[tuple[int, ...], ...] = ()
    flip_edge_violations: tuple[tuple[int, ...], ...] = ()


def check_absorption(chain: MarkovChain, solutions, formula: Formula | None = None) -> AbsorptionResult:
    """Certify that the chain is absorbed into ``solutions`` with probability 1.

    Checks that the absorbing states are exactly the solutions and that every
    state reaches one of them along positive-probability edges. When the
    formula is given, also checks that every non-solution state has an edge
    flipping a single variable of one of its unsatisfied clauses.
    """
    n = chain.n
    sol_idx = {state_index(s) for s in solutions}
    absorbing = set(chain.absorbing_states())
    match = absorbing == sol_idx
    if not sol_idx:
        return AbsorptionResult(ok=match, vacuous=True, absorbing_match=match)

    size = len(chain.rows)
    preds: list[list[int]] = [[] for _ in range(size)]
    for k, row in enumerate(chain.rows):
        for j, pr in row:
            if pr > 0.0 and j != k:
                preds[j].append(k)
    reached = bytearray(size)
    queue = deque(absorbing)
    for k in absorbing:
        reached[k] = 1
    while queue:
        k = queue.popleft()
        for pred in preds[k]:
            if not reached[pred]:
                reached[pred] = 1
                queue.append(pred)
    stuck = tuple(index_state(k, n) for k in range(size) if not reached[k])

    violations = []
    if formula is not None:
        for k, row in enumerate(chain.rows):
            if k in sol_idx:
                continue
            bits = index_state(k, n)
            unsat = evaluate_formula(formula, bits).unsat_indices
            movable = {abs(lit) - 1 for j in unsat for lit in formula.clauses[j]}
            targets = {j for j, pr in row if pr > 0.0}
            if not any(k ^ (1 << v) in targets for v in movable):
                violations.append(bits)
    return AbsorptionResult(ok=match and not stuck and not violations, vacuous=False,
                            absorbing_match=match, stuck_states=stuck,
                            flip_edge_violations=tuple(violations))


# --- DOT export -------------------------------------------------------------------

def export_dot(obj: TransitionGraph | MarkovChain, name: str = "bn") -> str:
    """Graphviz description; nodes are labelled by bitstrings ``x1..xn``, fixed points doubled."""
    if isinstance(obj, TransitionGraph):
        n = obj.n
        edges = [(k, int(j), None) for k, j in enumerate(obj.successor)]
        fixed = {k for k, j, _ in edges if k == j}
    else:
        n = obj.n
        edges = [(k, j, pr) for k, row in enumerate(obj.rows) for j, pr in row]
        fixed = set(obj.absorbing_states())
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    for k in range(2 ** n):
        label = state_str(index_state(k, n))
        shape = ' shape=doublecircle style=filled fillcolor="#c8e6c9"' if k in fixed else ""
        lines.append(f'  s{k} [label="{label}"{shape}];')
    for k, j, pr in edges:
        attr = f' [label="{pr:.4g}"]' if pr is not None else ""
        lines.append(f"  s{k} -> s{j}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
