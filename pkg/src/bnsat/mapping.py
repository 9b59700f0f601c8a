"""Compile a CNF formula into a boolean network whose fixed points are its models.

Node ``i`` gets the update function

    F_i = (x_i AND all clauses in A_i) OR NOT (all clauses in O_i)

where ``O_i`` holds the clauses containing ``x_i`` and ``A_i`` those
containing ``~x_i``. The conjunction over an empty set is true, so a variable
that occurs nowhere keeps its value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .formula import Formula, evaluate_clause


@dataclass(frozen=True)
class NodeFunction:
    var: int  # 0-based
    occurs_pos: frozenset[int]  # O_i, clause indices holding x_i
    occurs_neg: frozenset[int]  # A_i, clause indices holding ~x_i

    def inputs(self, f: Formula) -> frozenset[int]:
        """Variables read by this node (0-based), i.e. its in-neighbourhood."""
        return frozenset(abs(lit) - 1 for j in self.occurs_pos | self.occurs_neg
                         for lit in f.clauses[j])


@dataclass(frozen=True)
class Network:
    formula: Formula
    nodes: tuple[NodeFunction, ...]
    literal_touches: int = field(default=0, compare=False)
    # flattened literal arrays and node/clause incidence used by the vectorised image
    _lit_var: np.ndarray = field(default=None, repr=False, compare=False)
    _lit_pos: np.ndarray = field(default=None, repr=False, compare=False)
    _starts: np.ndarray = field(default=None, repr=False, compare=False)
    _pos_inc: sparse.csr_matrix = field(default=None, repr=False, compare=False)
    _neg_inc: sparse.csr_matrix = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def in_degree(self, i: int) -> int:
        return len(self.nodes[i].inputs(self.formula))


def compile_formula(f: Formula) -> Network:
    """Build the network in one pass over all clause literals."""
    n, m = f.num_vars, f.num_clauses
    pos: list[list[int]] = [[] for _ in range(n)]
    neg: list[list[int]] = [[] for _ in range(n)]
    lit_var, lit_pos, starts = [], [], []
    touches = 0
    for j, clause in enumerate(f.clauses):
        starts.append(len(lit_var))
        for lit in clause:
            touches += 1
            v = abs(lit) - 1
            (pos if lit > 0 else neg)[v].append(j)
            lit_var.append(v)
            lit_pos.append(lit > 0)
    nodes = tuple(NodeFunction(i, frozenset(pos[i]), frozenset(neg[i])) for i in range(n))

    def incidence(occ):
        rows = [i for i in range(n) for _ in occ[i]]
        cols = [j for i in range(n) for j in occ[i]]
        return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, m))

    return Network(
        formula=f,
        nodes=nodes,
        literal_touches=touches,
        _lit_var=np.array(lit_var, dtype=np.intp),
        _lit_pos=np.array(lit_pos, dtype=bool),
        _starts=np.array(starts, dtype=np.intp),
        _pos_inc=incidence(pos),
        _neg_inc=incidence(neg),
    )


def eval_node(net: Network, i: int, state) -> bool:
    node = net.nodes[i]
    f = net.formula
    neg_ok = all(evaluate_clause(f, j, state) for j in node.occurs_neg)
    pos_ok = all(evaluate_clause(f, j, state) for j in node.occurs_pos)
    return (bool(state[i]) and neg_ok) or not pos_ok


def clause_values(net: Network, states: np.ndarray) -> np.ndarray:
    """Clause truth values for a ``(batch, n)`` state matrix, shape ``(batch, m)``."""
    states = np.asarray(states, dtype=bool)
    if net.formula.num_clauses == 0:
        return np.ones((states.shape[0], 0), dtype=bool)
    hits = states[:, net._lit_var] == net._lit_pos
    return np.logical_or.reduceat(hits, net._starts, axis=1)


def eval_all_batch(net: Network, states: np.ndarray) -> np.ndarray:
    """Synchronous image of every row of a ``(batch, n)`` state matrix."""
    states = np.asarray(states, dtype=bool)
    if net.formula.num_clauses == 0:
        return states.copy()
    unsat = (~clause_values(net, states)).T.astype(np.float64)
    pos_broken = np.asarray(net._pos_inc @ unsat).T > 0
    neg_broken = np.asarray(net._neg_inc @ unsat).T > 0
    return (states & ~neg_broken) | pos_broken


def eval_all(net: Network, state) -> np.ndarray:
    """(F_1(s), ..., F_n(s)), every component computed from the same ``s``."""
    state = np.asarray(state, dtype=bool)
    if net.formula.num_clauses == 0:
        return state.copy()
    hits = state[net._lit_var] == net._lit_pos
    unsat = ~np.logical_or.reduceat(hits, net._starts)
    if not unsat.any():
        return state.copy()
    unsat = unsat.astype(np.float64)
    return (state & ~(net._neg_inc @ unsat > 0)) | (net._pos_inc @ unsat > 0)


def is_fixed_point(net: Network, state) -> bool:
    state = np.asarray(state, dtype=bool)
    return bool(np.array_equal(eval_all(net, state), state))


def describe(net: Network) -> list[str]:
    """Node functions in readable form, e.g. ``F1 = (c2 & x1) | !c1``."""
    lines = []
    for node in net.nodes:
        x = f"x{node.var + 1}"
        keep = [f"c{j + 1}" for j in sorted(node.occurs_neg)]
        head = f"({' & '.join(keep + [x])})" if keep else x
        terms = [head] + [f"!c{j + 1}" for j in sorted(node.occurs_pos)]
        lines.append(f"F{node.var + 1} = " + " | ".join(terms))
    return lines
