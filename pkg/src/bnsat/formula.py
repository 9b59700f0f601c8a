"""CNF formulas: data model, evaluation, DIMACS I/O and random k-SAT generation.

Clauses are tuples of signed DIMACS literals (``3`` is x3, ``-3`` is ~x3).
States are numpy boolean vectors where position ``i`` holds variable ``i + 1``.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, TextIO

import numpy as np

log = logging.getLogger(__name__)

Clause = tuple[int, ...]


class FormulaError(ValueError):
    """Raised when a formula violates the CNF invariants."""


class DimacsError(FormulaError):
    """Raised for malformed DIMACS input."""


def as_state(bits: Iterable) -> np.ndarray:
    """Coerce a sequence of 0/1 or bools (or a bitstring like ``"011"``) to a state vector."""
    if isinstance(bits, str):
        bits = [c == "1" for c in bits]
    return np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=bool)


def state_bits(state: Sequence) -> tuple[int, ...]:
    return tuple(int(b) for b in state)


def state_str(state: Sequence) -> str:
    return "".join("1" if b else "0" for b in state)


def normalize_clause(literals: Iterable[int], num_vars: int) -> Clause:
    """Deduplicate literals (keeping first occurrence order) and check the clause invariants."""
    seen: dict[int, None] = {}
    for lit in literals:
        lit = int(lit)
        if lit == 0 or abs(lit) > num_vars:
            raise FormulaError(f"literal {lit} out of range 1..{num_vars}")
        seen.setdefault(lit, None)
    clause = tuple(seen)
    if not clause:
        raise FormulaError("empty clause")
    if any(-lit in seen for lit in clause):
        raise FormulaError(f"tautological clause {clause}")
    return clause


@dataclass(frozen=True)
class Formula:
    """A CNF formula over variables ``1..num_vars``.

    Construction validates every clause: non-empty, in range, no duplicate
    literals and no variable occurring with both signs.
    """

    num_vars: int
    clauses: tuple[Clause, ...] = ()
    source_name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.num_vars < 1:
            raise FormulaError("a formula needs at least one variable")
        clauses = tuple(tuple(int(lit) for lit in c) for c in self.clauses)
        for c in clauses:
            if normalize_clause(c, self.num_vars) != c:
                raise FormulaError(f"duplicate literals in clause {c}")
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def build(cls, num_vars: int, clauses: Iterable[Iterable[int]], *,
              tautologies: str = "reject", source_name: str | None = None) -> Formula:
        """Build a formula from raw literal lists, deduplicating literals.

        ``tautologies`` is ``"reject"`` (raise) or ``"drop"`` (silently remove
        always-true clauses).
        """
        if tautologies not in ("reject", "drop"):
            raise ValueError(f"unknown tautology policy {tautologies!r}")
        out = []
        for raw in clauses:
            raw = [int(x) for x in raw]
            if tautologies == "drop" and any(-lit in raw for lit in raw):
                continue
            out.append(normalize_clause(raw, num_vars))
        return cls(num_vars, tuple(out), source_name)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def clause_set(self) -> frozenset[frozenset[int]]:
        """Clauses as an order-insensitive set, for comparisons up to ordering."""
        return frozenset(frozenset(c) for c in self.clauses)


class Evaluation(NamedTuple):
    satisfied: bool
    unsat_count: int
    unsat_indices: list[int]


def literal_true(lit: int, state: Sequence) -> bool:
    return bool(state[abs(lit) - 1]) == (lit > 0)


def evaluate_clause(f: Formula, j: int, state: Sequence) -> bool:
    return any(literal_true(lit, state) for lit in f.clauses[j])


def evaluate_formula(f: Formula, state: Sequence) -> Evaluation:
    if len(state) != f.num_vars:
        raise ValueError(f"state has length {len(state)}, formula has {f.num_vars} variables")
    unsat = [j for j in range(f.num_clauses) if not evaluate_clause(f, j, state)]
    return Evaluation(not unsat, len(unsat), unsat)


def satisfied_mask(f: Formula, states: np.ndarray) -> np.ndarray:
    """Vectorised satisfaction test over a ``(batch, n)`` boolean matrix of states."""
    states = np.asarray(states, dtype=bool)
    ok = np.ones(states.shape[0], dtype=bool)
    for c in f.clauses:
        sat = np.zeros_like(ok)
        for lit in c:
            col = states[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    return ok


# --- DIMACS -----------------------------------------------------------------

def parse_dimacs(text: str | TextIO, *, tautologies: str = "reject",
                 strict_count: bool = True, source_name: str | None = None) -> Formula:
    """Parse DIMACS CNF from a string or text stream.

    A ``%`` line (SATLIB convention) ends the clause section. With
    ``strict_count`` the number of clauses read must match the header.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text, 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if header[0] < 1 or header[1] < 0:
                raise DimacsError(f"line {lineno}: bad counts in header {line!r}")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(current)
                current = []
            elif abs(lit) > header[0]:
                raise DimacsError(f"line {lineno}: literal {lit} out of range 1..{header[0]}")
            else:
                current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        # tolerate a missing terminating 0 on the last clause
        clauses.append(current)
    n, m = header
    if strict_count and len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")
    try:
        f = Formula.build(n, clauses, tautologies=tautologies, source_name=source_name)
    except DimacsError:
        raise
    except FormulaError as exc:
        raise DimacsError(str(exc)) from None
    if f.num_clauses != len(clauses):
        log.warning("dropped %d tautological clauses; effective m = %d",
                    len(clauses) - f.num_clauses, f.num_clauses)
    return f


def write_dimacs(f: Formula, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.num_vars} {f.num_clauses}")
    lines.extend(" ".join(map(str, c)) + " 0" for c in f.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path, **kwargs) -> Formula:
    """Read a DIMACS file; ``"-"`` reads standard input."""
    import sys
    if str(path) == "-":
        return parse_dimacs(sys.stdin, source_name="<stdin>", **kwargs)
    with open(path) as fh:
        return parse_dimacs(fh, source_name=str(path), **kwargs)


# --- random k-SAT -------------------------------------------------------------

@dataclass(frozen=True)
class GenSpec:
    num_vars: int
    num_clauses: int
    clause_width: int = 3
    forced: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.num_vars < 1 or self.num_clauses < 1:
            raise ValueError("need num_vars >= 1 and num_clauses >= 1")
        if not 1 <= self.clause_width <= self.num_vars:
            raise ValueError(f"clause width {self.clause_width} not in 1..{self.num_vars}")


def generate_with_witness(spec: GenSpec) -> tuple[Formula, np.ndarray | None]:
    """Random k-SAT instance plus, when forced, the hidden satisfying assignment.

    Uses numpy's PCG64 generator seeded with ``spec.seed``. Each clause picks
    ``clause_width`` distinct variables uniformly and negates each with
    probability 1/2. Forced instances draw the hidden assignment first and
    redraw any clause it falsifies.
    """
    rng = np.random.default_rng(spec.seed)
    n, w = spec.num_vars, spec.clause_width
    hidden = rng.random(n) < 0.5 if spec.forced else None
    clauses = []
    for _ in range(spec.num_clauses):
        while True:
            variables = rng.choice(n, size=w, replace=False)
            positive = rng.random(w) < 0.5
            if hidden is None or np.any(hidden[variables] == positive):
                break
        clauses.append(tuple(int(v) + 1 if pos else -(int(v) + 1)
                             for v, pos in zip(variables, positive)))
    name = f"{'forced' if spec.forced else 'random'}-{w}sat-n{n}-m{spec.num_clauses}-s{spec.seed}"
    return Formula(n, tuple(clauses), name), hidden


def generate(spec: GenSpec) -> Formula:
    return generate_with_witness(spec)[0]
