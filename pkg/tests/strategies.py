"""Hypothesis strategies for small CNF formulas and states."""

from hypothesis import strategies as st

from bnsat.formula import Formula


@st.composite
def clauses(draw, n, max_width=4):
    width = draw(st.integers(1, min(max_width, n)))
    variables = draw(st.lists(st.integers(1, n), min_size=width, max_size=width, unique=True))
    return tuple(v if draw(st.booleans()) else -v for v in variables)


@st.composite
def formulas(draw, max_vars=6, max_clauses=14):
    n = draw(st.integers(1, max_vars))
    cs = draw(st.lists(clauses(n), max_size=max_clauses))
    return Formula(n, tuple(cs))


@st.composite
def formula_and_state(draw, max_vars=6, max_clauses=14):
    f = draw(formulas(max_vars, max_clauses))
    state = tuple(draw(st.lists(st.booleans(), min_size=f.num_vars, max_size=f.num_vars)))
    return f, state
