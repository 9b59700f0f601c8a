import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnsat.formula import (DimacsError, Formula, FormulaError, GenSpec, as_state, evaluate_clause,
                           evaluate_formula, generate, generate_with_witness, parse_dimacs,
                           satisfied_mask, write_dimacs)
from conftest import PHI1
from strategies import formula_and_state, formulas


def naive_clause(clause, bits):
    for lit in clause:
        value = bits[abs(lit) - 1]
        if lit < 0:
            value = not value
        if value:
            return True
    return False


class TestParse:
    def test_phi1(self):
        f = parse_dimacs("p cnf 3 3\n1 -2 0\n-1 2 0\n2 3 0\n")
        assert f.num_vars == 3 and f.num_clauses == 3
        assert f.clauses == PHI1

    def test_unit(self):
        f = parse_dimacs("p cnf 1 1\n1 0\n")
        assert f.clauses == ((1,),)

    def test_tautology_rejected_by_default(self):
        with pytest.raises(DimacsError, match="tautolog"):
            parse_dimacs("p cnf 2 1\n1 1 -1 0\n")

    def test_tautology_drop_mode(self):
        f = parse_dimacs("p cnf 2 2\n1 1 -1 0\n2 0\n", tautologies="drop")
        assert f.clauses == ((2,),)

    def test_duplicate_literals_deduplicated(self):
        f = parse_dimacs("p cnf 3 1\n1 2 1 2 3 0\n")
        assert f.clauses == ((1, 2, 3),)

    def test_comments_multiline_clauses_and_stream(self):
        text = "c hello\nc world\np cnf 3 2\n1 -2\n 3 0 -1\n0\n"
        f = parse_dimacs(io.StringIO(text))
        assert f.clauses == ((1, -2, 3), (-1,))

    def test_satlib_percent_terminator(self):
        f = parse_dimacs("p cnf 2 1\n1 2 0\n%\n0\n")
        assert f.clauses == ((1, 2),)

    @pytest.mark.parametrize("text, match", [
        ("p cnf 3\n1 0\n", "header"),
        ("p dnf 3 1\n1 0\n", "header"),
        ("1 2 0\n", "before"),
        ("", "missing"),
        ("p cnf 2 1\n3 0\n", "out of range"),
        ("p cnf 2 2\n1 0\n0\n", "empty clause"),
        ("p cnf 2 2\n1 0\n", "declares 2"),
        ("p cnf 2 1\n1 x 0\n", "token"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(DimacsError, match=match):
            parse_dimacs(text)

    def test_count_mismatch_tolerated_when_not_strict(self):
        f = parse_dimacs("p cnf 2 5\n1 0\n", strict_count=False)
        assert f.num_clauses == 1


class TestFormulaInvariants:
    def test_rejects_empty_clause(self):
        with pytest.raises(FormulaError, match="empty"):
            Formula(2, ((),))

    def test_rejects_out_of_range(self):
        with pytest.raises(FormulaError):
            Formula(2, ((3,),))

    def test_rejects_duplicates_on_direct_construction(self):
        with pytest.raises(FormulaError):
            Formula(2, ((1, 1),))

    def test_rejects_zero_vars(self):
        with pytest.raises(FormulaError):
            Formula(0, ())

    def test_unused_variables_allowed(self):
        assert Formula(5, ((1,),)).num_vars == 5


class TestWrite:
    def test_phi1_round_trip(self, phi1):
        assert parse_dimacs(write_dimacs(phi1)).clause_set() == phi1.clause_set()

    def test_empty_body(self):
        text = write_dimacs(Formula(4, ()))
        assert text == "p cnf 4 0\n"
        assert parse_dimacs(text).num_clauses == 0

    def test_generated_round_trip(self):
        f = generate(GenSpec(50, 100, 3, True, seed=7))
        g = parse_dimacs(write_dimacs(f, comments=["generated"]))
        assert g == f

    @given(formulas())
    def test_round_trip_property(self, f):
        g = parse_dimacs(write_dimacs(f))
        assert g.num_vars == f.num_vars and g.clause_set() == f.clause_set()


class TestEvaluate:
    def test_phi1_c1_at_zero(self, phi1):
        assert evaluate_clause(phi1, 0, (0, 0, 0))

    def test_first_literal_satisfied(self, phi2):
        # x1 = 1 satisfies (x1 v x2)
        assert evaluate_clause(phi2, 0, (1, 0, 0))

    def test_phi2_c1_false_at_zero(self, phi2):
        assert not evaluate_clause(phi2, 0, (0, 0, 0))

    def test_phi1_model(self, phi1):
        ev = evaluate_formula(phi1, (0, 0, 1))
        assert ev.satisfied and ev.unsat_count == 0 and ev.unsat_indices == []

    def test_phi1_non_model(self, phi1):
        # (1,0,0): c1 = 1 v 1, c2 = 0 v 0, c3 = 0 v 0
        ev = evaluate_formula(phi1, (1, 0, 0))
        assert not ev.satisfied
        assert ev.unsat_indices == [1, 2]

    def test_empty_formula(self):
        ev = evaluate_formula(Formula(3, ()), (1, 0, 1))
        assert ev == (True, 0, [])

    def test_length_mismatch(self, phi1):
        with pytest.raises(ValueError):
            evaluate_formula(phi1, (0, 1))

    @given(formula_and_state())
    def test_clause_matches_naive(self, fs):
        f, state = fs
        for j, c in enumerate(f.clauses):
            assert evaluate_clause(f, j, state) == naive_clause(c, state)

    @given(formula_and_state())
    def test_satisfied_iff_no_unsat_indices(self, fs):
        f, state = fs
        ev = evaluate_formula(f, state)
        assert ev.satisfied == (not ev.unsat_indices)
        assert ev.unsat_count == len(ev.unsat_indices)
        assert satisfied_mask(f, np.array([state], dtype=bool))[0] == ev.satisfied

    def test_as_state(self):
        assert as_state("101").tolist() == [True, False, True]
        assert as_state((1, 0)).dtype == bool


class TestGenerate:
    def test_forced_witness_satisfies(self):
        f, hidden = generate_with_witness(GenSpec(3, 2, 3, True, seed=11))
        assert evaluate_formula(f, hidden).satisfied

    def test_deterministic(self):
        spec = GenSpec(20, 60, 3, True, seed=5)
        assert generate(spec) == generate(spec)
        assert generate(spec) != generate(GenSpec(20, 60, 3, True, seed=6))

    def test_shape(self):
        f = generate(GenSpec(10, 40, 3, False, seed=1))
        assert f.num_clauses == 40
        assert all(len({abs(lit) for lit in c}) == 3 for c in f.clauses)

    @settings(max_examples=60)
    @given(st.integers(3, 30), st.integers(1, 150), st.integers(0, 2 ** 63))
    def test_forced_soundness(self, n, m, seed):
        f, hidden = generate_with_witness(GenSpec(n, m, 3, True, seed))
        assert evaluate_formula(f, hidden).satisfied

    def test_sign_balance(self):
        lits = []
        seed = 0
        while len(lits) < 10 ** 4:
            f = generate(GenSpec(50, 100, 3, True, seed))
            lits.extend(lit for c in f.clauses for lit in c)
            seed += 1
        frac = sum(lit > 0 for lit in lits) / len(lits)
        assert abs(frac - 0.5) <= 0.05

    @pytest.mark.parametrize("kwargs", [dict(num_vars=2, num_clauses=1, clause_width=3),
                                        dict(num_vars=3, num_clauses=0)])
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValueError):
            GenSpec(**kwargs)
