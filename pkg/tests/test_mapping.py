from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings

from bnsat.analysis import all_states
from bnsat.formula import Formula, GenSpec, evaluate_formula, generate
from bnsat.mapping import (compile_formula, describe, eval_all, eval_all_batch, eval_node,
                           is_fixed_point)
from strategies import formula_and_state, formulas


def sets(net):
    return [(set(nd.occurs_pos), set(nd.occurs_neg)) for nd in net.nodes]


def test_compile_phi1(phi1):
    # clause indices are 0-based: c1 -> 0
    assert sets(compile_formula(phi1)) == [({0}, {1}), ({1, 2}, {0}), ({2}, set())]


def test_compile_phi2(phi2):
    assert sets(compile_formula(phi2)) == [({0, 1, 4}, {2}), ({0, 3}, set()), ({3, 4}, {1, 2})]


def test_unused_variable_is_identity():
    net = compile_formula(Formula(3, ((1, 2),)))
    assert sets(net)[2] == (set(), set())
    for bits in product((0, 1), repeat=3):
        assert eval_node(net, 2, bits) == bool(bits[2])


def test_describe(phi1, phi2):
    assert describe(compile_formula(phi1)) == [
        "F1 = (c2 & x1) | !c1", "F2 = (c1 & x2) | !c2 | !c3", "F3 = x3 | !c3"]
    assert describe(compile_formula(phi2)) == [
        "F1 = (c3 & x1) | !c1 | !c2 | !c5", "F2 = x2 | !c1 | !c4",
        "F3 = (c2 & c3 & x3) | !c4 | !c5"]


def test_eval_node_identity_when_clause_holds(phi1):
    net = compile_formula(phi1)
    for bits in product((0, 1), repeat=3):
        if bits[1] or bits[2]:  # c3 satisfied
            assert eval_node(net, 2, bits) == bool(bits[2])


def test_eval_node_at_model(phi1):
    net = compile_formula(phi1)
    assert [eval_node(net, i, (0, 0, 1)) for i in range(3)] == [False, False, True]


def test_eval_node_phi2(phi2):
    net = compile_formula(phi2)
    assert [int(eval_node(net, i, (1, 1, 1))) for i in range(3)] == [0, 1, 0]


@pytest.mark.parametrize("state, image", [((1, 1, 0), (1, 1, 0)), ((0, 0, 0), (1, 1, 1)),
                                          ((1, 1, 1), (0, 1, 0))])
def test_eval_all_phi2(phi2, state, image):
    assert tuple(eval_all(compile_formula(phi2), state).astype(int)) == image


def test_eval_all_phi1_fixed(phi1):
    assert tuple(eval_all(compile_formula(phi1), (1, 1, 1)).astype(int)) == (1, 1, 1)


def test_is_fixed_point(phi1):
    net = compile_formula(phi1)
    assert is_fixed_point(net, (0, 0, 1))
    assert not is_fixed_point(net, (1, 0, 0))
    fixed = {b for b in product((0, 1), repeat=3) if is_fixed_point(net, b)}
    assert fixed == {(0, 0, 1), (1, 1, 0), (1, 1, 1)}


def test_empty_formula_everything_fixed():
    net = compile_formula(Formula(4, ()))
    assert all(is_fixed_point(net, b) for b in product((0, 1), repeat=4))
    assert eval_all_batch(net, all_states(4)).shape == (16, 4)


def test_compile_pure_and_cost():
    f = generate(GenSpec(30, 120, 3, False, seed=3))
    a, b = compile_formula(f), compile_formula(f)
    assert a == b
    assert a.literal_touches == sum(len(c) for c in f.clauses) == 360


def test_in_degree(phi1):
    net = compile_formula(phi1)
    # x3 reads c3 = (x2 v x3)
    assert net.in_degree(2) == 2
    assert net.in_degree(0) == 2


@settings(max_examples=200)
@given(formulas(max_vars=8, max_clauses=20))
def test_fixed_points_are_models(f):
    net = compile_formula(f)
    for bits in product((0, 1), repeat=f.num_vars):
        assert is_fixed_point(net, bits) == evaluate_formula(f, bits).satisfied


@settings(max_examples=200)
@given(formula_and_state(max_vars=8, max_clauses=20))
def test_unsat_clause_forces_a_change(fs):
    f, state = fs
    net = compile_formula(f)
    for j in evaluate_formula(f, state).unsat_indices:
        changed = [abs(lit) - 1 for lit in f.clauses[j]
                   if eval_node(net, abs(lit) - 1, state) != state[abs(lit) - 1]]
        # every variable of an unsatisfied clause has its literal false, so each one moves
        assert changed == [abs(lit) - 1 for lit in f.clauses[j]]
        for lit in f.clauses[j]:
            assert eval_node(net, abs(lit) - 1, state) == (lit > 0)


@settings(max_examples=200)
@given(formula_and_state(max_vars=8, max_clauses=20))
def test_pure_literals_are_monotone(fs):
    f, state = fs
    net = compile_formula(f)
    for i, node in enumerate(net.nodes):
        value = eval_node(net, i, state)
        if not node.occurs_neg:
            assert value >= bool(state[i])
        if not node.occurs_pos:
            assert value <= bool(state[i])


@settings(max_examples=100)
@given(formulas(max_vars=7, max_clauses=20))
def test_vectorised_image_matches_node_functions(f):
    net = compile_formula(f)
    states = all_states(f.num_vars)
    batch = eval_all_batch(net, states)
    for row, image in zip(states, batch):
        expected = [eval_node(net, i, row) for i in range(f.num_vars)]
        assert image.tolist() == expected
        assert eval_all(net, row).tolist() == expected


def test_exhaustive_corpus_up_to_twelve_vars():
    rng = np.random.default_rng(2024)
    for k in range(12):
        n = int(rng.integers(2, 13))
        m = int(rng.integers(1, 5 * n))
        f = generate(GenSpec(n, m, min(3, n), bool(k % 2), seed=k))
        net = compile_formula(f)
        states = all_states(n)
        fixed = np.all(eval_all_batch(net, states) == states, axis=1)
        models = np.array([evaluate_formula(f, s).satisfied for s in states])
        assert np.array_equal(fixed, models)
