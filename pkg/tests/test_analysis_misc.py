import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fountain.analysis import (
    concat_failure,
    copy_repair_bound,
    giant_component,
    modified_distribution,
    repair_complexity,
)
from fountain.dist import DegreeDistribution, avg_degree, normalized, raptor_reference, robust_soliton
from oracles import giant_fixed_point


def test_giant_component_examples():
    assert giant_component(0.5) == 0.0
    assert giant_component(1.0) == 0.0
    assert giant_component(2.0) == pytest.approx(0.7968, abs=1e-4)
    with pytest.raises(ValueError):
        giant_component(0.0)


@pytest.mark.parametrize("m", [1.1, 1.5, 2.0, 3.0, 5.0])
def test_giant_component_matches_fixed_point(m):
    assert abs(giant_component(m) - giant_fixed_point(m)) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 20.0))
def test_giant_component_solves_its_equation(m):
    phi = giant_component(m)
    assert abs((1 - phi) - math.exp(-m * phi)) <= 1e-6


def second_derivative(d: DegreeDistribution, x: float) -> float:
    coeffs = np.concatenate(([0.0], d.probs))
    return float(np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(coeffs, 2)))


def test_modified_distribution_examples():
    d = robust_soliton(200, 0.1, 0.5)
    same = modified_distribution(d, 0.0)
    assert same.released == 0.0
    assert np.allclose(same.coeffs, d.probs)
    gone = modified_distribution(d, 1.0)
    assert gone.released == pytest.approx(1.0)
    assert np.allclose(gone.coeffs, 0.0)
    with pytest.raises(ValueError):
        modified_distribution(d, 1.5)


@pytest.mark.parametrize("phi", [0.1, 0.35, 0.7, 0.9])
def test_reduced_degree_two_closed_form(phi):
    d = raptor_reference()
    r = modified_distribution(d, phi)
    assert r[2] == pytest.approx((1 - phi) ** 2 * second_derivative(d, phi) / 2, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=25).filter(lambda w: sum(w) > 1e-3), st.floats(0.0, 1.0))
def test_modified_distribution_is_composition(weights, phi):
    d = normalized(np.array(weights), None, "w")
    r = modified_distribution(d, phi)
    assert r.released + r.coeffs.sum() == pytest.approx(1.0, abs=1e-12)
    for x in (0.0, 0.3, 1.0):
        value = r.released + float(np.polynomial.polynomial.polyval(x, np.concatenate(([0.0], r.coeffs))))
        assert value == pytest.approx(float(d.poly((1 - phi) * x + phi)), abs=1e-12)
    if r.coeffs.sum() > 1e-9:
        assert r.conditional().probs.sum() == pytest.approx(1.0)


def test_concat_failure_examples():
    n1 = 10
    p = np.zeros(n1 + 1)
    p[n1] = 1.0
    q0 = [1.0]
    assert concat_failure(p, [q0], [n1]) == 0.0
    p = np.zeros(n1 + 1)
    p[n1 - 1] = p[n1] = 0.5
    assert concat_failure(p, [[1.0, 1.0]], [n1]) == 0.0
    p = np.zeros(n1 + 1)
    p[n1 - 2], p[n1] = 0.2, 0.8
    assert concat_failure(p, [[1.0, 0.0, 0.6]], [n1]) == pytest.approx(0.08)


def test_concat_failure_rejects_bad_input():
    with pytest.raises(ValueError):
        concat_failure([0.7, 0.7], [[1.0]], [1])
    with pytest.raises(ValueError):
        concat_failure([1.0], [[1.0], [1.0]], [1])
    with pytest.raises(ValueError):
        concat_failure([0.0, 0.0, 1.0], [[1.0]], [1])


def test_two_stage_perfect_stages():
    # both stages correct everything, so only LT mass matters and failure is zero
    n = [6, 8]
    p = np.full(9, 1 / 9)
    assert concat_failure(p, [[1.0] * 7, [1.0] * 9], n) == pytest.approx(0.0, abs=1e-15)


def test_two_stage_reduces_when_outer_is_useless():
    # the outer stage never corrects anything unless nothing is missing
    n = [6, 6]
    p = np.zeros(7)
    p[6], p[5], p[4] = 0.5, 0.3, 0.2
    q_inner = [1.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]
    q_outer = [1.0]
    single = concat_failure(p, [q_inner], [6])
    assert concat_failure(p, [q_inner, q_outer], n) == pytest.approx(single)
    assert single == pytest.approx(0.2 * 0.5)


def test_repair_examples():
    assert repair_complexity(2.0, 3.0, 100, 100) == 5.0
    assert repair_complexity(2.0, 3.0, 100, 1) == 302.0
    with pytest.raises(ValueError):
        repair_complexity(1.0, 1.0, 10, 0)
    d = raptor_reference()
    assert copy_repair_bound(d, 0.05) == pytest.approx(1.05 * avg_degree(d))
