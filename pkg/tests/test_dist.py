import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fountain.dist import (
    DegreeDistribution,
    asymptotic_good,
    asymptotic_good_coeff,
    avg_degree,
    normalized,
    omega_star,
    raptor_reference,
    read_distribution,
    robust_soliton,
    robust_soliton_parts,
    sample_degree,
    sample_degrees,
    soliton,
    table1_reference,
    write_distribution,
)


def check_invariants(d: DegreeDistribution) -> None:
    assert np.all(d.probs >= 0)
    assert abs(d.probs.sum() - 1) <= 1e-9
    assert np.all(np.diff(d.cdf) >= 0)
    assert d.cdf[-1] == 1.0
    if d.k is not None:
        assert d.dmax <= d.k


def test_soliton_examples():
    assert np.allclose(soliton(4).probs, [1 / 4, 1 / 2, 1 / 6, 1 / 12])
    assert np.allclose(soliton(2).probs, [0.5, 0.5])
    assert avg_degree(soliton(4)) == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4)
    with pytest.raises(ValueError):
        soliton(1)


@pytest.mark.parametrize("k", [100, 1000, 10_000])
def test_soliton_average_is_harmonic(k):
    assert avg_degree(soliton(k)) == pytest.approx(sum(1 / d for d in range(1, k + 1)), rel=1e-12)


@pytest.mark.parametrize("k", [100, 1000, 10_000])
def test_soliton_average_near_log(k):
    # ln k + Euler-Mascheroni, within 1/(2k) using the exact constant
    assert abs(avg_degree(soliton(k)) - (math.log(k) + 0.5772156649015329)) <= 1 / (2 * k)


def test_soliton_average_with_rounded_constant():
    # rounding the constant to 0.57721 costs about 6.6e-6, which 1/(2k) still covers at k=100
    assert abs(avg_degree(soliton(100)) - (math.log(100) + 0.57721)) <= 1 / 200


def test_robust_soliton_example():
    parts = robust_soliton_parts(100, 0.1, 0.5)
    assert parts.R == pytest.approx(5.2983, abs=1e-4)
    assert parts.spike == 19
    assert parts.tau[0] == pytest.approx(0.052983, abs=1e-6)
    d = robust_soliton(100, 0.1, 0.5)
    check_invariants(d)
    base = soliton(100).probs
    assert np.allclose(d.probs[19:], base[19:] / parts.beta)


def test_robust_soliton_rejects_small_k_over_r():
    with pytest.raises(ValueError):
        robust_soliton(10, 5.0, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(50, 3000), st.floats(0.01, 0.3), st.floats(0.01, 0.99))
def test_robust_soliton_normalised(k, c, delta):
    try:
        d = robust_soliton(k, c, delta)
    except ValueError:
        return
    check_invariants(d)


def test_raptor_reference():
    d = raptor_reference()
    check_invariants(d)
    assert d[2] * 1.001 == pytest.approx(0.494)
    assert avg_degree(d) == pytest.approx(5.85, abs=0.02)
    assert d.dmax == 66


def test_table1_reference():
    d = table1_reference(4096)
    assert d[1] == pytest.approx(0.01206279868062, rel=1e-9)
    assert avg_degree(d) == pytest.approx(5.714, abs=1e-3)
    assert table1_reference(8192)[35] == pytest.approx(0.00686341459082, rel=1e-9)
    with pytest.raises(ValueError):
        table1_reference(1000)


def test_asymptotic_good():
    assert asymptotic_good_coeff(10, 0.2, "online") == pytest.approx(1 / 1.2)
    c1 = asymptotic_good_coeff(10, 0.2, "raptor")
    assert c1 == pytest.approx(2 / 1.2)
    assert c1 < (0.2 * 10 + 1) / 1.2
    for variant in ("online", "raptor"):
        check_invariants(asymptotic_good(10, 0.2, variant))
    with pytest.raises(ValueError):
        asymptotic_good(10, 0.1, "online")


def test_omega_star():
    assert np.allclose(omega_star(soliton(4)).probs, [0, 2 / 3, 2 / 9, 1 / 9])
    d = DegreeDistribution(np.array([0.0, 0.5, 0.5]))
    assert np.array_equal(omega_star(d).probs, d.probs)
    with pytest.raises(ValueError):
        omega_star(DegreeDistribution(np.array([1.0])))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=20).filter(lambda w: sum(w[1:]) > 1e-3))
def test_omega_star_idempotent(weights):
    d = omega_star(normalized(np.array(weights), None, "w"))
    assert d[1] == 0.0
    assert np.allclose(omega_star(d).probs, d.probs, atol=1e-15)


def test_sample_degree_examples():
    one = DegreeDistribution(np.array([1.0]))
    assert all(sample_degree(one, u) == 1 for u in (0.0, 0.5, 0.999999))
    assert sample_degree(soliton(4), 0.3) == 2
    assert sample_degree(DegreeDistribution(np.array([0.0, 0.0, 1.0])), 0.0) == 3
    assert sample_degree(soliton(4), 0.25) == 2


def test_sample_degree_frequencies(rng):
    d = robust_soliton(1000, 0.1, 0.5)
    draws = sample_degrees(d, rng.random(1_000_000))
    counts = np.bincount(draws, minlength=d.dmax + 1)[1:]
    n = 1_000_000
    sd = np.sqrt(n * d.probs * (1 - d.probs))
    assert np.all(np.abs(counts - n * d.probs) <= 4 * sd + 1e-9)


def test_avg_degree_examples():
    assert avg_degree(DegreeDistribution(np.array([1.0]))) == 1.0


def test_invalid_distributions():
    with pytest.raises(ValueError):
        DegreeDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        DegreeDistribution(np.array([-0.1, 1.1]))
    with pytest.raises(ValueError):
        DegreeDistribution(np.array([0.0, 0.0, 1.0]), k=2)


def test_file_round_trip(tmp_path):
    for d in (robust_soliton(200, 0.1, 0.5), raptor_reference()):
        path = tmp_path / "d.txt"
        write_distribution(d, path)
        back = read_distribution(path)
        assert np.array_equal(back.probs, d.probs)
        assert back.k == d.k
    text = path.read_text().splitlines()
    assert text[0] == "k=0" and text[1] == "dmax=66"


def test_file_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("dmax=2\n1 0.5\n2 0.5\n")
    with pytest.raises(ValueError):
        read_distribution(path)
