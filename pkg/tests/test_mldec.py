import numpy as np
import pytest

from fountain.analysis import full_rank_prob
from fountain.dist import DegreeDistribution, raptor_reference, robust_soliton
from fountain.galois import FieldMatrix
from fountain.ltcode import CodeParams, generator_matrix, neighbors_batch, peel
from fountain.mldec import inactivation_decode, inactivation_solve, ml_decode

# Six received symbols over five unknowns (x1..x5 stored at indices 0..4).
SIX_BY_FIVE = [[3, 4], [0, 2], [0, 1, 2, 3], [2], [1, 2, 3, 4], [0, 1, 3, 4]]


def gen_from_rows(rows, k):
    """k x n generator whose columns are the given neighbour sets."""
    return FieldMatrix.from_row_sets(rows, k).transpose()


def encode_rows(rows, msg):
    return np.array([np.bitwise_xor.reduce(msg[r], axis=0) for r in rows], dtype=np.uint8)


def test_ml_examples():
    rep = ml_decode(gen_from_rows([[0], [1]], 2), np.array([[7], [9]], dtype=np.uint8))
    assert rep.success and rep.values[:, 0].tolist() == [7, 9]
    rep = ml_decode(gen_from_rows([[0, 1], [1, 2], [0, 2]], 3), np.zeros((3, 1), dtype=np.uint8))
    assert not rep.success and rep.rank == 2


def test_ml_partial_recovery_on_deficit():
    rows = [[0], [1, 2], [1, 2]]
    msg = np.array([[4], [5], [6]], dtype=np.uint8)
    rep = ml_decode(gen_from_rows(rows, 3), encode_rows(rows, msg))
    assert not rep.success
    assert rep.recovered.tolist() == [True, False, False]
    assert rep.values[0, 0] == 4


def test_ml_dense_success_rate(rng):
    trials, k, n = 10_000, 64, 74
    fails = 0
    zero = np.zeros((n, 1), dtype=np.uint8)
    for _ in range(trials):
        g = FieldMatrix.from_array(rng.integers(0, 2, (k, n)), 2)
        fails += not ml_decode(g, zero).success
    p_fail = 1 - full_rank_prob(k, n, 2)
    mean = trials * p_fail
    assert abs(fails - mean) <= 4 * np.sqrt(mean * (1 - p_fail))


def test_six_by_five_example():
    msg = np.array([[0x11], [0x22], [0x44], [0x88], [0x0F]], dtype=np.uint8)
    pay = encode_rows(SIX_BY_FIVE, msg)
    bp = peel(5, SIX_BY_FIVE, pay)
    assert not bp.success
    assert bp.recovered.tolist() == [True, False, True, False, False]
    rep = inactivation_solve(5, SIX_BY_FIVE, pay)
    assert rep.success and rep.inactivation_count == 1
    assert np.array_equal(rep.values, msg)
    # the two closed forms for x2 agree with the decoded value
    x2 = rep.values[1, 0]
    assert x2 == pay[0, 0] ^ pay[3, 0] ^ pay[4, 0]
    assert x2 == pay[0, 0] ^ pay[1, 0] ^ pay[3, 0] ^ pay[5, 0]
    ml = ml_decode(gen_from_rows(SIX_BY_FIVE, 5), pay)
    assert ml.success and np.array_equal(ml.values, rep.values)


def test_inactivation_examples():
    rows = [[0], [0, 1], [1, 2]]
    rep = inactivation_solve(3, rows, np.zeros((3, 1), dtype=np.uint8))
    assert rep.success and rep.inactivation_count == 0
    rows = [[0, 1], [1, 2], [0, 2]]
    g = gen_from_rows(rows, 3)
    rep = inactivation_decode(g, np.zeros((3, 1), dtype=np.uint8))
    assert not rep.success and rep.rank == 2
    assert ml_decode(g, np.zeros((3, 1), dtype=np.uint8)).rank == 2


def test_inactivation_with_too_few_rows():
    rep = inactivation_solve(4, [[0, 1], [2]], np.zeros((2, 1), dtype=np.uint8))
    assert not rep.success
    assert rep.recovered.tolist() == [False, False, True, False]


@pytest.mark.parametrize("overhead", [0.0, 0.02, 0.05, 0.1])
def test_inactivation_agrees_with_ml(rng, overhead):
    for t in range(60):
        k = int(rng.integers(20, 160))
        p = CodeParams(k, 2, robust_soliton(k, 0.1, 0.5), base_seed=int(rng.integers(0, 1 << 62)))
        esis = rng.choice(1 << 16, size=int(round((1 + overhead) * k)), replace=False).tolist()
        rows = [r.tolist() for r in neighbors_batch(p, esis)]
        msg = rng.integers(0, 256, (k, 2)).astype(np.uint8)
        pay = encode_rows(rows, msg)
        ml = ml_decode(generator_matrix(p, esis), pay)
        ia = inactivation_solve(k, rows, pay, keys=esis)
        assert ml.success == ia.success
        assert ia.rank == ml.rank
        if ml.success:
            assert np.array_equal(ml.values, ia.values)
            assert np.array_equal(ia.values, msg)
        if peel(k, rows, keys=esis).success:
            assert ia.inactivation_count == 0


def test_inactivation_partial_values_are_correct(rng):
    for t in range(100):
        k = int(rng.integers(10, 60))
        rows = [sorted(rng.choice(k, size=int(rng.integers(1, 4)), replace=False).tolist()) for _ in range(k - 2)]
        msg = rng.integers(0, 256, (k, 1)).astype(np.uint8)
        rep = inactivation_solve(k, rows, encode_rows(rows, msg))
        assert np.array_equal(rep.values[rep.recovered], msg[rep.recovered])
        ml = ml_decode(gen_from_rows(rows, k), encode_rows(rows, msg))
        assert rep.recovered.tolist() == ml.recovered.tolist()


def test_inactivation_count_sublinear():
    d = raptor_reference()
    medians = {}
    for k in (256, 1024, 4096):
        dist = DegreeDistribution(d.probs, k)
        counts = []
        for t in range(9):
            p = CodeParams(k, 1, dist, base_seed=7 * t + k)
            n = int(1.05 * k)
            rows = [r.tolist() for r in neighbors_batch(p, range(n))]
            rep = inactivation_solve(k, rows, np.zeros((n, 1), dtype=np.uint8))
            counts.append(rep.inactivation_count)
        medians[k] = float(np.median(counts))
    # sixteen-fold k, at most the fourfold growth a square-root law gives
    assert medians[256] > 0
    assert medians[256] / 256 > medians[1024] / 1024 > medians[4096] / 4096
    assert medians[4096] <= 4 * medians[256]
