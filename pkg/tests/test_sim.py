import math

import numpy as np
import pytest

from fountain.analysis import full_rank_prob
from fountain.dist import DegreeDistribution, raptor_reference, robust_soliton
from fountain.ltcode import EncodingSymbol
from fountain.sim import (
    ChannelConfig,
    CodecConfig,
    ExperimentRecord,
    _trial_seeds,
    bec_transmit,
    parse_config,
    read_config,
    received_count,
    records_csv,
    run_curve,
    trial_seed,
    unrecovered_fraction_experiment,
    wilson_interval,
    write_csv,
)


def _symbols(n: int) -> list[EncodingSymbol]:
    return [EncodingSymbol(i, bytes([i % 256])) for i in range(n)]


def test_channel_extremes():
    syms = _symbols(500)
    assert bec_transmit(syms, ChannelConfig(0.0, 7)) == syms
    assert bec_transmit(syms, ChannelConfig(1.0, 7)) == []
    with pytest.raises(ValueError):
        ChannelConfig(1.5)


def test_channel_survival_fraction():
    n = 100_000
    kept = bec_transmit(_symbols(n), ChannelConfig(0.3, 11))
    sd = math.sqrt(0.3 * 0.7 / n)
    assert abs(len(kept) / n - 0.7) <= 4 * sd
    esis = [s.esi for s in kept]
    assert esis == sorted(esis) and len(set(esis)) == len(esis)


def test_channel_is_seeded():
    a = ChannelConfig(0.4, 3).erasures(1000)
    assert np.array_equal(a, ChannelConfig(0.4, 3).erasures(1000))
    assert not np.array_equal(a, ChannelConfig(0.4, 4).erasures(1000))


def test_erasures_have_no_lag_one_correlation():
    n = 1_000_000
    x = ChannelConfig(0.3, 99).erasures(n).astype(np.float64)
    r = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert abs(r) <= 4 / math.sqrt(n)


def test_wilson_interval_examples():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0 and 0.0 < hi < 0.35
    lo, hi = wilson_interval(10, 10)
    assert hi == 1.0 and lo > 0.65
    lo, hi = wilson_interval(50, 100)
    assert (lo + hi) / 2 == pytest.approx(0.5)
    assert lo == pytest.approx(0.4038, abs=1e-4)
    with pytest.raises(ValueError):
        wilson_interval(3, 2)


def test_record_interval_contains_rate():
    for f in (0, 1, 7, 20):
        r = ExperimentRecord(16, 0.1, "bp", 20, f)
        assert r.lo <= r.rate <= r.hi
    with pytest.raises(ValueError):
        ExperimentRecord(16, 0.1, "bp", 5, 6)


def test_wilson_covers_analytical_rate():
    # many small dense-code experiments, each judged against the exact failure probability
    k, n = 8, 10
    truth = 1.0 - full_rank_prob(k, n, 2)
    cfg = CodecConfig("dense", k)
    meta = 400
    covered = 0
    for base in range(meta):
        rec = run_curve(cfg, [0.25], "ml", 200, base_seed=base)[0]
        covered += rec.lo <= truth <= rec.hi
    assert covered / meta >= 0.93


def test_dense_curve_matches_exact_failure():
    k, trials = 16, 40_000
    cfg = CodecConfig("dense", k)
    overheads = [0.0, 0.125, 0.25]
    for rec in run_curve(cfg, overheads, "ml", trials, base_seed=5):
        p = 1.0 - full_rank_prob(k, received_count(k, rec.overhead), 2)
        assert abs(rec.rate - p) <= 4 * math.sqrt(p * (1 - p) / trials)


def test_dense_curve_rejects_other_decoders():
    with pytest.raises(ValueError):
        run_curve(CodecConfig("dense", 8), [0.1], "bp", 10)


def test_single_trial_rate_is_zero_or_one():
    d = DegreeDistribution(np.array([1.0]), 1)
    for dec in ("bp", "ml", "inactivation"):
        rec = run_curve(CodecConfig("lt", 1, d), [5.0], dec, 1)[0]
        assert rec.rate in (0.0, 1.0)
    assert run_curve(CodecConfig("dense", 1), [5.0], "ml", 1)[0].rate in (0.0, 1.0)


def test_codec_config_errors():
    with pytest.raises(ValueError):
        CodecConfig("lt", 10)
    with pytest.raises(ValueError):
        CodecConfig("turbo", 10)
    with pytest.raises(ValueError):
        run_curve(CodecConfig("dense", 4), [0.0], "ml", 0)


def test_curve_independent_of_workers():
    cfg = CodecConfig("lt", 60, robust_soliton(60, 0.1, 0.5), 0.1)
    overheads = [0.05, 0.2, 0.4]
    one = run_curve(cfg, overheads, "bp", 30, base_seed=17, workers=1)
    two = run_curve(cfg, overheads, "bp", 30, base_seed=17, workers=2)
    assert records_csv(one) == records_csv(two)
    assert records_csv(one) == records_csv(run_curve(cfg, overheads, "bp", 30, base_seed=17))


def test_decoder_ordering_on_shared_trials():
    # same seeds for every decoder: peeling can only fail more often than ml
    cfg = CodecConfig("lt", 50, robust_soliton(50, 0.1, 0.5))
    overheads = [0.0, 0.1, 0.3]
    bp = run_curve(cfg, overheads, "bp", 60, base_seed=3)
    ml = run_curve(cfg, overheads, "ml", 60, base_seed=3)
    ina = run_curve(cfg, overheads, "inactivation", 60, base_seed=3)
    for b, m, i in zip(bp, ml, ina):
        assert m.failures <= b.failures
        assert m.failures == i.failures


def test_csv_format(tmp_path):
    recs = [ExperimentRecord(32, 0.3125, "ml", 3, 1)]
    text = records_csv(recs)
    assert text.splitlines()[0] == "k,overhead,decoder,trials,failures,rate,lo,hi"
    row = text.splitlines()[1].split(",")
    assert row[:6] == ["32", "0.3125", "ml", "3", "1", "0.3333333333"]
    path = tmp_path / "curve.csv"
    write_csv(recs, path)
    assert path.read_text() == text


def test_trial_seed_vector_form():
    t = np.arange(0, 500, dtype=np.uint64)
    vec = _trial_seeds(9, 2, t)
    assert [int(v) for v in vec] == [trial_seed(9, 2, int(i)) for i in t]
    assert trial_seed(9, 2, 0) != trial_seed(9, 3, 0)


def test_unrecovered_fraction_examples():
    k = 10_000
    copy = DegreeDistribution(np.array([1.0]))
    assert unrecovered_fraction_experiment(copy, k, 0.0, 5) == pytest.approx(math.exp(-1), abs=0.01)
    pairs = DegreeDistribution(np.array([0.0, 1.0]))
    assert unrecovered_fraction_experiment(pairs, 200, 0.5, 3) == 1.0


def test_unrecovered_fraction_small_raptor():
    # quick version of the desk-scale density evolution check
    frac = unrecovered_fraction_experiment(raptor_reference(), 2000, 0.3, 5, base_seed=1)
    assert 0.0 <= frac < 0.05


def test_parse_config(tmp_path):
    text = "# curve\ncodec = lt\nk=100  # inputs\n\ndist = robust\n"
    assert parse_config(text) == {"codec": "lt", "k": "100", "dist": "robust"}
    with pytest.raises(ValueError, match="line 2"):
        parse_config("a=1\nnot a pair\n")
    with pytest.raises(ValueError):
        parse_config("=3")
    p = tmp_path / "exp.cfg"
    p.write_text(text)
    assert read_config(p)["k"] == "100"
