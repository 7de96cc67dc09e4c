import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from jrcmimo.distributions import (FadingModel, TruncationWindow, amplitude_pdf_curve,
                                   fading_pdf_curve)
from jrcmimo.errors import CoverageError
from jrcmimo.montecarlo import (CHUNK, ProductChannelModel, RayleighModel,
                                RicianModel, SampleBatch, TruncatedRayleighModel,
                                empirical_capacity, goodness_of_fit, ks_statistic,
                                sample, waveform_amplitude_harvest)
from jrcmimo.waveform import ArrayConfig, ConstraintMode, ConstraintSpec

M = 16


def test_sample_deterministic_and_prefix():
    model = RicianModel(1.0, 3.0)
    a = sample(model, 1000, seed=7)
    b = sample(model, 1000, seed=7)
    assert np.array_equal(a.values, b.values)
    long = sample(model, CHUNK + 500, seed=7)
    assert np.array_equal(long.values[:1000], a.values)
    assert not np.array_equal(sample(model, 1000, seed=8).values, a.values)
    assert len(long) == CHUNK + 500


def test_sample_rejects_bad_n():
    for n in (0, -3, 2.5):
        with pytest.raises(ValueError):
            sample(RayleighModel(), n)


def test_batch_invariants_and_csv():
    with pytest.raises(ValueError):
        SampleBatch(np.array([1.0, -1.0]), 0, "x")
    with pytest.raises(ValueError):
        SampleBatch(np.array([np.inf]), 0, "x")
    batch = sample(RayleighModel(2.0), 5, seed=[1, 2])
    lines = batch.to_csv().splitlines()
    head = json.loads(lines[0][2:])
    assert head == {"tag": "rayleigh(sigma=2.0)", "seed": [1, 2], "count": 5}
    assert lines[1] == "value" and float(lines[2]) == batch.values[0]


def test_ks_statistic_matches_scipy():
    x = np.random.default_rng(0).normal(size=500)
    ref = stats.kstest(x, stats.norm.cdf).statistic
    assert ks_statistic(x, stats.norm.cdf) == pytest.approx(ref, abs=1e-14)


def test_truncated_model_support():
    win = TruncationWindow.delta(M, 0.1, 1.0)
    v = sample(TruncatedRayleighModel(win), 50_000, seed=1).values
    assert v.min() >= win.a1 and v.max() <= win.a2


@pytest.mark.parametrize("win", [TruncationWindow.none(M),
                                 TruncationWindow.single_side(M, 0.1),
                                 TruncationWindow.delta(M, 0.1, 3.0)],
                         ids=["none", "single", "double"])
def test_amplitude_self_consistency(win):
    batch = sample(TruncatedRayleighModel(win), 10 ** 6, seed=2)
    assert goodness_of_fit(batch, amplitude_pdf_curve(win)).ks_statistic < 0.002


def test_rician_zero_k_is_rayleigh():
    batch = sample(RicianModel(1.0, 0.0), 10 ** 5, seed=4)
    curve = fading_pdf_curve(FadingModel.rayleigh(1.0))
    assert goodness_of_fit(batch, curve).ks_statistic < 0.01


def test_mismatch_detected():
    batch = sample(RicianModel(1.0, 3.0), 10 ** 5, seed=4)
    assert goodness_of_fit(batch, fading_pdf_curve(FadingModel.rayleigh(1.0))).ks_statistic > 0.05


def test_coverage_error():
    batch = sample(RayleighModel(1.0), 10_000, seed=0)
    narrow = fading_pdf_curve(FadingModel.rayleigh(0.3))
    with pytest.raises(CoverageError):
        goodness_of_fit(batch, narrow)


def test_gof_report_json():
    batch = sample(RayleighModel(1.0), 10_000, seed=0)
    rep = goodness_of_fit(batch, fading_pdf_curve(FadingModel.rayleigh(1.0)))
    doc = json.loads(rep.to_json())
    assert doc["sample_count"] == 10_000 and 0 <= doc["ks_statistic"] <= 1
    assert doc["mean_abs_density_error"] < 0.05


def test_product_model_requires_fading():
    with pytest.raises(ValueError):
        ProductChannelModel(TruncationWindow.none(M), FadingModel.awgn())


def test_empirical_capacity_standard_error_scaling():
    model = TruncatedRayleighModel(TruncationWindow.single_side(M, 0.1))
    small = empirical_capacity(model, 10.0, 10_000, seed=1)
    big = empirical_capacity(model, 10.0, 40_000, seed=1)
    assert big.standard_error / small.standard_error == pytest.approx(0.5, rel=0.05)
    assert empirical_capacity(model, 0.0, 1000).nats == 0.0
    with pytest.raises(ValueError):
        empirical_capacity(model, 10.0, 999)
    with pytest.raises(ValueError):
        empirical_capacity(model, -1.0, 1000)


def test_empirical_capacity_chunk_consistent():
    model = ProductChannelModel(TruncationWindow.none(M), FadingModel.rayleigh(1.0))
    n = CHUNK + 3000
    est = empirical_capacity(model, 5.0, n, seed=9)
    vals = sample(model, n, seed=9).values
    direct = np.mean(np.log1p(5.0 * vals ** 2 / M))
    assert est.nats == pytest.approx(direct, rel=1e-12)


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32 - 1))
def test_models_nonnegative(seed):
    win = TruncationWindow.single_side(M, 0.1)
    for model in (RayleighModel(), RicianModel(0.7, 2.0), TruncatedRayleighModel(win),
                  ProductChannelModel(win, FadingModel.rician(1.0, 3.0))):
        assert np.all(sample(model, 200, seed=seed).values >= 0)


def test_waveform_harvest():
    cfg = ArrayConfig(16, 32, math.radians(-22), math.radians(30))
    spec = ConstraintSpec(ConstraintMode.DOUBLE_SIDE, p0=0.1, delta_db=3.0)
    batch = waveform_amplitude_harvest(cfg, spec, pulses=3, seed=5)
    lo, hi = spec.window(16)
    assert len(batch) == 96 and batch.values.min() >= lo and batch.values.max() <= hi
    again = waveform_amplitude_harvest(cfg, spec, pulses=2, seed=5)
    assert np.array_equal(again.values, batch.values[:64])
    with pytest.raises(ValueError):
        waveform_amplitude_harvest(cfg, spec, pulses=0)
