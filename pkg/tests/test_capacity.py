import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jrcmimo.capacity import (CapacityResult, OutageSpec, Regime, SnrConfig,
                              capacity_ergodic_truncated, capacity_fast_fading,
                              capacity_fast_fading_meijer, capacity_rayleigh_csi,
                              capacity_single_side_approx, capacity_stable,
                              capacity_sweep, awgn_methods, awgn_sweep,
                              optimal_outage, outage_capacity, results_to_csv,
                              approximation_table)
from jrcmimo.distributions import FadingModel, TruncationWindow
from jrcmimo.errors import SweepError
from jrcmimo.montecarlo import ProductChannelModel, empirical_capacity
from jrcmimo.specfun import exp_integral_e1
from jrcmimo.validation import capacity_quadrature

M, P0 = 16, 0.1


def snr(c):
    return SnrConfig.from_c_gamma(c)


def test_snr_config():
    s = SnrConfig(4.0, 0.5, 2.0)
    assert s.c_gamma == pytest.approx(4.0)
    assert SnrConfig.from_db(10).c_gamma == pytest.approx(10.0)
    for bad in ((-1.0,), (1.0, 0.0), (1.0, 1.0, 0.0), (math.inf,)):
        with pytest.raises(ValueError):
            SnrConfig(*bad)


def test_result_bits_and_validation():
    r = CapacityResult(math.log(2), Regime.STABLE_AWGN)
    assert r.bits == pytest.approx(1.0)
    assert r.to_dict()["regime"] == "stable"
    with pytest.raises(ValueError):
        CapacityResult(-1e-3, Regime.STABLE_AWGN)


def test_stable():
    assert capacity_stable(snr(3.0), M, math.exp(-1)).nats == pytest.approx(math.log(4))
    assert capacity_stable(snr(0.0), M, P0).nats == 0.0
    a0 = math.sqrt(-M * math.log(P0))
    direct = math.log(1 + a0 ** 2 * 10 / M)
    assert capacity_stable(snr(10), M, P0).nats == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        capacity_stable(snr(1), M, 1.0)


def test_rayleigh_csi():
    c = capacity_rayleigh_csi(snr(10)).nats
    assert c == pytest.approx(math.exp(0.1) * exp_integral_e1(0.1), rel=1e-14)
    assert c == pytest.approx(2.0146, abs=1e-4)
    assert capacity_rayleigh_csi(snr(1e-12)).nats == 0.0


@given(st.floats(1e-6, 1e6))
def test_rayleigh_csi_below_awgn(c):
    assert capacity_rayleigh_csi(snr(c)).nats <= math.log1p(c) * (1 + 1e-12)


WINDOWS = [
    TruncationWindow.none(M), TruncationWindow.none(M, upper=M),
    TruncationWindow.single_side(M, P0), TruncationWindow.single_side(M, P0, upper=M),
    TruncationWindow.delta(M, P0, 1), TruncationWindow.delta(M, P0, 3),
    TruncationWindow.delta(M, P0, 6),
]


@pytest.mark.parametrize("win", WINDOWS, ids=lambda w: f"{w.a1:.3g}-{w.a2:.3g}")
@pytest.mark.parametrize("c", [0.1, 1, 10, 100])
def test_closed_form_matches_quadrature(win, c):
    exact = capacity_ergodic_truncated(snr(c), win).nats
    assert exact == pytest.approx(capacity_quadrature(snr(c), win), rel=1e-8)


def test_ergodic_bandwidth_scaling():
    win = WINDOWS[4]
    one = capacity_ergodic_truncated(snr(5), win).nats
    s = SnrConfig(5.0 * 3e6, 1.0, 3e6)
    assert capacity_ergodic_truncated(s, win).nats == pytest.approx(3e6 * one, rel=1e-12)


@pytest.mark.parametrize("win", WINDOWS[:5], ids=str)
def test_strictly_increasing_in_snr(win):
    vals = [capacity_ergodic_truncated(snr(10 ** (db / 10)), win).nats
            for db in range(-20, 41, 2)]
    assert np.all(np.diff(vals) > 0)


def test_tiny_snr_floor():
    assert capacity_ergodic_truncated(snr(1e-9), WINDOWS[2]).nats == 0.0
    small = capacity_ergodic_truncated(snr(1e-6), WINDOWS[2]).nats
    assert small == pytest.approx(1e-6 * (WINDOWS[2].t1 + 1), rel=1e-4)


def test_single_side_approx_difference():
    rows = {r["m"]: r for r in approximation_table(ms=(16, 32))}
    assert rows[32]["single_side"] < 1e-12
    assert rows[32]["no_window"] < 1e-12
    # the uncapped approximation is exact for the uncapped window
    approx = capacity_single_side_approx(snr(10), M, P0).nats
    exact = capacity_ergodic_truncated(snr(10), WINDOWS[2]).nats
    assert approx == pytest.approx(exact, rel=1e-13)


def test_awgn_ordering():
    for db, res in awgn_sweep(snr_db=range(0, 31, 2)):
        order = [res[k].nats for k in ("single", "delta_1db", "delta_3db",
                                       "delta_6db", "none")]
        assert all(a >= b for a, b in zip(order, order[1:])), db


def test_awgn_sweep_csv():
    rows = awgn_sweep(snr_db=(-10, 0, 30))
    assert [r[0] for r in rows] == [-10, 0, 30]
    cols = ["snr_db", "stable", "single", "delta_1db", "delta_3db", "delta_6db", "none"]
    flat = [{"snr_db": db, **{k: v.nats for k, v in res.items()}} for db, res in rows]
    text = results_to_csv(flat, cols, {"m": M})
    lines = text.splitlines()
    assert lines[0].startswith("# ") and json.loads(lines[0][2:]) == {"m": M}
    assert lines[1].split(",") == cols and len(lines) == 5


def test_sweep_errors_and_singleton():
    with pytest.raises(ValueError):
        capacity_sweep(lambda c: None, {})
    with pytest.raises(ValueError):
        capacity_sweep(lambda c: None, {"c": []})
    one = capacity_sweep(lambda c: capacity_stable(snr(c), M, P0), {"c": [2.0]})
    assert one[0][1] == capacity_stable(snr(2.0), M, P0)
    with pytest.raises(SweepError) as info:
        capacity_sweep(lambda c, p0: capacity_stable(snr(c), M, p0),
                       {"c": [1.0], "p0": [0.5, 2.0]})
    assert info.value.coords == {"c": 1.0, "p0": 2.0}


# --- outage ----------------------------------------------------------------

RAY = FadingModel.rayleigh(math.sqrt(0.5))


def test_outage_spec():
    with pytest.raises(ValueError):
        OutageSpec(0.0)
    spec = OutageSpec(0.2)
    assert spec.gamma_tilde(10.0, RAY) == pytest.approx(-10 * math.log(0.8))
    assert spec.gamma_min(10.0, RAY, 4.0, 16) == pytest.approx(spec.gamma_tilde(10.0, RAY))


def test_outage_limits():
    win = WINDOWS[3]
    cap, rate = outage_capacity(snr(10), win, RAY, OutageSpec(1e-12))
    assert cap.nats < 1e-9
    cap, rate = outage_capacity(snr(10), win, RAY, OutageSpec(1 - 1e-9))
    assert rate.nats < 1e-6 < cap.nats
    with pytest.raises(ValueError):
        outage_capacity(snr(10), win, FadingModel.awgn(), OutageSpec(0.1))


@pytest.mark.parametrize("db", [0, 10, 20])
def test_outage_unimodal_and_argmax(db):
    win = WINDOWS[3]
    grid = np.linspace(0.01, 0.99, 99)
    rates = np.array([outage_capacity(SnrConfig.from_db(db), win, RAY,
                                      OutageSpec(p))[1].nats for p in grid])
    k = int(np.argmax(rates))
    assert np.all(np.diff(rates[:k + 1]) >= 0) and np.all(np.diff(rates[k:]) <= 0)
    p, best = optimal_outage(SnrConfig.from_db(db), win, RAY)
    assert best.nats >= rates.max() - 1e-12
    assert abs(p - grid[k]) <= 0.011


@given(st.floats(-10, 30), st.floats(0.01, 0.99))
def test_outage_below_matched_awgn(db, p):
    s = SnrConfig.from_db(db)
    win = WINDOWS[3]
    cap, rate = outage_capacity(s, win, RAY, OutageSpec(p))
    matched = SnrConfig.from_c_gamma(s.c_gamma * RAY.mean_power)
    awgn = capacity_ergodic_truncated(matched, win).nats * (1 + 1e-12)
    assert rate.nats <= awgn
    # the conditional capacity alone exceeds it once gamma_tilde > E|h|^2 c
    if p <= 1 - math.exp(-1):
        assert cap.nats <= awgn


# --- fast fading -----------------------------------------------------------

@pytest.mark.parametrize("c", [0.1, 1.0, 10.0, 100.0])
def test_fast_fading_meijer_route(c):
    win = TruncationWindow.none(M)
    quad = capacity_fast_fading(snr(c), win, RAY).nats
    assert capacity_fast_fading_meijer(snr(c), RAY).nats == pytest.approx(quad, rel=1e-6)
    with pytest.raises(ValueError):
        capacity_fast_fading_meijer(snr(c), FadingModel.rician(1, 3))


def test_fast_fading_zero_snr():
    assert capacity_fast_fading(snr(0.0), WINDOWS[2], RAY).nats == 0.0


@pytest.mark.parametrize("win", [TruncationWindow.none(M), WINDOWS[2], WINDOWS[5]],
                         ids=["none", "single", "double"])
def test_rician_beats_rayleigh(win):
    ric = FadingModel.rician(math.sqrt(0.5), 3.0)
    for db in (0, 10, 20):
        s = SnrConfig.from_db(db)
        assert capacity_fast_fading(s, win, ric).nats >= capacity_fast_fading(s, win, RAY).nats


def test_fast_fading_monte_carlo():
    win = WINDOWS[5]
    fad = FadingModel.rician(math.sqrt(0.5), 3.0)
    exact = capacity_fast_fading(snr(10), win, fad).nats
    mc = empirical_capacity(ProductChannelModel(win, fad), 10.0, 400_000, seed=3)
    assert abs(mc.nats - exact) <= 3 * mc.standard_error
