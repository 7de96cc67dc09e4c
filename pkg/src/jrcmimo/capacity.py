"""Channel capacity under unintentional amplitude modulation.

All capacities are in nats times the bandwidth ``B`` (``B = 1`` gives nats
per channel use).  ``c_gamma = P_t / (sigma_N**2 B)`` is the reference SNR;
the instantaneous SNR is ``gamma = c_gamma A**2 / M`` without fading and
``c_gamma (A H)**2 / M`` with it.

Regimes
-------
stable
    constant amplitude ``A0``: ``B ln(1 - c_gamma ln p0)``.
ergodic
    truncated-Rayleigh amplitude, closed form in ``E1``.
outage
    slow fading; ``c_gamma`` replaced by
    ``gamma_tilde = -E|h|**2 c_gamma ln(1 - p_out)`` in the ergodic form.
fast
    fast fading; quadrature of ``ln(1 + gamma)`` against the product SNR
    density, with a Meijer-G closed form for the unwindowed Rayleigh case.
"""

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from ._quad import integrate_1d
from .distributions import FadingKind, FadingModel, TruncationWindow, power_gain_pdf
from .errors import SweepError
from .specfun import meijer_g_capacity_kernel, scaled_e1

__all__ = [
    "SnrConfig", "Regime", "CapacityResult", "OutageSpec", "C_GAMMA_FLOOR",
    "capacity_stable", "capacity_ergodic_truncated", "capacity_rayleigh_csi",
    "capacity_single_side_approx", "outage_capacity", "optimal_outage",
    "capacity_fast_fading", "capacity_fast_fading_meijer", "capacity_sweep",
    "awgn_methods", "awgn_sweep", "approximation_table", "results_to_csv",
]

# below this c_gamma, e^{1/c} E1(1/c) is indeterminate in double precision
C_GAMMA_FLOOR = 1e-8
FAST_TAIL_MASS = 1e-10


@dataclass(frozen=True)
class SnrConfig:
    """Transmit power, noise level and bandwidth.

    ``p_t = 0`` is allowed and gives zero capacity everywhere.
    """

    p_t: float
    sigma_n2: float = 1.0
    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.p_t >= 0 or math.isinf(self.p_t):
            raise ValueError(f"p_t must be finite and >= 0, got {self.p_t}")
        if not self.sigma_n2 > 0:
            raise ValueError(f"sigma_n2 must be > 0, got {self.sigma_n2}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")

    @classmethod
    def from_c_gamma(cls, c_gamma, bandwidth=1.0):
        return cls(float(c_gamma), 1.0 / bandwidth, bandwidth)

    @classmethod
    def from_db(cls, snr_db, bandwidth=1.0):
        return cls.from_c_gamma(10.0 ** (snr_db / 10.0), bandwidth)

    @property
    def c_gamma(self):
        return self.p_t / (self.sigma_n2 * self.bandwidth)

    def to_dict(self):
        return {"p_t": self.p_t, "sigma_n2": self.sigma_n2,
                "bandwidth": self.bandwidth, "c_gamma": self.c_gamma}


class Regime(str, Enum):
    STABLE_AWGN = "stable"
    ERGODIC_UNINTENTIONAL = "ergodic"
    SLOW_FADING_OUTAGE = "outage"
    FAST_FADING_ERGODIC = "fast"


@dataclass(frozen=True)
class CapacityResult:
    nats: float
    regime: Regime
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.nats >= 0:
            raise ValueError(f"capacity must be >= 0, got {self.nats}")

    @property
    def bits(self):
        return self.nats / math.log(2.0)

    def to_dict(self):
        return {"nats": self.nats, "regime": Regime(self.regime).value,
                "params": self.params}


@dataclass(frozen=True)
class OutageSpec:
    p_out: float

    def __post_init__(self):
        if not 0 < self.p_out < 1:
            raise ValueError(f"p_out must lie in (0, 1), got {self.p_out}")

    def gamma_tilde(self, c_gamma, fading):
        """``-E|h|**2 c_gamma ln(1 - p_out)``."""
        return -fading.mean_power * c_gamma * math.log1p(-self.p_out)

    def gamma_min(self, c_gamma, fading, amplitude, m):
        """Per-amplitude outage threshold ``gamma_tilde A**2 / M``."""
        return self.gamma_tilde(c_gamma, fading) * amplitude ** 2 / m


def _ergodic_nats(c, t1, t2):
    """``E[ln(1 + c T)]`` for ``T ~ Exp(1)`` truncated to ``[t1, t2]``.

    Integration by parts gives
    ``[ln(1+c t1) e^-t1 - ln(1+c t2) e^-t2 + e^{1/c}(E1(1/c+t1) - E1(1/c+t2))] / alpha``;
    each bracket term is rewritten relative to ``e^-t1`` with
    ``e^{1/c} E1(1/c + t) = e^-t * scaled_e1(1/c + t)``.
    """
    if c < C_GAMMA_FLOOR:
        return 0.0
    inv = 1.0 / c
    head = math.log1p(c * t1) + scaled_e1(inv + t1)
    if math.isinf(t2):
        return head
    width = t2 - t1
    tail = math.log1p(c * t2) + scaled_e1(inv + t2)
    return max((head - math.exp(-width) * tail) / -math.expm1(-width), 0.0)


def capacity_stable(snr, m, p0):
    """Constant-amplitude capacity ``B ln(1 - c_gamma ln p0)``."""
    if not 0 < p0 < 1:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    nats = snr.bandwidth * math.log1p(-snr.c_gamma * math.log(p0))
    return CapacityResult(nats, Regime.STABLE_AWGN,
                          {"snr": snr.to_dict(), "m": m, "p0": p0})


def capacity_ergodic_truncated(snr, win):
    """Ergodic capacity with a truncated-Rayleigh amplitude window."""
    nats = snr.bandwidth * _ergodic_nats(snr.c_gamma, win.t1, win.t2)
    return CapacityResult(nats, Regime.ERGODIC_UNINTENTIONAL,
                          {"snr": snr.to_dict(), "window": win.to_dict()})


def capacity_rayleigh_csi(snr):
    """Rayleigh-fading capacity with receiver CSI, ``B e^{1/c} E1(1/c)``."""
    c = snr.c_gamma
    nats = 0.0 if c < C_GAMMA_FLOOR else snr.bandwidth * scaled_e1(1.0 / c)
    return CapacityResult(nats, Regime.ERGODIC_UNINTENTIONAL,
                          {"snr": snr.to_dict(), "window": "none"})


def capacity_single_side_approx(snr, m, p0):
    """``B[ln(1 - c ln p0) + e^{1/c} E1(1/c - ln p0) / p0]``.

    The ``A <= M`` cap of the single-side window is dropped, so the result
    does not depend on ``m`` (kept for provenance).
    """
    if not 0 < p0 < 1:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    c = snr.c_gamma
    t0 = -math.log(p0)
    nats = 0.0 if c < C_GAMMA_FLOOR else snr.bandwidth * (
        math.log1p(c * t0) + scaled_e1(1.0 / c + t0))
    return CapacityResult(nats, Regime.ERGODIC_UNINTENTIONAL,
                          {"snr": snr.to_dict(), "m": m, "p0": p0,
                           "window": "single-side, uncapped"})


def _require_fading(fading):
    if fading.kind is FadingKind.AWGN:
        raise ValueError("this regime needs Rayleigh or Rician fading")


def outage_capacity(snr, win, fading, outage):
    """Slow-fading outage capacity and average rate ``(1 - p_out) C``.

    The outage threshold scales with ``A**2``, so substituting
    ``gamma_tilde`` for ``c_gamma`` in the ergodic closed form over the same
    window averages it over the amplitude exactly.
    """
    _require_fading(fading)
    g = outage.gamma_tilde(snr.c_gamma, fading)
    nats = snr.bandwidth * _ergodic_nats(g, win.t1, win.t2)
    params = {"snr": snr.to_dict(), "window": win.to_dict(),
              "fading": fading.to_dict(), "p_out": outage.p_out,
              "gamma_tilde": g}
    return (CapacityResult(nats, Regime.SLOW_FADING_OUTAGE, params),
            CapacityResult((1.0 - outage.p_out) * nats,
                           Regime.SLOW_FADING_OUTAGE, params))


def optimal_outage(snr, win, fading, lo=1e-3, hi=0.999, coarse=99, xtol=1e-4):
    """Outage probability maximizing the average rate.

    A coarse grid brackets the peak, then a bounded golden-section
    (Brent) search refines it to ``xtol``.

    Returns
    -------
    p_out : float
    rate : CapacityResult
    """
    def neg_rate(p):
        return -outage_capacity(snr, win, fading, OutageSpec(p))[1].nats

    grid = np.linspace(lo, hi, coarse)
    vals = np.array([neg_rate(p) for p in grid])
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, coarse - 1)]
    res = optimize.minimize_scalar(neg_rate, bounds=(a, b), method="bounded",
                                   options={"xatol": xtol})
    p = float(res.x) if res.fun <= vals[k] else float(grid[k])
    return p, outage_capacity(snr, win, fading, OutageSpec(p))[1]


def _power_gain_upper(win, fading, tail=FAST_TAIL_MASS):
    """Power-gain level beyond which less than ``tail`` mass remains."""
    log_inv = math.log(2.0 / tail)
    t_max = win.t2 if not math.isinf(win.t2) else win.t1 + log_inv
    h_max = fading.sigma_h * math.sqrt(2.0 * log_inv) + (
        fading.mu if fading.kind is FadingKind.RICIAN else 0.0)
    return win.m * t_max * h_max ** 2


def capacity_fast_fading(snr, win, fading, rel_tol=1e-9, abs_tol=1e-11):
    """Ergodic capacity ``E[B ln(1 + gamma)]`` over amplitude and fast fading.

    Integrates ``ln(1 + c W / M)`` against the power-gain density ``p_W``
    (equivalent to the SNR density after ``gamma = c W / M``) up to the
    ``1e-10`` tail point, split at multiples of the mean gain.
    """
    _require_fading(fading)
    c = snr.c_gamma
    params = {"snr": snr.to_dict(), "window": win.to_dict(),
              "fading": fading.to_dict(), "method": "quadrature"}
    if c < C_GAMMA_FLOOR:
        return CapacityResult(0.0, Regime.FAST_FADING_ERGODIC, params)
    m = win.m
    upper = _power_gain_upper(win, fading)
    mean = m * max(win.t1, 1.0) * fading.mean_power
    breaks = [mean * f for f in (1e-3, 0.1, 1.0, 4.0, 16.0)]
    for t in (win.t1, win.t2):
        if math.isfinite(t) and t > 0:
            breaks.append(m * t * fading.mean_power)

    def integrand(w):
        if w <= 0.0:
            return 0.0
        return math.log1p(c * w / m) * power_gain_pdf(win, fading, w)

    val = integrate_1d(integrand, 0.0, upper, rel_tol=rel_tol, abs_tol=abs_tol,
                       breakpoints=breaks)
    return CapacityResult(snr.bandwidth * val, Regime.FAST_FADING_ERGODIC, params)


def capacity_fast_fading_meijer(snr, fading):
    """Unwindowed Rayleigh fast-fading capacity through the Meijer-G form.

    ``C = B z G^{3,1}_{1,3}(z | -1; -1, -1, 0)`` with
    ``z = 1 / (2 c_gamma sigma_h**2)``.
    """
    if fading.kind is not FadingKind.RAYLEIGH:
        raise ValueError("the Meijer-G form covers Rayleigh fading only")
    c = snr.c_gamma
    params = {"snr": snr.to_dict(), "fading": fading.to_dict(),
              "window": "none", "method": "meijer-g"}
    if c < C_GAMMA_FLOOR:
        return CapacityResult(0.0, Regime.FAST_FADING_ERGODIC, params)
    z = 1.0 / (2.0 * c * fading.sigma_h ** 2)
    return CapacityResult(snr.bandwidth * z * meijer_g_capacity_kernel(z),
                          Regime.FAST_FADING_ERGODIC, params)


def capacity_sweep(func, grid):
    """Evaluate ``func(**coords)`` over the Cartesian product of ``grid``.

    ``grid`` maps argument names to value sequences; points are visited in
    row-major order of the given keys.  ``func`` returns a
    :class:`CapacityResult` (or a dict of them, one per series).

    Returns
    -------
    list of (dict, result)
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("sweep grid is empty")
    keys = list(grid)
    out = []
    for values in itertools.product(*(grid[k] for k in keys)):
        coords = dict(zip(keys, values))
        try:
            out.append((coords, func(**coords)))
        except Exception as exc:
            raise SweepError(coords, exc) from exc
    return out


def awgn_methods(m, p0, snr):
    """The six amplitude-modulation series of the capacity-versus-SNR comparison."""
    upper = float(m)
    res = {"stable": capacity_stable(snr, m, p0),
           "single": capacity_ergodic_truncated(
               snr, TruncationWindow.single_side(m, p0, upper=upper))}
    for db in (1, 3, 6):
        res[f"delta_{db}db"] = capacity_ergodic_truncated(
            snr, TruncationWindow.delta(m, p0, db))
    res["none"] = capacity_ergodic_truncated(snr, TruncationWindow.none(m, upper=upper))
    return res


def awgn_sweep(m=16, p0=0.1, snr_db=tuple(range(-10, 31))):
    """Rows ``(snr_db, {series: CapacityResult})`` over the SNR grid."""
    return [(c["snr_db"], r) for c, r in capacity_sweep(
        lambda snr_db: awgn_methods(m, p0, SnrConfig.from_db(snr_db)),
        {"snr_db": list(snr_db)})]


def approximation_table(c_gamma=10.0, p0=0.1, ms=(8, 16, 32)):
    """Closed-form differences for the approximation table.

    For each ``m``: ``no_window`` is ``|C_RCSI - C(0, M)|`` and
    ``single_side`` is ``|approx - C(A0, M)|``, both per unit bandwidth.
    """
    snr = SnrConfig.from_c_gamma(c_gamma)
    rows = []
    for m in ms:
        exact_none = capacity_ergodic_truncated(snr, TruncationWindow.none(m, upper=m))
        exact_single = capacity_ergodic_truncated(
            snr, TruncationWindow.single_side(m, p0, upper=m))
        rows.append({
            "m": m,
            "no_window": abs(capacity_rayleigh_csi(snr).nats - exact_none.nats),
            "single_side": abs(capacity_single_side_approx(snr, m, p0).nats
                               - exact_single.nats),
        })
    return rows


def results_to_csv(rows, columns, metadata=None):
    """CSV text with an optional ``#``-prefixed JSON metadata line.

    ``rows`` are dicts holding at least ``columns``.
    """
    buf = io.StringIO()
    if metadata is not None:
        buf.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
