r"""Densities of the unintentional amplitude modulation and its fading products.

Coordinates
-----------
The radiated amplitude ``A`` is Rayleigh with per-component variance
``M/2``, i.e. ``p(rho) = (2 rho / M) exp(-rho**2 / M)``, optionally
truncated to ``[a1, a2]``.  In normalized power units ``t = rho**2 / M``
the window is ``[t1, t2]`` and the normalizer is
``alpha(t1, t2) = exp(-t1) - exp(-t2)``.

The fading amplitude ``H`` is Rayleigh (``sigma_h``) or Rician
(``sigma_h``, ``K``, with ``mu = sigma_h sqrt(2K)``).  Every product density
is evaluated through the power gain ``W = Z**2`` with ``Z = A H``::

    p_W(w) = exp(-K) / (2 alpha M sigma_h**2)
             * sum_i (kappa K)**i / (i!)**2
                     * [Gamma(-i, t1; kappa) - Gamma(-i, t2; kappa)]

    kappa = w / (2 M sigma_h**2)

which collapses to the single ``i = 0`` term for Rayleigh fading and to
Bessel-K terms ``Gamma(-i, 0; kappa) = 2 kappa**(-i/2) K_i(2 sqrt(kappa))``
when the lower limit is zero.  The amplitude and SNR densities follow by
change of variables, ``p_Z(z) = 2 z p_W(z**2)`` and, with the SNR
``gamma = c_gamma Z**2 / M``, ``p_gamma(a) = (M / c_gamma) p_W(M a / c_gamma)``.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special

from .errors import ConvergenceError
from .specfun import gen_incomplete_gamma_window
from .waveform import db_to_amplitude_ratio, reference_amplitude

__all__ = [
    "FadingKind", "FadingModel", "TruncationWindow", "PdfCurve",
    "truncation_alpha", "rayleigh_amplitude_pdf", "truncated_rayleigh_pdf",
    "fading_amplitude_pdf", "amplitude_pdf_curve", "fading_pdf_curve",
    "snr_pdf_truncated", "product_pdf", "product_snr_pdf", "power_gain_pdf",
    "phase_pdf", "dispatch_case", "series_terms_used", "make_pdf_curve", "product_pdf_curve",
    "support_upper",
]

SERIES_MAX_TERMS = 200
SERIES_REL_STOP = 1e-12
NEGATIVE_CLAMP = -1e-12
TAIL_MASS = 1e-10


def truncation_alpha(t1, t2):
    """``exp(-t1) - exp(-t2)``, accurate for narrow windows."""
    if math.isinf(t2):
        return math.exp(-t1)
    return -math.exp(-t1) * math.expm1(t1 - t2)


class FadingKind(str, Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"


@dataclass(frozen=True)
class FadingModel:
    """Small-scale fading statistics of the complex channel gain ``h``.

    ``sigma_h`` is the standard deviation of each of the real and imaginary
    parts; ``k_factor`` is the Rician ``mu**2 / (2 sigma_h**2)``.
    """

    kind: FadingKind = FadingKind.RAYLEIGH
    sigma_h: float = 1.0
    k_factor: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FadingKind(self.kind))
        if self.kind is not FadingKind.AWGN and not self.sigma_h > 0:
            raise ValueError(f"sigma_h must be > 0, got {self.sigma_h}")
        if not self.k_factor >= 0:
            raise ValueError(f"k_factor must be >= 0, got {self.k_factor}")
        if self.kind is FadingKind.RAYLEIGH and self.k_factor != 0:
            raise ValueError("Rayleigh fading has no K factor")

    @classmethod
    def awgn(cls):
        return cls(FadingKind.AWGN, 1.0, 0.0)

    @classmethod
    def rayleigh(cls, sigma_h=1.0):
        return cls(FadingKind.RAYLEIGH, sigma_h, 0.0)

    @classmethod
    def rician(cls, sigma_h=1.0, k_factor=3.0):
        return cls(FadingKind.RICIAN, sigma_h, k_factor)

    @property
    def mu(self):
        """Line-of-sight amplitude (non-centrality)."""
        return self.sigma_h * math.sqrt(2.0 * self.k_factor)

    @property
    def mean_power(self):
        """``E|h|**2``: 1 for AWGN, ``mu**2 + 2 sigma_h**2`` otherwise."""
        if self.kind is FadingKind.AWGN:
            return 1.0
        return self.mu ** 2 + 2.0 * self.sigma_h ** 2

    def to_dict(self):
        return {"kind": self.kind.value, "sigma_h": self.sigma_h,
                "k_factor": self.k_factor}


@dataclass(frozen=True)
class TruncationWindow:
    """Amplitude window ``a1 <= A <= a2`` for an ``m``-element array."""

    a1: float
    a2: float
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not (0 <= self.a1 < self.a2):
            raise ValueError(f"need 0 <= a1 < a2, got ({self.a1}, {self.a2})")

    @classmethod
    def none(cls, m, upper=math.inf):
        """No constraint; pass ``upper=m`` for the physical bound ``A <= M``."""
        return cls(0.0, upper, m)

    @classmethod
    def single_side(cls, m, p0, upper=math.inf):
        """``A >= A0`` with ``A0 = sqrt(-M ln p0)``."""
        return cls(reference_amplitude(m, p0), upper, m)

    @classmethod
    def delta(cls, m, p0, delta_db):
        """``A0/Delta <= A <= A0*Delta`` with ``Delta = 10**(delta_db/20)``."""
        a0 = reference_amplitude(m, p0)
        ratio = db_to_amplitude_ratio(delta_db)
        return cls(a0 / ratio, a0 * ratio, m)

    @property
    def t1(self):
        return self.a1 ** 2 / self.m

    @property
    def t2(self):
        return self.a2 ** 2 / self.m

    @property
    def alpha(self):
        return truncation_alpha(self.t1, self.t2)

    @property
    def shape(self):
        if math.isinf(self.a2):
            return "none" if self.a1 == 0 else "single"
        return "double"

    def to_dict(self):
        return {"a1": self.a1, "a2": self.a2, "m": self.m, "shape": self.shape}


@dataclass
class PdfCurve:
    """A density sampled on a grid, with its trapezoid mass."""

    grid: np.ndarray
    density: np.ndarray
    total_mass: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.grid.shape != self.density.shape or self.grid.ndim != 1:
            raise ValueError("grid and density must be 1-D of equal length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.density < 0):
            raise ValueError("density must be nonnegative")

    def cdf(self):
        """Cumulative trapezoid integral on the grid, starting at zero."""
        steps = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.grid)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def to_csv_rows(self):
        return [(float(x), float(p)) for x, p in zip(self.grid, self.density)]

    def to_json(self, **kwargs):
        return json.dumps({
            "metadata": self.metadata,
            "total_mass": self.total_mass,
            "grid": self.grid.tolist(),
            "density": self.density.tolist(),
        }, **kwargs)


def make_pdf_curve(func, grid, metadata=None):
    """Evaluate ``func`` on ``grid`` and wrap the result as a :class:`PdfCurve`."""
    grid = np.asarray(grid, dtype=float)
    dens = np.array([func(x) for x in grid], dtype=float)
    dens = np.where(np.isinf(dens), 0.0, dens)
    mass = float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)))
    return PdfCurve(grid, dens, mass, dict(metadata or {}))


def _guard(value):
    if math.isnan(value):
        raise ConvergenceError("density evaluated to NaN")
    if value < 0:
        if value > NEGATIVE_CLAMP:
            return 0.0
        raise ConvergenceError(f"negative density {value:.3g}: series misconvergence")
    return value


def rayleigh_amplitude_pdf(m, rho):
    """Rayleigh amplitude density ``(2 rho / M) exp(-rho**2 / M)``, ``rho >= 0``."""
    rho = np.asarray(rho, dtype=float)
    out = np.where(rho >= 0, 2.0 * rho / m * np.exp(-rho * rho / m), 0.0)
    return out if out.ndim else float(out)


def truncated_rayleigh_pdf(win, rho):
    """Rayleigh amplitude density restricted to ``[a1, a2]`` and renormalized."""
    rho = np.asarray(rho, dtype=float)
    inside = (rho >= win.a1) & (rho <= win.a2)
    # exp(-rho^2/M)/alpha written relative to exp(-t1) to survive large t1
    with np.errstate(over="ignore", invalid="ignore"):
        val = 2.0 * rho / (win.m * (win.alpha * math.exp(win.t1))) \
            * np.exp(win.t1 - rho * rho / win.m)
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def fading_amplitude_pdf(fading, h):
    """Density of the fading amplitude ``|h|`` (Rayleigh or Rician)."""
    if fading.kind is FadingKind.AWGN:
        raise ValueError("AWGN has no fading amplitude density")
    h = np.asarray(h, dtype=float)
    s2 = fading.sigma_h ** 2
    hp = np.maximum(h, 0.0)
    if fading.kind is FadingKind.RAYLEIGH:
        val = hp / s2 * np.exp(-hp * hp / (2.0 * s2))
    else:
        mu = fading.mu
        # i0e(x) = exp(-x) I0(x) folds the growth into the Gaussian factor
        val = hp / s2 * np.exp(-(hp - mu) ** 2 / (2.0 * s2)) * special.i0e(hp * mu / s2)
    out = np.where(h >= 0, val, 0.0)
    return out if out.ndim else float(out)


def snr_pdf_truncated(win, c_gamma, a):
    """SNR density ``exp(-a/c) / (alpha c)`` on ``[c t1, c t2]`` (no fading)."""
    if not c_gamma > 0:
        raise ValueError("c_gamma must be > 0")
    a = np.asarray(a, dtype=float)
    lo, hi = c_gamma * win.t1, c_gamma * win.t2
    with np.errstate(over="ignore"):
        val = np.exp(win.t1 - a / c_gamma) / (win.alpha * math.exp(win.t1) * c_gamma)
    out = np.where((a >= lo) & (a <= hi), val, 0.0)
    return out if out.ndim else float(out)


def dispatch_case(win, fading):
    """Name of the closed form used for ``(win, fading)``, e.g. ``'single/rician'``."""
    if fading.kind is FadingKind.AWGN:
        raise ValueError("product densities need a fading model")
    return f"{win.shape}/{fading.kind.value}"


def _window_integral(i, win, kappa):
    """``kappa**i * [Gamma(-i, t1; kappa) - Gamma(-i, t2; kappa)]``.

    The ``kappa**i`` scaling keeps the zero-lower-limit Bessel form finite
    for large ``i`` at small ``kappa``.
    """
    return gen_incomplete_gamma_window(-i, win.t1, win.t2, kappa,
                                       log_scale=i * math.log(kappa))


def _power_series(win, fading, w):
    """``p_W(w)`` and the number of series terms summed."""
    s2 = fading.sigma_h ** 2
    kappa = w / (2.0 * win.m * s2)
    k = fading.k_factor
    pref = math.exp(-k) / (2.0 * win.alpha * win.m * s2)
    if kappa == 0.0:
        if win.t1 == 0.0:
            return math.inf, 1
        # only i = 0 survives: E1(t1) - E1(t2)
        g0 = special.exp1(win.t1) - (0.0 if math.isinf(win.t2) else special.exp1(win.t2))
        return pref * g0, 1
    if fading.kind is FadingKind.RAYLEIGH or k == 0.0:
        return pref * _window_integral(0, win, kappa), 1

    log_k = math.log(k)
    total = 0.0
    prev = math.inf
    for i in range(SERIES_MAX_TERMS):
        coeff = math.exp(i * log_k - 2.0 * special.gammaln(i + 1))
        term = coeff * _window_integral(i, win, kappa)
        total += term
        if i > 0 and term <= prev and abs(term) <= SERIES_REL_STOP * abs(total):
            return pref * total, i + 1
        prev = term
    raise ConvergenceError(
        f"Rician product series did not converge in {SERIES_MAX_TERMS} terms "
        f"(kappa={kappa:.4g}, K={k})"
    )


def power_gain_pdf(win, fading, w):
    """Density of the power gain ``W = (A H)**2`` at ``w >= 0``."""
    dispatch_case(win, fading)
    w = float(w)
    if w < 0:
        return 0.0
    return _guard(_power_series(win, fading, w)[0])


def series_terms_used(win, fading, w):
    """Number of series terms :func:`power_gain_pdf` sums at ``w``."""
    dispatch_case(win, fading)
    return _power_series(win, fading, float(w))[1] if w > 0 else 1


def product_pdf(win, fading, x):
    """Density of ``Z = A H`` at ``x >= 0``.

    Dispatches on the window shape (double, single-side, none) and the
    fading kind (Rayleigh, Rician); see :func:`dispatch_case`.
    """
    x = float(x)
    if x <= 0:
        return 0.0
    return 2.0 * x * power_gain_pdf(win, fading, x * x)


def product_snr_pdf(win, fading, c_gamma, a):
    """Density of ``gamma = c_gamma Z**2 / M`` at ``a >= 0``."""
    if not c_gamma > 0:
        raise ValueError("c_gamma must be > 0")
    a = float(a)
    if a < 0:
        return 0.0
    scale = win.m / c_gamma
    return scale * power_gain_pdf(win, fading, scale * a)


def support_upper(win, fading, tail=TAIL_MASS):
    """Amplitude beyond which ``Z = A H`` carries less than ``tail`` mass.

    Uses the product of per-factor quantiles at ``tail/2`` each, which
    bounds the product quantile from above.
    """
    log_inv = math.log(2.0 / tail)
    if math.isinf(win.a2):
        a_max = math.sqrt(win.m * (win.t1 + log_inv))
    else:
        a_max = win.a2
    h_max = fading.sigma_h * math.sqrt(2.0 * log_inv)
    if fading.kind is FadingKind.RICIAN:
        h_max += fading.mu
    return a_max * h_max


def product_pdf_curve(win, fading, points=2001):
    """:class:`PdfCurve` of :func:`product_pdf` on ``[0, support_upper]``.

    The grid is quadratic in the index, denser near the origin where the
    mass sits.
    """
    z_max = support_upper(win, fading)
    grid = z_max * np.linspace(0.0, 1.0, points) ** 2
    terms = [1]

    def pdf(z):
        if z <= 0:
            return 0.0
        val, n = _power_series(win, fading, z * z)
        terms.append(n)
        return 2.0 * z * _guard(val)

    meta = {"case": dispatch_case(win, fading), "window": win.to_dict(),
            "fading": fading.to_dict()}
    curve = make_pdf_curve(pdf, grid, meta)
    curve.metadata["series_terms_max"] = max(terms)
    return curve


def amplitude_pdf_curve(win, points=8001):
    """:class:`PdfCurve` of the (truncated) Rayleigh amplitude on its support.

    An infinite upper limit is cut where the remaining mass drops below
    ``1e-10``.  The grid is uniform and dense because the density jumps
    at ``a1``, so the trapezoid mass converges only as ``1/points**2``.
    """
    hi = win.a2 if math.isfinite(win.a2) else math.sqrt(
        win.m * (win.t1 + math.log(1.0 / TAIL_MASS)))
    grid = np.linspace(win.a1, hi, points)
    dens = truncated_rayleigh_pdf(win, grid)
    mass = float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)))
    return PdfCurve(grid, dens, mass, {"case": "amplitude", "window": win.to_dict()})


def fading_pdf_curve(fading, points=2001):
    """:class:`PdfCurve` of the fading amplitude up to its ``1e-10`` tail point."""
    hi = fading.sigma_h * math.sqrt(2.0 * math.log(1.0 / TAIL_MASS))
    if fading.kind is FadingKind.RICIAN:
        hi += fading.mu
    grid = np.linspace(0.0, hi, points)
    dens = fading_amplitude_pdf(fading, grid)
    mass = float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)))
    return PdfCurve(grid, dens, mass, {"case": "fading", "fading": fading.to_dict()})


def phase_pdf(phases, phi, n_max=10):
    """Truncated Fourier-series density of a set of phase samples.

    ``f(phi) = 1/(2 pi) + 1/(pi N) sum_{n<=n_max} sum_k cos(n (phi - psi_k))``
    where ``psi_k`` are the ``N`` phase samples (a
    :class:`~jrcmimo.waveform.PhaseCodingMatrix` contributes its summand
    phases toward the communication direction).
    """
    if hasattr(phases, "summand_phases"):
        phases = phases.summand_phases()
    psi = np.asarray(phases, dtype=float).ravel()
    if psi.size == 0:
        raise ValueError("no phase samples")
    phi = np.asarray(phi, dtype=float)
    out = np.full(phi.shape, 1.0 / (2.0 * np.pi))
    for n in range(1, int(n_max) + 1):
        coef = np.exp(1j * n * psi).sum()
        out = out + (np.exp(1j * n * phi) * coef.conjugate()).real / (np.pi * psi.size)
    return out if out.ndim else float(out)
