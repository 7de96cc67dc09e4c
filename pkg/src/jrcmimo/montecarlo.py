"""Seeded sampling and goodness-of-fit checks for the analytic densities.

Sampling is chunked: ``SeedSequence(seed).spawn`` gives chunk ``k`` its own
PCG64 stream and every chunk draws exactly ``CHUNK`` values, so a batch of
``n`` is a prefix of any longer batch with the same seed, and chunk results
can be produced in any order.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .distributions import FadingKind, FadingModel, TruncationWindow
from .errors import CoverageError
from .waveform import ConstraintSpec, generate_null_fixed

__all__ = [
    "CHUNK", "RayleighModel", "RicianModel", "TruncatedRayleighModel",
    "ProductChannelModel", "SampleBatch", "GofReport", "EmpiricalCapacity",
    "sample", "goodness_of_fit", "ks_statistic", "empirical_capacity",
    "waveform_amplitude_harvest",
]

CHUNK = 1 << 18


@dataclass(frozen=True)
class RayleighModel:
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def tag(self):
        return f"rayleigh(sigma={self.sigma!r})"

    def draw(self, rng, n):
        return rng.rayleigh(self.sigma, n)


@dataclass(frozen=True)
class RicianModel:
    """``|mu + sigma (N1 + j N2)|`` with ``mu = sigma sqrt(2 K)``."""

    sigma: float = 1.0
    k_factor: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not self.k_factor >= 0:
            raise ValueError(f"k_factor must be >= 0, got {self.k_factor}")

    @property
    def tag(self):
        return f"rician(sigma={self.sigma!r}, K={self.k_factor!r})"

    def draw(self, rng, n):
        mu = self.sigma * math.sqrt(2.0 * self.k_factor)
        z = rng.standard_normal((2, n)) * self.sigma
        return np.hypot(mu + z[0], z[1])


@dataclass(frozen=True)
class TruncatedRayleighModel:
    """Rayleigh amplitude (per-component variance ``M/2``) on ``[a1, a2]``."""

    window: TruncationWindow

    @property
    def tag(self):
        w = self.window
        return f"truncated_rayleigh(a1={w.a1!r}, a2={w.a2!r}, m={w.m})"

    def draw(self, rng, n):
        # exact inverse CDF: t = t1 - log(1 - u (1 - exp(-(t2 - t1))))
        w = self.window
        u = rng.random(n)
        span = -1.0 if math.isinf(w.t2) else math.expm1(-(w.t2 - w.t1))
        t = w.t1 - np.log1p(u * span)
        rho = np.sqrt(w.m * t)
        return np.clip(rho, w.a1, w.a2)


@dataclass(frozen=True)
class ProductChannelModel:
    """``A H``: truncated-Rayleigh amplitude times an independent fading amplitude."""

    window: TruncationWindow
    fading: FadingModel

    def __post_init__(self):
        if self.fading.kind is FadingKind.AWGN:
            raise ValueError("product channel needs Rayleigh or Rician fading")

    @property
    def tag(self):
        f = self.fading
        return (f"product({TruncatedRayleighModel(self.window).tag}, "
                f"{f.kind.value}(sigma={f.sigma_h!r}, K={f.k_factor!r}))")

    def _fading_model(self):
        if self.fading.kind is FadingKind.RAYLEIGH:
            return RayleighModel(self.fading.sigma_h)
        return RicianModel(self.fading.sigma_h, self.fading.k_factor)

    def draw(self, rng, n):
        a = TruncatedRayleighModel(self.window).draw(rng, n)
        return a * self._fading_model().draw(rng, n)


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seed: object
    tag: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("sample values must be finite and >= 0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# " + json.dumps({"tag": self.tag, "seed": _jsonable(self.seed),
                                     "count": len(self)}) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value"])
        writer.writerows([repr(float(v))] for v in self.values)
        return buf.getvalue()


@dataclass(frozen=True)
class GofReport:
    ks_statistic: float
    sample_count: int
    mean_abs_density_error: float

    def to_json(self, **kwargs):
        return json.dumps({"ks_statistic": self.ks_statistic,
                           "sample_count": self.sample_count,
                           "mean_abs_density_error": self.mean_abs_density_error},
                          **kwargs)


@dataclass(frozen=True)
class EmpiricalCapacity:
    nats: float
    standard_error: float
    n: int


def _jsonable(seed):
    if isinstance(seed, (list, tuple)):
        return [int(s) for s in seed]
    return None if seed is None else int(seed)


def _chunks(seed, n):
    """``(rng, size)`` per chunk; all but the last are full ``CHUNK`` draws."""
    count = -(-n // CHUNK)
    children = np.random.SeedSequence(seed).spawn(count)
    for k, child in enumerate(children):
        yield np.random.Generator(np.random.PCG64(child)), min(CHUNK, n - k * CHUNK)


def sample(model, n, seed=0):
    """Draw ``n`` values from ``model``; deterministic in ``(model, n, seed)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    parts = [model.draw(rng, CHUNK)[:size] for rng, size in _chunks(seed, n)]
    return SampleBatch(np.concatenate(parts), seed, model.tag)


def ks_statistic(values, cdf):
    """Two-sided KS distance between the empirical CDF and ``cdf`` (vectorized)."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))


def goodness_of_fit(batch, pdf, bins=100, coverage=1e-6):
    """Compare a sample batch with a :class:`~jrcmimo.distributions.PdfCurve`.

    The reference CDF is the cumulative trapezoid integral of the curve,
    normalized by its total mass and interpolated linearly.

    Raises
    ------
    CoverageError
        If more than ``coverage`` of the samples fall outside the grid
        (at least one sample is always tolerated).
    """
    vals = batch.values
    lo, hi = pdf.grid[0], pdf.grid[-1]
    outside = int(np.count_nonzero((vals < lo) | (vals > hi)))
    if outside > max(1, coverage * vals.size):
        raise CoverageError(
            f"{outside} of {vals.size} samples lie outside [{lo:.6g}, {hi:.6g}]")
    cdf_grid = pdf.cdf() / pdf.total_mass
    ks = ks_statistic(vals, lambda x: np.interp(x, pdf.grid, cdf_grid))

    top = min(hi, float(vals.max())) if vals.size else hi
    edges = np.linspace(lo, max(top, lo + 1e-12), bins + 1)
    hist, _ = np.histogram(vals, bins=edges)
    dens = hist / (vals.size * np.diff(edges))
    centers = 0.5 * (edges[1:] + edges[:-1])
    err = float(np.mean(np.abs(dens - np.interp(centers, pdf.grid, pdf.density))))
    return GofReport(min(ks, 1.0), int(vals.size), err)


def empirical_capacity(model, c_gamma, n, seed=0, bandwidth=1.0):
    """Mean of ``B ln(1 + gamma)`` with ``gamma = c_gamma X**2 / M``.

    ``X`` is drawn from ``model`` (a :class:`TruncatedRayleighModel` or a
    :class:`ProductChannelModel`).  Chunk sums are combined with
    ``math.fsum`` so the result does not depend on chunk order.
    """
    if n < 1000:
        raise ValueError(f"n must be >= 1000, got {n}")
    if c_gamma == 0:
        return EmpiricalCapacity(0.0, 0.0, int(n))
    if not c_gamma > 0:
        raise ValueError(f"c_gamma must be >= 0, got {c_gamma}")
    m = model.window.m
    sums, sq = [], []
    for rng, size in _chunks(seed, int(n)):
        x = model.draw(rng, CHUNK)[:size]
        y = np.log1p(c_gamma * x * x / m)
        sums.append(float(y.sum()))
        sq.append(float((y * y).sum()))
    mean = math.fsum(sums) / n
    var = max(math.fsum(sq) / n - mean * mean, 0.0) * n / (n - 1)
    return EmpiricalCapacity(bandwidth * mean, bandwidth * math.sqrt(var / n), int(n))


def waveform_amplitude_harvest(cfg, constraint=None, pulses=1, seed=0):
    """Radiated amplitudes ``|G_l(theta_c)|`` pooled over ``pulses`` pulses.

    Pulse ``k`` is generated with seed ``[seed, k]``.
    """
    if int(pulses) != pulses or pulses < 1:
        raise ValueError(f"pulses must be a positive integer, got {pulses}")
    constraint = ConstraintSpec() if constraint is None else constraint
    amps = [generate_null_fixed(cfg, constraint, seed=[int(seed), k]).amplitudes
            for k in range(int(pulses))]
    tag = (f"waveform(M={cfg.M}, L={cfg.L}, pulses={int(pulses)}, "
           f"mode={constraint.mode.value})")
    return SampleBatch(np.concatenate(amps), seed, tag)
