"""Coherent MIMO array model and phase-coded waveform generation.

Two generators are provided:

* :func:`generate_null_fixed` keeps the radiated signal toward the null
  direction identical on every sub-pulse by permuting a fixed set of base
  phases with null-preserving offsets.  The amplitude toward the
  communication receiver then fluctuates from sub-pulse to sub-pulse,
  optionally restricted to a window by rejection sampling.
* :func:`generate_comm_fixed` holds the radiated signal toward the
  communication receiver constant.

Random numbers come from numpy's PCG64 generator.  A seed is expanded with
:class:`numpy.random.SeedSequence` into ``L + 1`` child streams: child 0
draws the base phases, child ``l`` (1-based) draws the permutations of
sub-pulse ``l``.  Permutations are the ``argsort`` of a row of uniforms, so
the sequence of candidate draws for a sub-pulse does not depend on how
many rows are requested at a time.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import IterationBudgetExceeded

__all__ = [
    "ArrayConfig", "ConstraintMode", "ConstraintSpec", "PhaseCodingMatrix",
    "steering_vector", "radiated_signal", "generate_null_fixed",
    "generate_comm_fixed", "phase_histogram", "db_to_amplitude_ratio",
    "reference_amplitude",
]

TWO_PI = 2.0 * np.pi


def reference_amplitude(m, p0):
    """Amplitude exceeded with probability ``p0``: ``sqrt(-M ln p0)``."""
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    return math.sqrt(-m * math.log(p0))


def db_to_amplitude_ratio(delta_db):
    """Amplitude ratio for a window half-width given in dB (20 log10)."""
    return 10.0 ** (delta_db / 20.0)


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear transmit array.

    Angles are in radians; ``d`` is the element spacing in wavelengths.
    ``f_c`` is carried as metadata only.
    """

    M: int
    L: int
    theta_c: float
    theta_n: float
    d: float = 0.5
    f_c: float = 0.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M}")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be an integer >= 1, got {self.L}")
        if not self.d > 0:
            raise ValueError(f"d must be > 0, got {self.d}")
        for name in ("theta_c", "theta_n"):
            if not abs(getattr(self, name)) < np.pi / 2:
                raise ValueError(f"|{name}| must be < pi/2")
        if self.theta_c == self.theta_n:
            raise ValueError("theta_c and theta_n must differ")

    def to_dict(self):
        return {"M": self.M, "L": self.L, "theta_c": self.theta_c,
                "theta_n": self.theta_n, "d": self.d, "f_c": self.f_c}


class ConstraintMode(str, Enum):
    NONE = "none"
    SINGLE_SIDE = "single"
    DOUBLE_SIDE = "double"


@dataclass(frozen=True)
class ConstraintSpec:
    """Amplitude window imposed on ``|G_l(theta_c)|`` during generation.

    ``SINGLE_SIDE`` accepts ``A_l >= A0`` and ``DOUBLE_SIDE`` accepts
    ``A0/Delta <= A_l <= A0*Delta`` where ``A0 = sqrt(-M ln p0)`` and
    ``Delta = 10**(delta_db/20)``.
    """

    mode: ConstraintMode = ConstraintMode.NONE
    p0: float = 0.1
    delta_db: float = 0.0
    max_iterations: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "mode", ConstraintMode(self.mode))
        if not 0.0 < self.p0 < 1.0:
            raise ValueError(f"p0 must lie in (0, 1), got {self.p0}")
        if not self.delta_db >= 0:
            raise ValueError(f"delta_db must be >= 0, got {self.delta_db}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")

    def window(self, m):
        """Accepted amplitude interval ``(low, high)`` for an ``m``-element array."""
        if self.mode is ConstraintMode.NONE:
            return 0.0, math.inf
        a0 = reference_amplitude(m, self.p0)
        if self.mode is ConstraintMode.SINGLE_SIDE:
            return a0, math.inf
        delta = db_to_amplitude_ratio(self.delta_db)
        return a0 / delta, a0 * delta


@dataclass(frozen=True, eq=False)
class PhaseCodingMatrix:
    """Space-time phase coding matrix of one radar pulse.

    ``phases[l, m]`` is the phase of element ``m`` on sub-pulse ``l`` (the
    weight is ``exp(1j * phase)``), wrapped to ``(-pi, pi]``.
    ``amplitudes[l]`` is ``|G_l(theta_c)|``, ``corrections[l]`` the phase
    that aligns sub-pulse ``l`` with sub-pulse 1 toward ``theta_c``, and
    ``iterations[l]`` the number of candidate draws spent on sub-pulse ``l``.
    """

    config: ArrayConfig
    phases: np.ndarray
    amplitudes: np.ndarray
    corrections: np.ndarray
    iterations: np.ndarray
    seed: object = None
    method: str = "null_fixed"
    _radiated: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("phases", "amplitudes", "corrections", "iterations"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def M(self):
        return self.config.M

    @property
    def L(self):
        return self.config.L

    @property
    def iterations_used(self):
        return int(self.iterations.sum())

    @property
    def weights(self):
        """Complex beamforming weights, shape ``(L, M)``."""
        return np.exp(1j * self.phases)

    def radiated(self, theta):
        """``G_l(theta)`` for every sub-pulse."""
        return self.weights.conj() @ steering_vector(theta, self.config)

    def corrected_radiated(self, theta=None):
        """``exp(j*corr_l) * G_l(theta)``; defaults to the communication angle."""
        theta = self.config.theta_c if theta is None else theta
        return np.exp(1j * self.corrections) * self.radiated(theta)

    def summand_phases(self):
        """Phases of the individual terms of ``G_l(theta_c)``, wrapped.

        ``G_l(theta_c) = sum_m exp(-1j * psi[l, m])``; these ``psi`` are the
        per-antenna phase samples whose spread governs the amplitude law.
        """
        m = np.arange(self.M)
        steer = TWO_PI * self.config.d * m * np.sin(self.config.theta_c)
        return _wrap(self.phases + steer[None, :])

    def to_json_dict(self):
        seed = self.seed
        if isinstance(seed, (np.integer,)):
            seed = int(seed)
        elif isinstance(seed, (tuple, list)):
            seed = [int(s) for s in seed]
        return {
            "M": self.M,
            "L": self.L,
            "phases": self.phases.ravel().tolist(),
            "amplitudes": self.amplitudes.tolist(),
            "corrections": self.corrections.tolist(),
            "iterations_used": self.iterations_used,
            "seed": seed,
            "iterations": self.iterations.tolist(),
            "method": self.method,
            "config": self.config.to_dict(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_json_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        cfg = ArrayConfig(**data["config"])
        phases = np.asarray(data["phases"], dtype=float).reshape(data["L"], data["M"])
        iterations = data.get("iterations")
        if iterations is None:
            iterations = np.zeros(data["L"], dtype=np.int64)
            iterations[0] = data["iterations_used"]
        return cls(cfg, phases, np.asarray(data["amplitudes"]),
                   np.asarray(data["corrections"]),
                   np.asarray(iterations, dtype=np.int64),
                   seed=data.get("seed"), method=data.get("method", "null_fixed"))

    def amplitude_rows(self):
        """``(l, A_l)`` pairs with 1-based sub-pulse index, for CSV export."""
        return [(i + 1, float(a)) for i, a in enumerate(self.amplitudes)]


def _wrap(phase):
    """Wrap to ``(-pi, pi]``."""
    out = np.mod(phase + np.pi, TWO_PI) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def steering_vector(theta, cfg):
    """Transmit steering vector ``exp(-j 2 pi d (m-1) sin theta)``, ``m = 1..M``."""
    m = np.arange(cfg.M)
    return np.exp(-1j * TWO_PI * cfg.d * m * np.sin(theta))


def radiated_signal(weights, theta, cfg):
    """Radiated signal ``a(theta)^T conj(w)`` for one sub-pulse weight vector."""
    w = np.asarray(weights, dtype=complex)
    if w.shape != (cfg.M,):
        raise ValueError(f"weights must have shape ({cfg.M},), got {w.shape}")
    return complex(steering_vector(theta, cfg) @ w.conj())


def _streams(seed, n):
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(n)]


class _PermutationSearch:
    """Candidate phase rows following the null-preserving permutation rule.

    For permutation ``I`` of ``1..M`` the element ``m`` phase is
    ``phi[I_m] + 2 pi d (I_m - m) sin(theta_n)``.  The null-direction
    response is then a permutation-invariant sum.
    """

    def __init__(self, cfg, base_phases):
        self.cfg = cfg
        self.base = base_phases
        idx = np.arange(1, cfg.M + 1)
        self.idx = idx
        sin_n = np.sin(cfg.theta_n)
        self.offset_src = TWO_PI * cfg.d * idx * sin_n      # indexed by I_m
        self.offset_dst = TWO_PI * cfg.d * idx * sin_n      # indexed by m
        self.steer_c = steering_vector(cfg.theta_c, cfg)

    def candidates(self, rng, count):
        perm = np.argsort(rng.random((count, self.cfg.M)), axis=1)
        phases = self.base[perm] + self.offset_src[perm] - self.offset_dst[None, :]
        g = np.exp(-1j * phases) @ self.steer_c
        return phases, g


def _search(search, rng, accept, max_iterations, subpulse):
    """Draw candidates until ``accept(|G|)``; return (phases, G, draws)."""
    used = 0
    batch = 16
    while used < max_iterations:
        count = min(batch, max_iterations - used)
        phases, g = search.candidates(rng, count)
        ok = np.flatnonzero(accept(np.abs(g)))
        if ok.size:
            k = ok[0]
            return phases[k], g[k], used + k + 1
        used += count
        batch = min(batch * 2, 8192)
    raise IterationBudgetExceeded(subpulse, max_iterations)


def generate_null_fixed(cfg, constraint=None, seed=0):
    """Null-direction-fixed waveform for one pulse.

    Base phases are drawn once, uniformly on ``(-pi, pi]``.  For every
    sub-pulse a fresh uniformly random permutation is drawn until the
    amplitude toward ``theta_c`` falls inside ``constraint.window(M)``.

    Returns
    -------
    PhaseCodingMatrix
        ``iterations_used`` is the total number of permutation draws.

    Raises
    ------
    IterationBudgetExceeded
        If a sub-pulse needs more than ``constraint.max_iterations`` draws.
    """
    constraint = ConstraintSpec() if constraint is None else constraint
    rngs = _streams(seed, cfg.L + 1)
    # uniform draws land in [-pi, pi); negating maps them onto (-pi, pi]
    base = _wrap(-rngs[0].uniform(-np.pi, np.pi, cfg.M))
    search = _PermutationSearch(cfg, base)
    low, high = constraint.window(cfg.M)

    def accept(amp):
        return (amp >= low) & (amp <= high)

    phases = np.empty((cfg.L, cfg.M))
    g = np.empty(cfg.L, dtype=complex)
    iters = np.empty(cfg.L, dtype=np.int64)
    for l in range(cfg.L):
        phases[l], g[l], iters[l] = _search(
            search, rngs[l + 1], accept, constraint.max_iterations, l + 1)
    corrections = _wrap(np.angle(g[0]) - np.angle(g))
    return PhaseCodingMatrix(cfg, _wrap(phases), np.abs(g), corrections, iters,
                             seed=seed, method="null_fixed")


def generate_comm_fixed(cfg, p0, seed=0, band=0.005, max_iterations=1_000_000):
    """Communication-direction-fixed waveform for one pulse.

    Each sub-pulse draws null-preserving permutations until
    ``| |G_l(theta_c)| - A0 | <= band * A0`` with ``A0 = sqrt(-M ln p0)``.
    The phase of one element is then re-solved so that the amplitude equals
    ``A0`` exactly, and all phases of the sub-pulse are rotated by a common
    angle so that ``G_l(theta_c) = G_1(theta_c)``.  A common rotation does
    not change any amplitude, so the whole pulse radiates a constant
    complex signal toward the receiver.  The single-element adjustment
    gives up the null-direction invariance of :func:`generate_null_fixed`.
    """
    a0 = reference_amplitude(cfg.M, p0)
    rngs = _streams(seed, cfg.L + 1)
    base = _wrap(-rngs[0].uniform(-np.pi, np.pi, cfg.M))
    search = _PermutationSearch(cfg, base)

    def accept(amp):
        return np.abs(amp - a0) <= band * a0

    phases = np.empty((cfg.L, cfg.M))
    iters = np.empty(cfg.L, dtype=np.int64)
    steer = search.steer_c
    g_ref = None
    for l in range(cfg.L):
        row, g, iters[l] = _search(search, rngs[l + 1], accept, max_iterations, l + 1)
        row = _match_amplitude(row, g, steer, a0)
        g = np.exp(-1j * row) @ steer
        if g_ref is None:
            g_ref = g
        # phi -> phi + delta multiplies G by exp(-j delta)
        row = row + (np.angle(g) - np.angle(g_ref))
        phases[l] = row
    phases = _wrap(phases)
    g_all = np.exp(-1j * phases) @ steer
    return PhaseCodingMatrix(cfg, phases, np.abs(g_all), np.zeros(cfg.L), iters,
                             seed=seed, method="comm_fixed")


def _match_amplitude(row, g, steer, target):
    """Re-solve one element phase so that ``|G|`` equals ``target``.

    Picks the element needing the smallest phase change among those for
    which the target is reachable.
    """
    terms = np.exp(-1j * row) * steer
    best = None
    for k in range(row.size):
        rest = g - terms[k]
        r = abs(rest)
        if r == 0:
            continue
        cos_arg = (target * target - r * r - 1.0) / (2.0 * r)
        if abs(cos_arg) > 1.0:
            continue
        # new term angle must be arg(rest) +/- arccos(cos_arg)
        spread = math.acos(cos_arg)
        current = np.angle(terms[k])
        for sgn in (1.0, -1.0):
            new_angle = np.angle(rest) + sgn * spread
            change = abs(_wrap(new_angle - current))
            if best is None or change < best[0]:
                best = (change, k, new_angle)
    if best is None:
        raise ArithmeticError("target amplitude unreachable by a single element")
    _, k, new_angle = best
    out = row.copy()
    # term = exp(-j phi_k) * steer_k  =>  phi_k = arg(steer_k) - term angle
    out[k] = np.angle(steer[k]) - new_angle
    return out


def phase_histogram(matrix, bins=32):
    """Normalized histogram of the per-antenna summand phases on ``(-pi, pi]``.

    Returns ``(edges, density)``; ``density`` integrates to one.
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    psi = matrix.summand_phases().ravel()
    density, edges = np.histogram(psi, bins=bins, range=(-np.pi, np.pi), density=True)
    return edges, density
