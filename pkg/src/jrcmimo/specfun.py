r"""Special functions used by the channel densities and capacities.

Standard kernels (:math:`E_1`, :math:`E_n`, :math:`Ei`, :math:`K_n`,
:math:`I_0`, :math:`\Gamma(a, x)`) wrap ``scipy.special`` behind
domain-checked entry points.  The generalized incomplete gamma function

.. math::

    \Gamma(q, x; b) = \int_x^\infty t^{q-1} e^{-t - b/t}\,dt

is evaluated for integer ``q <= 0`` with the exponential-integral series
method (two branches split at ``x = sqrt(b)``), and the single Meijer-G
instance that expresses the double-Rayleigh ergodic capacity is computed
from its equivalent real integral.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._quad import integrate_1d
from .errors import ConvergenceError, DomainError

__all__ = [
    "AccuracySpec", "DEFAULT_ACCURACY", "exp_integral_e1", "exp_integral_ei",
    "exp_integral_en", "scaled_e1", "bessel_k", "log_bessel_k", "bessel_i0",
    "upper_incomplete_gamma", "gen_incomplete_gamma",
    "gen_incomplete_gamma_window", "gen_incomplete_gamma_quad",
    "meijer_g_capacity_kernel",
]

# relative stop once a term no longer moves the partial sum in double precision
_EPS_STOP = 2.0 ** -56
_EPS = 2.0 ** -52
# sum of |terms| over result beyond which the series is replaced by quadrature
_CANCEL_LIMIT = 1e6
# estimated relative rounding error tolerated in a window difference
_WINDOW_REL = 1e-10


@dataclass(frozen=True)
class AccuracySpec:
    """Precision targets for the series evaluations.

    ``abs_tol`` is measured against the largest term of the series.
    ``max_terms`` is a hard cap: a series that has not met ``abs_tol``
    (or stopped changing the partial sum) by then raises
    :class:`~jrcmimo.errors.ConvergenceError`.
    """

    rel_tol: float = 1e-6
    abs_tol: float = 1e-25
    max_terms: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")


DEFAULT_ACCURACY = AccuracySpec()


def _positive(x, name="x"):
    x = float(x)
    if not (x > 0) or math.isinf(x):
        raise DomainError(f"{name} must be finite and > 0, got {x}")
    return x


def exp_integral_e1(x):
    """Exponential integral :math:`E_1(x)` for ``x > 0``."""
    return float(special.exp1(_positive(x)))


def exp_integral_ei(x):
    """Principal-value exponential integral :math:`Ei(x)` for ``x > 0``.

    For negative arguments use the identity ``Ei(-x) = -E1(x)``.
    """
    return float(special.expi(_positive(x)))


def exp_integral_en(n, x):
    """Generalized exponential integral :math:`E_n(x)`, ``n >= 0`` integer."""
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a nonnegative integer, got {n}")
    return float(special.expn(int(n), _positive(x)))


def scaled_e1(y):
    """Return ``exp(y) * E1(y)`` without overflow for large ``y``."""
    y = _positive(y, "y")
    if y < 700.0:
        return math.exp(y) * float(special.exp1(y))
    # asymptotic series; terms shrink while k < y, so a few suffice here
    total, term, k = 0.0, 1.0 / y, 0
    while abs(term) > 1e-18 * abs(total) or k == 0:
        total += term
        k += 1
        term *= -k / y
    return total


def bessel_k(order, x):
    """Modified Bessel function of the second kind :math:`K_n(x)`.

    Raises :class:`DomainError` for ``x <= 0`` and :class:`OverflowError`
    when the value exceeds the double range (small ``x`` with large order).
    """
    if int(order) != order or order < 0:
        raise DomainError(f"order must be a nonnegative integer, got {order}")
    x = _positive(x)
    val = float(special.kv(int(order), x))
    if math.isinf(val):
        raise OverflowError(f"K_{order}({x}) overflows")
    return val


def log_bessel_k(order, y):
    """Natural log of :math:`K_\\nu(y)`, valid where ``K`` itself overflows."""
    y = _positive(y, "y")
    nu = abs(float(order))
    scaled = float(special.kve(nu, y))
    if math.isfinite(scaled) and scaled > 0:
        return math.log(scaled) - y
    # small-argument limit K_nu(y) ~ Gamma(nu)/2 * (2/y)**nu
    return special.gammaln(nu) - math.log(2.0) + nu * math.log(2.0 / y)


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero."""
    x = float(x)
    if not (x >= 0) or math.isinf(x):
        raise DomainError(f"x must be finite and >= 0, got {x}")
    return float(special.i0(x))


def upper_incomplete_gamma(a, x):
    """Upper incomplete gamma :math:`\\Gamma(a, x)` for real ``a``, ``x > 0``.

    ``a`` may be zero or negative.
    """
    x = _positive(x)
    a = float(a)
    if a > 0:
        return float(np.exp(np.log(special.gammaincc(a, x)) + special.gammaln(a)))
    if a == int(a):
        return x ** a * float(special.expn(int(1 - a), x))
    # step up to a positive order, then recur down:
    # Gamma(s - 1, x) = (Gamma(s, x) - x**(s-1) e^-x) / (s - 1)
    steps = int(math.ceil(-a)) + 1
    s = a + steps
    val = float(special.gammaincc(s, x) * special.gamma(s))
    for _ in range(steps):
        s -= 1.0
        val = (val - x ** s * math.exp(-x)) / s
    return val


def _log_expn(orders, z):
    """``log E_p(z)`` for an integer array of orders ``p`` (any sign)."""
    p = np.asarray(orders, dtype=np.int64)
    out = np.empty(p.shape, dtype=float)
    pos = p >= 0
    with np.errstate(divide="ignore"):
        if pos.any():
            out[pos] = np.log(special.expn(p[pos], z))
        neg = ~pos
        if neg.any():
            # E_p(z) = z**(p-1) Gamma(1-p, z) for p <= 0
            k = 1 - p[neg]
            out[neg] = ((p[neg] - 1) * math.log(z)
                        + np.log(special.gammaincc(k, z)) + special.gammaln(k))
    return out


def _sum_series(term_fn, accuracy, monotone_from):
    """Sum ``term_fn`` chunk by chunk; returns ``(sum, sum of |terms|)``.

    Past index ``monotone_from`` (where term magnitudes start to fall) the
    sum stops once a term drops below ``abs_tol`` times the largest term
    seen, or no longer moves the partial sum.  Measuring ``abs_tol``
    against the largest term keeps the stop meaningful for series whose
    values are themselves far below ``abs_tol``.
    """
    terms = []
    partial = 0.0
    biggest = 0.0
    start = 0
    chunk = 32
    while start < accuracy.max_terms:
        n = np.arange(start, min(start + chunk, accuracy.max_terms))
        for k, t in zip(n, term_fn(n)):
            t = float(t)
            terms.append(t)
            partial += t
            biggest = max(biggest, abs(t))
            if k + 1 > monotone_from and (
                abs(t) <= accuracy.abs_tol * biggest
                or abs(t) <= _EPS_STOP * abs(partial)
            ):
                return math.fsum(terms), math.fsum(abs(v) for v in terms)
        start += chunk
    raise ConvergenceError(
        f"series did not converge within {accuracy.max_terms} terms"
    )


def gen_incomplete_gamma(q, x, b, accuracy=DEFAULT_ACCURACY):
    r"""Generalized incomplete gamma :math:`\Gamma(q, x; b)` for integer ``q <= 0``.

    For ``x >= sqrt(b)``::

        Gamma(q, x; b) = sum_n (-b/x)**n / n! * x**q * E_{n-q+1}(x)

    and for ``0 <= x < sqrt(b)`` the complement of the full-range integral::

        Gamma(q, x; b) = 2 b**(q/2) K_q(2 sqrt(b))
                         - sum_n (-1)**n x**(q+n) / n! * E_{q+n+1}(b/x)

    Orders of :math:`E` that fall below zero are evaluated through
    ``E_p(z) = z**(p-1) Gamma(1-p, z)``.

    Parameters
    ----------
    q : int
        Nonpositive integer order.
    x : float
        Lower limit, ``x >= 0``.
    b : float
        Coupling parameter, ``b >= 0``; ``x`` and ``b`` may not both be 0.
    accuracy : AccuracySpec, optional
        Series cap and absolute stop.

    Returns
    -------
    float
    """
    if int(q) != q or q > 0:
        raise DomainError(f"q must be an integer <= 0, got {q}")
    q = int(q)
    x = float(x)
    b = float(b)
    if not (x >= 0 and b >= 0) or math.isinf(x) or math.isinf(b):
        raise DomainError(f"need finite x >= 0 and b >= 0, got x={x}, b={b}")
    if x == 0 and b == 0:
        raise DomainError("Gamma(q, 0; 0) diverges for q <= 0")
    if b == 0:
        return upper_incomplete_gamma(q, x)
    if x == 0:
        return math.exp(_log_full_range(q, b))
    val, mag = _gig_series(q, x, b, accuracy)
    if not val > 0 or mag > _CANCEL_LIMIT * val:
        # alternating-series cancellation ate the requested digits
        return gen_incomplete_gamma_quad(q, x, math.inf, b)
    return val


def _gig_series(q, x, b, accuracy):
    """Two-branch series for ``x, b > 0``; returns ``(value, magnitude)``.

    ``magnitude`` bounds the size of the cancelling parts, so
    ``eps * magnitude`` estimates the rounding error of ``value``.
    """
    if x >= math.sqrt(b):
        log_ratio = math.log(b / x)
        log_xq = q * math.log(x)

        def terms(n):
            sign = np.where(n % 2 == 0, 1.0, -1.0)
            return sign * np.exp(n * log_ratio - special.gammaln(n + 1) + log_xq
                                 + _log_expn(n - q + 1, x))

        return _sum_series(terms, accuracy, monotone_from=b / x)

    z = b / x
    log_x = math.log(x)

    def terms(n):
        sign = np.where(n % 2 == 0, 1.0, -1.0)
        return sign * np.exp((q + n) * log_x - special.gammaln(n + 1)
                             + _log_expn(q + n + 1, z))

    part, mag = _sum_series(terms, accuracy, monotone_from=x)
    full = math.exp(_log_full_range(q, b))
    return full - part, mag + full


def gen_incomplete_gamma_window(q, x1, x2, b, log_scale=0.0,
                                accuracy=DEFAULT_ACCURACY):
    """``exp(log_scale) * [Gamma(q, x1; b) - Gamma(q, x2; b)]``.

    This is the integral of ``t**(q-1) exp(-t - b/t)`` over ``[x1, x2]``;
    ``x1 = 0`` and ``x2 = inf`` are allowed when ``b > 0``.  The difference
    of series values is used when its estimated rounding error stays below
    ``1e-10`` relative; otherwise the window is integrated directly.
    ``log_scale`` folds in a prefactor before anything is exponentiated,
    so large orders at small ``b`` do not overflow.
    """
    q = int(q)
    if not 0 <= x1 < x2:
        raise DomainError(f"need 0 <= x1 < x2, got ({x1}, {x2})")
    if b == 0:
        upper = gen_incomplete_gamma(q, x1, b, accuracy)
        lower = 0.0 if math.isinf(x2) else gen_incomplete_gamma(q, x2, b, accuracy)
        return math.exp(log_scale) * (upper - lower)
    scale = math.exp(log_scale)
    if x1 == 0:
        upper = (math.exp(_log_full_range(q, b) + log_scale), 0.0)
    else:
        val, mag = _gig_series(q, x1, b, accuracy)
        upper = (scale * val, scale * mag)
    if math.isinf(x2):
        lower = (0.0, 0.0)
    else:
        val, mag = _gig_series(q, x2, b, accuracy)
        lower = (scale * val, scale * mag)
    diff = upper[0] - lower[0]
    err = _EPS * (max(upper[1], abs(upper[0])) + max(lower[1], abs(lower[0])))
    if diff > 0 and err <= _WINDOW_REL * diff:
        return diff
    return gen_incomplete_gamma_quad(q, x1, x2, b, log_scale)


def gen_incomplete_gamma_quad(q, x1, x2, b, log_scale=0.0):
    """``exp(log_scale)`` times the quadrature of ``t**(q-1) exp(-t - b/t)`` on ``[x1, x2]``.

    The integrand is scaled by its value at the (clipped) mode so that
    deep tails neither underflow nor lose relative accuracy.
    """
    q = float(q)
    b = float(b)
    mode = 0.5 * ((q - 1.0) + math.sqrt((q - 1.0) ** 2 + 4.0 * b))
    peak = min(max(mode, x1), x2)
    if peak <= 0.0:
        raise DomainError("integrand diverges at t = 0")

    def log_f(t):
        return (q - 1.0) * math.log(t) - t - b / t

    ref = log_f(peak)

    def integrand(t):
        if t <= 0.0:
            return 0.0
        return math.exp(log_f(t) - ref)

    width = max(math.sqrt(max(mode, 1e-300)), 1.0)
    breaks = [p for p in (peak, peak + width, peak + 10.0 * width) if x1 < p < x2]
    val = integrate_1d(integrand, x1, x2, rel_tol=1e-11, abs_tol=1e-15,
                       breakpoints=breaks)
    return val * math.exp(ref + log_scale)


def _log_full_range(q, b):
    """``log Gamma(q, 0; b) = log(2 b**(q/2) K_q(2 sqrt b))``."""
    return math.log(2.0) + 0.5 * q * math.log(b) + log_bessel_k(-q, 2.0 * math.sqrt(b))


def meijer_g_capacity_kernel(z):
    r"""Evaluate :math:`G^{3,1}_{1,3}\left(z \,\middle|\, {-1 \atop -1,-1,0}\right)`.

    Only this instance is supported.  It equals

    .. math:: 2\int_0^\infty \ln(1+a)\,K_0\!\left(2\sqrt{z a}\right) da,

    which after ``a = u**2 / (4 z)`` becomes the smooth, exponentially
    decaying integral ``(1/z) * int_0^inf u ln(1 + u**2/(4z)) K_0(u) du``
    evaluated by adaptive quadrature.
    """
    z = _positive(z, "z")

    def integrand(u):
        if u == 0.0:
            return 0.0
        return u * math.log1p(u * u / (4.0 * z)) * float(special.k0(u))

    val = integrate_1d(integrand, 0.0, math.inf, rel_tol=1e-11, abs_tol=1e-14,
                       breakpoints=(1.0, 10.0, 40.0))
    return val / z
