"""Thin wrapper around QUADPACK that raises instead of warning."""

import math

import numpy as np
from scipy import integrate

from .errors import QuadratureError

REL_TOL = 1e-8
ABS_TOL = 1e-12


def integrate_1d(func, a, b=math.inf, *, rel_tol=REL_TOL, abs_tol=ABS_TOL,
                 breakpoints=(), limit=400):
    """Adaptive Gauss-Kronrod integral of ``func`` over ``[a, b]``.

    Semi-infinite ranges go through QUADPACK's ``t = a + (1 - u) / u`` map.
    ``breakpoints`` split the range into pieces that are integrated
    separately, which is how interior kinks or a finite support edge of
    an otherwise infinite range are handled.
    """
    edges = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    total = 0.0
    err_total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(func, lo, hi, epsrel=rel_tol, epsabs=abs_tol,
                                  limit=limit)
        total += val
        err_total += err
    if not np.isfinite(total):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    if err_total > max(abs_tol, rel_tol * abs(total)) * 10:
        raise QuadratureError(
            f"integral on [{a}, {b}] = {total:.6g} with error estimate "
            f"{err_total:.3g} exceeds tolerance"
        )
    return total

