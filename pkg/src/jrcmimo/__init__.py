"""Capacity analysis for joint radar-communication coherent MIMO radars.

Modules
-------
specfun
    Exponential integrals, Bessel functions, (generalized) incomplete gamma.
waveform
    Array model and null-direction-fixed / communication-fixed phase coding.
distributions
    Densities of the radiated amplitude, its fading products and SNRs.
capacity
    Stable, ergodic, outage and fast-fading capacities.
montecarlo
    Seeded sampling, goodness of fit and empirical capacities.
validation
    Independent oracles and the acceptance runner.
"""

__version__ = "0.1.0"

from .capacity import (CapacityResult, OutageSpec, SnrConfig,  # noqa: E402
                       capacity_ergodic_truncated, capacity_fast_fading,
                       capacity_rayleigh_csi, capacity_single_side_approx,
                       capacity_stable, outage_capacity)
from .distributions import (FadingModel, PdfCurve, TruncationWindow,  # noqa: E402
                            product_pdf, product_snr_pdf)
from .waveform import (ArrayConfig, ConstraintMode, ConstraintSpec,  # noqa: E402
                       PhaseCodingMatrix, generate_comm_fixed, generate_null_fixed)

__all__ = [
    "__version__", "ArrayConfig", "ConstraintMode", "ConstraintSpec",
    "PhaseCodingMatrix", "generate_null_fixed", "generate_comm_fixed",
    "FadingModel", "TruncationWindow", "PdfCurve", "product_pdf",
    "product_snr_pdf", "SnrConfig", "CapacityResult", "OutageSpec",
    "capacity_stable", "capacity_ergodic_truncated", "capacity_rayleigh_csi",
    "capacity_single_side_approx", "outage_capacity", "capacity_fast_fading",
]
