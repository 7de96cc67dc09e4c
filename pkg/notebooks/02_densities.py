"""
Amplitude and product densities
===============================

The receiver sees the product of the array amplitude A (a possibly
truncated Rayleigh variable) and a fading amplitude H.  We evaluate the
analytic densities, compare them with a Mellin-convolution integral and
with Monte Carlo samples.
"""

import math

import numpy as np

from jrcmimo import distributions as dist
from jrcmimo import montecarlo as mc
from jrcmimo.distributions import TruncationWindow
from jrcmimo.validation import mellin_product_pdf
from jrcmimo.waveform import ArrayConfig

M = 16

# harvested waveform amplitudes follow the Rayleigh law
cfg = ArrayConfig(M, 256, math.radians(-22), math.radians(30))
batch = mc.waveform_amplitude_harvest(cfg, pulses=100, seed=0)
rep = mc.goodness_of_fit(batch, dist.amplitude_pdf_curve(TruncationWindow.none(M)))
print("waveform amplitudes vs Rayleigh: %d samples, KS = %.4f"
      % (rep.sample_count, rep.ks_statistic))

windows = {
    "double 1 dB": TruncationWindow.delta(M, 0.1, 1.0),
    "single side": TruncationWindow.single_side(M, 0.1),
    "none": TruncationWindow.none(M),
}
fadings = {"Rayleigh": dist.FadingModel.rayleigh(1.0),
           "Rician K=3": dist.FadingModel.rician(1.0, 3.0)}

print("\n%-12s %-11s %9s %12s %8s" % ("window", "fading", "mass-1", "Mellin rel", "KS"))
for wname, win in windows.items():
    for fname, fad in fadings.items():
        curve = dist.product_pdf_curve(win, fad, points=801)
        xs = np.linspace(0.5, 12.0, 8)
        rel = max(abs(dist.product_pdf(win, fad, x) / mellin_product_pdf(win, fad, x) - 1)
                  for x in xs)
        smp = mc.sample(mc.ProductChannelModel(win, fad), 200_000, seed=3)
        ks = mc.goodness_of_fit(smp, curve).ks_statistic
        print("%-12s %-11s %9.1e %12.1e %8.4f"
              % (wname, fname, curve.total_mass - 1, rel, ks))

# the SNR density is the same curve after gamma = c Z^2 / M
win, fad = windows["none"], fadings["Rayleigh"]
for a in (0.5, 2.0, 8.0):
    print("p_gamma(%.1f) at c = 10: %.6f" % (a, dist.product_snr_pdf(win, fad, 10.0, a)))
