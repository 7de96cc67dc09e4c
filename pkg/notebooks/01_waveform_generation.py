"""
Null-direction-fixed waveforms
==============================

A 16-element array sends L sub-pulses per pulse.  Each sub-pulse is a
random permutation of a base phase vector, chosen so the signal toward the
null direction never changes while the signal toward the communication
receiver picks up a random amplitude.
"""

import math

import numpy as np

from jrcmimo import waveform as wf

cfg = wf.ArrayConfig(M=16, L=256, theta_c=math.radians(-22), theta_n=math.radians(30))

# no constraint: every draw is accepted
mat = wf.generate_null_fixed(cfg, seed=1)
g_null = mat.radiated(cfg.theta_n)
print("iterations used:", mat.iterations_used)
print("spread of G(theta_n) over sub-pulses:", np.ptp(np.abs(g_null - g_null[0])))
print("amplitude toward receiver: mean %.3f, min %.3f, max %.3f"
      % (mat.amplitudes.mean(), mat.amplitudes.min(), mat.amplitudes.max()))

# after the per-sub-pulse phase correction only the amplitude varies
gc = mat.corrected_radiated()
print("max phase offset after correction (rad):",
      np.max(np.abs(np.angle(gc * np.conj(gc[0])))))

# single-side constraint A >= A0 keeps the receiver SNR above a floor
spec = wf.ConstraintSpec(wf.ConstraintMode.SINGLE_SIDE, p0=0.1)
lo, hi = spec.window(cfg.M)
mat = wf.generate_null_fixed(cfg, spec, seed=1)
print("\nA0 = %.4f, smallest accepted amplitude %.4f" % (lo, mat.amplitudes.min()))
print("iterations per sub-pulse: %.2f (1/p0 = 10)" % (mat.iterations_used / cfg.L))

# a 3 dB band around A0
spec = wf.ConstraintSpec(wf.ConstraintMode.DOUBLE_SIDE, p0=0.1, delta_db=3.0)
mat = wf.generate_null_fixed(cfg, spec, seed=1)
print("3 dB band [%.3f, %.3f]; amplitudes in [%.3f, %.3f]"
      % (*spec.window(cfg.M), mat.amplitudes.min(), mat.amplitudes.max()))

# the communication-fixed variant radiates a constant amplitude A0
mat = wf.generate_comm_fixed(cfg, 0.1, seed=1)
print("\ncomm-fixed amplitude spread:", np.ptp(mat.amplitudes))

# phases of the individual array terms toward the receiver look uniform
big = wf.ArrayConfig(M=100, L=1024, theta_c=cfg.theta_c, theta_n=cfg.theta_n)
edges, dens = wf.phase_histogram(wf.generate_null_fixed(big, seed=0))
print("\nphase histogram density range: [%.4f, %.4f], 1/(2 pi) = %.4f"
      % (dens.min(), dens.max(), 1 / (2 * np.pi)))
