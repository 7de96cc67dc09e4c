"""
Capacity with fading
====================

Slow fading: the code rate is fixed and the link is in outage when the
SNR falls below a threshold; the average rate trades the threshold against
the outage probability.  Fast fading: the codeword sees every fade and the
ergodic capacity integrates over the product density.
"""

import math

from jrcmimo import capacity as cap
from jrcmimo.distributions import FadingModel, TruncationWindow
from jrcmimo.montecarlo import ProductChannelModel, empirical_capacity

M, P0 = 16, 0.1
ray = FadingModel.rayleigh(math.sqrt(0.5))
ric = FadingModel.rician(math.sqrt(0.5), 3.0)
win = TruncationWindow.single_side(M, P0, upper=M)

# average outage rate versus outage probability at 10 dB
snr = cap.SnrConfig.from_db(10)
print("p_out   capacity   rate")
for p in (0.05, 0.1, 0.2, 0.4, 0.6, 0.8):
    c, r = cap.outage_capacity(snr, win, ray, cap.OutageSpec(p))
    print("%.2f   %8.4f  %6.4f" % (p, c.nats, r.nats))
p_opt, best = cap.optimal_outage(snr, win, ray)
print("best p_out = %.4f with rate %.4f nats" % (p_opt, best.nats))

# fast fading: Rician with a line-of-sight part beats Rayleigh
print("\nsnr_db  Rayleigh  Rician")
for db in (0, 10, 20, 30):
    s = cap.SnrConfig.from_db(db)
    print("%6d  %8.4f  %6.4f" % (db, cap.capacity_fast_fading(s, win, ray).nats,
                                 cap.capacity_fast_fading(s, win, ric).nats))

# two independent routes for the unconstrained Rayleigh case
none = TruncationWindow.none(M)
s = cap.SnrConfig.from_c_gamma(10.0)
quad = cap.capacity_fast_fading(s, none, ray).nats
meijer = cap.capacity_fast_fading_meijer(s, ray).nats
emp = empirical_capacity(ProductChannelModel(none, ray), 10.0, 10 ** 6, seed=0)
print("\nquadrature %.8f, Meijer-G %.8f, Monte Carlo %.5f +- %.5f"
      % (quad, meijer, emp.nats, emp.standard_error))
