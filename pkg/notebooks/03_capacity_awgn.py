"""
Capacity without fading
=======================

With a line-of-sight channel the only randomness is the array amplitude.
We compare the constant-amplitude capacity with the windows that the
constrained waveform generator can enforce, then look at how well the
simple closed-form approximations hold as the array grows.
"""

from jrcmimo import capacity as cap

series = ("stable", "single", "delta_1db", "delta_3db", "delta_6db", "none")
print("snr_db " + " ".join("%10s" % s for s in series))
for snr_db, res in cap.awgn_sweep(m=16, p0=0.1, snr_db=range(-10, 31, 5)):
    print("%6d " % snr_db + " ".join("%10.4f" % res[s].nats for s in series))

# approximation errors at c = 10: they shrink very fast with M
print("\n   M  |C_csi - C(0,M)|  |approx - C(A0,M)|")
for row in cap.approximation_table(10.0, 0.1, (8, 16, 32)):
    print("%4d  %15.3e  %17.3e" % (row["m"], row["no_window"], row["single_side"]))

snr = cap.SnrConfig.from_db(10)
print("\nRayleigh with receiver CSI at 10 dB: %.4f nats = %.4f bits"
      % (cap.capacity_rayleigh_csi(snr).nats, cap.capacity_rayleigh_csi(snr).bits))
