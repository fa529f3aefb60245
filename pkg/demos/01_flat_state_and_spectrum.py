"""Flat-earth state and its linear spectrum.

The uniform distribution lambda = 1/(2 pi) is always stationary. Whether it
survives small perturbations is decided mode by mode by the sign of J_n.
"""
import numpy as np

from racetrack import ModelParams, homogeneous_state, no_black_hole, spectrum
from racetrack.stability import closed_economy_limit, tail_bound, tail_instability_threshold

params = ModelParams(mu=0.1, sigma=5.0, tau=0.5, F=1.0, Phi=1.3)
hs = homogeneous_state(params)
print(f"alpha = {params.alpha}")
print(f"w_bar = {hs.w_bar:.6f}  G_bar = {hs.G_bar:.7f}  omega_bar = {hs.omega_bar:.4e}")

sp = spectrum(params, 12)
print("\n  n        E_n          J_n    growth   verdict")
for row in sp:
    print(f"{row.n:3d} {row.E_n:10.6f} {row.J_n:12.6f} {row.growth_rate:9.6f}   {row.verdict}")
print(f"fastest-growing mode (a heuristic for the spike count): {sp.fastest_mode}")

# Every mode above n_tilde is unstable; the bound follows from the tail inequality.
nt = tail_instability_threshold(params, 200)
print(f"\nn_tilde = {nt}, analytic bound = {tail_bound(params)}")

# Far apart (large alpha) the regions decouple; stability then hinges on Phi.
for Phi in (1.2, 1.3):
    p = params.replace(Phi=Phi)
    print(f"Phi={Phi}: no-black-hole {no_black_hole(p)}, J limit {closed_economy_limit(p):+.5f}")

# Fastest mode as tau grows: short-range trade favours more, smaller cities.
taus = np.array([0.1, 0.4, 0.6, 0.7, 0.8, 0.95])
modes = [spectrum(params.replace(tau=t), 40).fastest_mode for t in taus]
print("\ntau:          ", taus)
print("fastest mode: ", modes)
