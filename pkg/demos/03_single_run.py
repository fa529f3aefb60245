"""One run from a perturbed flat state to a stationary spike pattern.

Full resolution (I=256, epsilon=1e-10) takes about a minute per run at
tau=0.95; pass a smaller grid for a quick look, e.g. `python 03_single_run.py 64`.
"""
import sys
import time

import numpy as np

from racetrack import IntegratorConfig, ModelParams, count_spikes, simulate_seed, solve
from racetrack.geometry import build_grid, build_kernel

I = int(sys.argv[1]) if len(sys.argv) > 1 else 256
params = ModelParams(sigma=5.0, tau=0.95, Phi=1.3)
config = IntegratorConfig(dt=0.01, epsilon=1e-10, snapshot_stride=100_000)


def progress(step, t, lam):
    print(f"  step {step:>8d}  t={t:9.1f}  max lambda = {lam.max():.4f}")


t0 = time.perf_counter()
res = simulate_seed(params, config, seed=0, I=I, sink=progress)
print(f"converged={res.converged} after {res.steps} steps in {time.perf_counter() - t0:.1f} s")

report = count_spikes(res)
print(f"{report.spike_count} spikes, background mass {report.background_mass:.2e}")
grid = build_grid(I)
for s in report.spikes:
    print(f"  x = {grid.nodes[s.center]:+.3f}  peak {s.peak:9.3f}  mass {s.mass:.4f}")

# Equilibrium fields on the final profile: real wages equalise where people live.
eq = solve(params, build_kernel(grid, params.alpha), grid, res.lam)
occupied = res.lam > 1e-6
print(f"real wage spread on occupied nodes: {np.ptp(eq.omega[occupied]):.2e}")
print(f"real wage max off the spikes:       {eq.omega[~occupied].max() - eq.omega_avg:+.2e}")
