"""Maximum spike count along the tau axis.

The maximum over seeds is the statistic of interest: single runs can settle
into fewer, larger cities. A coarse grid keeps this demo to a few minutes;
the acceptance suite repeats it at I=256 with ten seeds per point.
"""
import argparse

from racetrack import IntegratorConfig, ModelParams, sweep

parser = argparse.ArgumentParser()
parser.add_argument("--I", type=int, default=64)
parser.add_argument("--seeds", type=int, default=4)
parser.add_argument("--n-jobs", type=int, default=1)
args = parser.parse_args()

result = sweep(ModelParams(sigma=5.0, Phi=1.3), "tau", [0.1, 0.4, 0.6, 0.7, 0.8, 0.95],
               range(args.seeds), IntegratorConfig(max_steps=20_000_000),
               I=args.I, n_jobs=args.n_jobs)

print("   tau  max  per-seed           fastest mode")
for pt in result.points:
    counts = [o.count if o.converged else "-" for o in pt.outcomes]
    print(f"{pt.value:6.2f} {pt.max_spikes!s:>4}  {counts!s:18} {pt.fastest_mode}")
