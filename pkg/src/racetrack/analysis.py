"""Spike counting, the multi-seed maximum-spike protocol, mode-growth
measurement and parameter sweeps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .dynamics import (DEFAULT_AMPLITUDE, IntegrationBlowupError, Integrator,
                       IntegratorConfig, SimulationResult, simulate_seed)
from .equilibrium import ModelParams
from .geometry import TWO_PI, build_grid
from .stability import (no_black_hole, spectrum, stability_coefficient,
                        tail_instability_threshold)

log = logging.getLogger(__name__)

DEFAULT_KAPPA = 2.0
SWEEP_AXES = ("sigma", "tau", "Phi")


class NotConvergedError(ValueError):
    pass


class LinearRegimeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spike:
    center: int
    peak: float
    mass: float


@dataclass(frozen=True)
class SpikeReport:
    spike_count: int
    spikes: tuple
    kappa: float
    background_mass: float

    @property
    def masses(self):
        return [s.mass for s in self.spikes]


def _runs(mask: np.ndarray):
    """Maximal circularly-contiguous runs of True, as index arrays."""
    I = mask.size
    if mask.all():
        return [np.arange(I)]
    if not mask.any():
        return []
    # start scanning just after a False so no run straddles the seam
    start = int(np.flatnonzero(~mask)[-1]) + 1
    order = (start + np.arange(I)) % I
    m = mask[order]
    edges = np.diff(np.concatenate(([0], m.astype(np.int8), [0])))
    begins = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [order[b:e] for b, e in zip(begins, ends)]


def count_spikes(lambda_star, kappa: float = DEFAULT_KAPPA, *,
                 allow_unconverged: bool = False) -> SpikeReport:
    """Count runs of nodes where lambda exceeds kappa / (2 pi).

    `lambda_star` is a SimulationResult or a plain array; a result that did
    not converge is refused unless allow_unconverged is set.
    """
    if isinstance(lambda_star, SimulationResult):
        if not lambda_star.converged and not allow_unconverged:
            raise NotConvergedError(
                f"simulation stopped after {lambda_star.steps} steps without converging")
        lam = lambda_star.lam
    else:
        lam = np.asarray(lambda_star, dtype=np.float64)
    if not kappa > 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    dx = TWO_PI / lam.size
    spikes = []
    inside = np.zeros(lam.size, dtype=bool)
    for run in _runs(lam > kappa / TWO_PI):
        inside[run] = True
        j = run[np.argmax(lam[run])]
        spikes.append(Spike(center=int(j), peak=float(lam[j]),
                            mass=float(dx * lam[run].sum())))
    spikes.sort(key=lambda s: s.center)
    return SpikeReport(spike_count=len(spikes), spikes=tuple(spikes), kappa=kappa,
                       background_mass=float(dx * lam[~inside].sum()))


@dataclass
class SeedOutcome:
    seed: int
    converged: bool
    steps: int
    count: Optional[int]
    report: Optional[SpikeReport]
    error: Optional[str] = None
    lam: Optional[np.ndarray] = field(default=None, repr=False)


def _run_seed(params, config, seed, kappa, amplitude, I):
    try:
        res = simulate_seed(params, config, seed, amplitude, I)
    except IntegrationBlowupError as exc:
        return SeedOutcome(seed=seed, converged=False, steps=exc.step, count=None,
                           report=None, error=str(exc))
    if not res.converged:
        return SeedOutcome(seed=seed, converged=False, steps=res.steps, count=None,
                           report=None, lam=res.lam)
    rep = count_spikes(res, kappa)
    return SeedOutcome(seed=seed, converged=True, steps=res.steps,
                       count=rep.spike_count, report=rep, lam=res.lam)


def _best(outcomes: Sequence[SeedOutcome]):
    ok = [o for o in outcomes if o.converged]
    if not ok:
        return None
    return max(ok, key=lambda o: (o.count, -o.seed))


def max_spike_count(params: ModelParams, config: IntegratorConfig, seeds: Sequence[int],
                    kappa: float = DEFAULT_KAPPA, amplitude: float = DEFAULT_AMPLITUDE,
                    I: int = 256, n_jobs: int = 1):
    """Largest spike count over converged runs, and the per-seed outcomes."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds: at least one seed is required")
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_run_seed)(params, config, s, kappa, amplitude, I) for s in seeds)
    best = _best(outcomes)
    if best is None:
        raise NotConvergedError(f"none of {len(seeds)} seeds converged")
    return best.count, list(outcomes)


def fourier_coefficient(lam: np.ndarray, n: int) -> complex:
    """dx * sum_i lam_i exp(-i n x_i), x_i = -pi + i dx."""
    I = lam.size
    dx = TWO_PI / I
    x = -np.pi + dx * np.arange(I)
    return complex(dx * np.sum(lam * np.exp(-1j * n * x)))


def measure_mode_growth(params: ModelParams, n: int, amplitude: float = 1e-6,
                        horizon: float = 1.0, dt: float = 0.01, I: int = 256,
                        return_samples: bool = False):
    """Fitted exponential growth rate of Fourier mode |n| seeded alone.

    Positive n seeds a cosine, negative n a sine. The log-magnitude slope is
    fitted over snapshots (every step) while the mode stays below 100x its
    initial size.
    """
    k = abs(int(n))
    if not 1 <= k <= I // 2 - 1:
        raise ValueError(f"mode must satisfy 1 <= |n| <= {I // 2 - 1}, got {n}")
    if not 0 < amplitude <= 1e-4:
        raise ValueError(f"amplitude must be in (0, 1e-4], got {amplitude}")
    grid = build_grid(I)
    shape = np.cos(k * grid.nodes) if n > 0 else np.sin(k * grid.nodes)
    lam = params.lambda_bar * (1.0 + amplitude * shape)
    lam /= grid.dx * lam.sum()

    integ = Integrator(params, grid)
    n_steps = int(round(horizon / dt))
    t = [0.0]
    mag = [abs(fourier_coefficient(lam, k))]
    for i in range(1, n_steps + 1):
        status, bad, _, _, _, _ = integ.advance(lam, dt, 0.0, 1)
        if status != 0:
            raise IntegrationBlowupError(f"non-finite value at node {bad}", step=i, node=bad)
        m = abs(fourier_coefficient(lam, k))
        if not m < 100.0 * mag[0]:
            break
        t.append(i * dt)
        mag.append(m)
    if len(t) < 3:
        raise LinearRegimeError(f"mode {n} left the linear regime before 3 snapshots")
    slope = float(np.polyfit(np.array(t), np.log(np.array(mag)), 1)[0])
    if return_samples:
        return slope, np.array(t), np.array(mag)
    return slope


@dataclass
class SweepPoint:
    value: float
    params: ModelParams
    nbh: bool
    fastest_mode: int
    n_tilde: Optional[int]
    outcomes: List[SeedOutcome]
    max_spikes: Optional[int]
    best_seed: Optional[int]
    error: Optional[str] = None

    @property
    def best_profile(self):
        for o in self.outcomes:
            if o.seed == self.best_seed:
                return o.lam
        return None


@dataclass
class SweepResult:
    axis: str
    values: list
    base: ModelParams
    seeds: list
    points: List[SweepPoint]


def linear_summary(params: ModelParams, n_max: Optional[int] = None):
    """(fastest_mode, n_tilde) from the closed-form spectrum."""
    if n_max is None:
        n_max = 10 * math.ceil(params.alpha) + 100
    fastest = spectrum(params, n_max).fastest_mode
    try:
        nt = tail_instability_threshold(params, n_max)
    except ValueError as exc:
        log.warning("n_tilde unavailable for %s: %s", params, exc)
        nt = None
    return fastest, nt


def sweep(base: ModelParams, axis: str, values: Sequence[float], seeds: Sequence[int],
          config: IntegratorConfig, kappa: float = DEFAULT_KAPPA,
          amplitude: float = DEFAULT_AMPLITUDE, I: int = 256, n_jobs: int = 1,
          n_max: Optional[int] = None) -> SweepResult:
    """max_spike_count plus the linear summary at every point along one axis.

    Points violating no-black-hole are flagged but still run; a point that
    fails is recorded and the sweep continues. Output order is by axis value
    then seed, whatever n_jobs is.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds: at least one seed is required")
    values = sorted(float(v) for v in values)
    if not values:
        raise ValueError("axis values: at least one value is required")
    point_params = [base.replace(**{axis: v}) for v in values]

    tasks = [(k, s) for k in range(len(values)) for s in seeds]
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_run_seed)(point_params[k], config, s, kappa, amplitude, I)
        for k, s in tasks)

    points = []
    for k, v in enumerate(values):
        p = point_params[k]
        outs = sorted((o for (kk, _), o in zip(tasks, outcomes) if kk == k),
                      key=lambda o: o.seed)
        fastest, nt = linear_summary(p, n_max)
        best = _best(outs)
        err = None if best is not None else "no seed converged"
        points.append(SweepPoint(
            value=v, params=p, nbh=no_black_hole(p), fastest_mode=fastest, n_tilde=nt,
            outcomes=outs, max_spikes=best.count if best else None,
            best_seed=best.seed if best else None, error=err))
    return SweepResult(axis=axis, values=values, base=base, seeds=seeds, points=points)


def growth_table(params: ModelParams, modes=range(1, 9), amplitude: float = 1e-6,
                 horizon: float = 1.0, dt: float = 0.01, I: int = 256):
    """Rows (n, measured, predicted, relative_error) for the linear cross-check."""
    rows = []
    for n in modes:
        measured = measure_mode_growth(params, n, amplitude, horizon, dt, I)
        predicted = params.lambda_bar * stability_coefficient(params, n)
        if predicted == 0.0:
            rel = 0.0 if abs(measured) <= 1e-10 else math.inf
        else:
            rel = abs(measured - predicted) / abs(predicted)
        rows.append((n, measured, predicted, rel))
    return rows
