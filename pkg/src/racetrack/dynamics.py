"""Replicator dynamics d(lambda)/dt = (omega - omega_avg) * lambda.

Time stepping is classical RK4 with the equilibrium recomputed at every stage,
followed by division by the discrete L1 norm so total mass stays at 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .equilibrium import DegenerateDensityError, ModelParams
from .geometry import Grid, Kernel, build_grid, build_kernel

DEFAULT_AMPLITUDE = 0.01
# steps per compiled call when no snapshots are requested
_CHUNK = 100_000


class IntegrationBlowupError(RuntimeError):
    def __init__(self, message, step, node):
        super().__init__(message)
        self.step = step
        self.node = node


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    epsilon: float = 1e-10
    max_steps: int = 5_000_000
    snapshot_stride: int = 0
    record_history: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt: must be > 0, got {self.dt}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon: must be > 0, got {self.epsilon}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError(f"max_steps: must be an integer >= 1, got {self.max_steps}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 0:
            raise ValueError(
                f"snapshot_stride: must be an integer >= 0, got {self.snapshot_stride}")
        object.__setattr__(self, "max_steps", int(self.max_steps))
        object.__setattr__(self, "snapshot_stride", int(self.snapshot_stride))


@dataclass
class SimulationResult:
    lam: np.ndarray
    steps: int
    converged: bool
    final_diff: float
    epsilon: float
    history: Optional[np.ndarray] = None
    seed: Optional[int] = None
    amplitude: Optional[float] = None
    max_mass_drift: float = 0.0
    negative_steps: int = 0
    grid: Optional[Grid] = field(default=None, repr=False)


class Integrator:
    """Precomputed constants and scratch space for one (params, grid) pair."""

    def __init__(self, params: ModelParams, grid: Grid, kernel: Optional[Kernel] = None):
        if kernel is None:
            kernel = build_kernel(grid, params.alpha)
        if kernel.matrix.shape != (grid.I, grid.I):
            raise ValueError("kernel and grid sizes differ")
        self.params = params
        self.grid = grid
        self.kernel = kernel
        self._c = np.ascontiguousarray(kernel.first_row)
        self._consts = (
            params.phi_bar,
            grid.dx / params.F,
            params.mu * grid.dx / (params.sigma * params.F),
            params.mu,
            1.0 / (1.0 - params.sigma),
            grid.dx,
        )
        self._work = np.empty(11 * grid.I)

    def _as_state(self, lam) -> np.ndarray:
        lam = np.array(lam, dtype=np.float64, order="C")
        if lam.shape != (self.grid.I,):
            raise ValueError(f"lambda: shape {lam.shape}, expected ({self.grid.I},)")
        if not np.isfinite(lam).all():
            raise ValueError("lambda: non-finite entries")
        return lam

    def rhs(self, lam) -> np.ndarray:
        lam = self._as_state(lam)
        I = self.grid.I
        w = self._work
        out = np.empty(I)
        avg = _kernels.rhs_into(self._c, lam, *self._consts, w[:2 * I], w[2 * I:3 * I],
                                w[3 * I:4 * I], w[4 * I:5 * I], w[5 * I:6 * I], out)
        if math.isnan(avg):
            raise DegenerateDensityError("price-index integral is not positive")
        return out

    def step(self, lam, dt: float):
        """One normalised RK4 step. Returns (new_lambda, mass_before_normalisation)."""
        lam = self._as_state(lam)
        new = np.empty_like(lam)
        status, bad, mass, _, neg = _kernels.rk4_step(
            self._c, lam, new, float(dt), *self._consts, self._work)
        if status != _kernels.OK:
            raise IntegrationBlowupError(
                f"non-finite value at node {bad}", step=1, node=int(bad))
        if neg:
            warnings.warn(f"{neg} negative density entries after step",
                          RuntimeWarning, stacklevel=2)
        return new, mass

    def advance(self, lam: np.ndarray, dt: float, eps: float, n_steps: int,
                history: Optional[np.ndarray] = None):
        """Step `lam` in place; see _kernels.advance for the return tuple."""
        if history is None:
            history = np.empty(0)
        return _kernels.advance(self._c, lam, float(dt), float(eps), int(n_steps),
                                *self._consts, self._work, history)


def _grid_for(lam, grid: Optional[Grid]) -> Grid:
    return grid if grid is not None else build_grid(len(lam))


def rhs(params: ModelParams, kernel: Kernel, grid: Grid, lam) -> np.ndarray:
    return Integrator(params, grid, kernel).rhs(lam)


def step(params: ModelParams, kernel: Kernel, grid: Grid, lam, dt: float) -> np.ndarray:
    return Integrator(params, grid, kernel).step(lam, dt)[0]


def initial_condition(grid: Grid, seed: int, amplitude: float = DEFAULT_AMPLITUDE) -> np.ndarray:
    """Flat state times (1 + u), u ~ U[-amplitude, amplitude] iid, at unit mass."""
    if not 0.0 <= amplitude < 1.0:
        raise ValueError(f"amplitude: must satisfy 0 <= amplitude < 1, got {amplitude}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-amplitude, amplitude, size=grid.I)
    lam = (1.0 + u) / (2.0 * np.pi)
    return lam / (grid.dx * lam.sum())


def simulate(params: ModelParams, config: IntegratorConfig, lambda0, *,
             grid: Optional[Grid] = None, kernel: Optional[Kernel] = None,
             sink: Optional[Callable[[int, float, np.ndarray], None]] = None,
             seed: Optional[int] = None, amplitude: Optional[float] = None,
             integrator: Optional[Integrator] = None) -> SimulationResult:
    """Step until the sup-norm change per step drops below config.epsilon.

    sink(step, t, lam) is called with the initial state, every
    config.snapshot_stride steps, and with the final state.
    """
    if integrator is None:
        grid = _grid_for(lambda0, grid)
        integrator = Integrator(params, grid, kernel)
    grid = integrator.grid
    lam = integrator._as_state(lambda0)
    history = np.empty(config.max_steps) if config.record_history else None

    stride = config.snapshot_stride if sink is not None else 0
    chunk = stride if stride > 0 else _CHUNK
    if sink is not None:
        sink(0, 0.0, lam.copy())
    emitted = 0

    done = 0
    drift = 0.0
    negatives = 0
    diff = math.inf
    converged = False
    while done < config.max_steps:
        n = min(chunk, config.max_steps - done)
        hist_view = history[done:done + n] if history is not None else None
        status, bad, taken, diff, d, neg = integrator.advance(
            lam, config.dt, config.epsilon, n, hist_view)
        drift = max(drift, d)
        negatives += neg
        if status != _kernels.OK:
            raise IntegrationBlowupError(
                f"non-finite value at node {bad} during step {done + taken + 1}",
                step=done + taken + 1, node=int(bad))
        done += taken
        converged = diff < config.epsilon
        if converged:
            break
        if stride and done % stride == 0:
            sink(done, done * config.dt, lam.copy())
            emitted = done

    if sink is not None and emitted != done:
        sink(done, done * config.dt, lam.copy())
    if negatives:
        warnings.warn(f"negative density entries appeared in {negatives} steps",
                      RuntimeWarning, stacklevel=2)
    return SimulationResult(
        lam=lam, steps=done, converged=converged, final_diff=float(diff),
        epsilon=config.epsilon,
        history=history[:done] if history is not None else None,
        seed=seed, amplitude=amplitude, max_mass_drift=float(drift),
        negative_steps=int(negatives), grid=grid)


def simulate_seed(params: ModelParams, config: IntegratorConfig, seed: int,
                  amplitude: float = DEFAULT_AMPLITUDE, I: int = 256,
                  **kwargs) -> SimulationResult:
    """simulate() from the seeded random initial condition."""
    grid = kwargs.pop("grid", None) or build_grid(I)
    lam0 = initial_condition(grid, seed, amplitude)
    return simulate(params, config, lam0, grid=grid, seed=seed,
                    amplitude=amplitude, **kwargs)
