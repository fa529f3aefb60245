"""Instantaneous market equilibrium for a given mobile-population density.

Given lambda on the grid, the price index, nominal wage and real wage follow
explicitly:

    G^(1-sigma)(x) = (1/F) int K(x,y) lambda(y) dy
    w(x)           = mu/(sigma F) int K(x,y) (phi + lambda(y)) G(y)^(sigma-1) dy
    omega(x)       = w(x) - mu ln G(x)

with K(x,y) = exp(-alpha d(x,y)) and alpha = (sigma-1) tau.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import _kernels
from .geometry import TWO_PI, Grid, Kernel


class DegenerateDensityError(ValueError):
    """Density has no positive mass where the price index needs it."""


@dataclass(frozen=True)
class ModelParams:
    """Economic parameters. Total mobile population is fixed at 1."""

    mu: float = 0.1
    sigma: float = 5.0
    tau: float = 0.5
    F: float = 1.0
    Phi: float = 1.3
    Lambda: float = field(default=1.0, init=False)

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"{f.name}: expected a number, got {v!r}")
            if not math.isfinite(v):
                raise ValueError(f"{f.name}: must be finite, got {v}")
            object.__setattr__(self, f.name, float(v))
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"mu: must satisfy 0 <= mu < 1, got {self.mu}")
        if not self.sigma > 1.0:
            raise ValueError(f"sigma: must be > 1, got {self.sigma}")
        if not self.tau > 0.0:
            raise ValueError(f"tau: must be > 0, got {self.tau}")
        if not self.F > 0.0:
            raise ValueError(f"F: must be > 0, got {self.F}")
        if not self.Phi > 0.0:
            raise ValueError(f"Phi: must be > 0, got {self.Phi}")

    @property
    def alpha(self) -> float:
        return (self.sigma - 1.0) * self.tau

    @property
    def phi_bar(self) -> float:
        return self.Phi / TWO_PI

    @property
    def lambda_bar(self) -> float:
        return 1.0 / TWO_PI

    def replace(self, **changes) -> "ModelParams":
        kw = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        kw.update(changes)
        return ModelParams(**kw)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.init}


@dataclass(frozen=True)
class Equilibrium:
    G: np.ndarray
    w: np.ndarray
    omega: np.ndarray
    omega_avg: float


def _check_field(grid: Grid, values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (grid.I,):
        raise ValueError(f"{name}: shape {values.shape}, expected ({grid.I},)")
    if not np.isfinite(values).all():
        raise ValueError(f"{name}: non-finite entries")
    return values


def _price_index_power(params: ModelParams, kernel: Kernel, grid: Grid, lam):
    """G^(1-sigma) at every node."""
    g1s = (grid.dx / params.F) * kernel.apply(lam)
    if not (g1s > 0).all():
        raise DegenerateDensityError(
            "price-index integral is not positive; density has no mass")
    return g1s


def price_index(params: ModelParams, kernel: Kernel, grid: Grid, lam) -> np.ndarray:
    lam = _check_field(grid, lam, "lambda")
    g1s = _price_index_power(params, kernel, grid, lam)
    return g1s ** (1.0 / (1.0 - params.sigma))


def _wage_from_power(params, kernel, grid, lam, gs1):
    # gs1 is G^(sigma-1)
    c = params.mu / (params.sigma * params.F)
    return c * grid.dx * kernel.apply((params.phi_bar + lam) * gs1)


def nominal_wage(params: ModelParams, kernel: Kernel, grid: Grid, lam, G) -> np.ndarray:
    lam = _check_field(grid, lam, "lambda")
    G = _check_field(grid, G, "G")
    if not (G > 0).all():
        raise ValueError("G: entries must be positive")
    return _wage_from_power(params, kernel, grid, lam, G ** (params.sigma - 1.0))


def real_wage(params: ModelParams, w, G) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    if not (G > 0).all():
        raise ValueError("G: entries must be positive")
    return w - params.mu * np.log(G)


def average_real_wage(grid: Grid, omega, lam) -> float:
    """Population-weighted mean real wage (total mobile mass is 1)."""
    omega = np.asarray(omega, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if omega.shape != (grid.I,) or lam.shape != (grid.I,):
        raise ValueError(
            f"length mismatch: omega {omega.shape}, lambda {lam.shape}, grid {grid.I}")
    return float(grid.dx * np.dot(omega, lam))


def variety_density(params: ModelParams, lam) -> np.ndarray:
    """Number of varieties per unit length, lambda/F. Diagnostic only."""
    return np.asarray(lam, dtype=np.float64) / params.F


def solve(params: ModelParams, kernel: Kernel, grid: Grid, lam) -> Equilibrium:
    """All equilibrium fields at once.

    G^(sigma-1) is taken as the reciprocal of the bracketed integral so the
    wage never sees a pow/unpow round trip. Uses the same compiled path as
    the time stepper.
    """
    lam = np.ascontiguousarray(_check_field(grid, lam, "lambda"))
    I = grid.I
    g1s, gs1, w, omega = (np.empty(I) for _ in range(4))
    avg = _kernels.equilibrium_into(
        np.ascontiguousarray(kernel.first_row), lam, params.phi_bar,
        grid.dx / params.F, params.mu * grid.dx / (params.sigma * params.F),
        params.mu, 1.0 / (1.0 - params.sigma), grid.dx,
        np.empty(2 * I), g1s, gs1, w, omega)
    if math.isnan(avg):
        raise DegenerateDensityError(
            "price-index integral is not positive; density has no mass")
    G = g1s ** (1.0 / (1.0 - params.sigma))
    return Equilibrium(G=G, w=w, omega=omega, omega_avg=avg)
