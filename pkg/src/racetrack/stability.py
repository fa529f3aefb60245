"""Linear stability of the flat-earth state lambda = 1/(2 pi).

A perturbation proportional to exp(i n x) grows like exp(lambda_bar * J_n * t),
where J_n depends on the Fourier coefficient E_n of the exponential kernel on
the circle. Everything here is closed form; no grid is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import ModelParams

MARGINAL_TOL = 1e-12


@dataclass(frozen=True)
class HomogeneousState:
    lambda_bar: float
    phi_bar: float
    w_bar: float
    G_bar: float
    omega_bar: float
    G_power: float  # G_bar^(sigma-1)


@dataclass(frozen=True)
class SpectrumRow:
    n: int
    E_n: float
    J_n: float
    growth_rate: float
    verdict: str


@dataclass(frozen=True)
class Spectrum:
    rows: list
    fastest_mode: int  # heuristic spike-count predictor, not a prediction

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]


def homogeneous_state(params: ModelParams) -> HomogeneousState:
    a = params.alpha
    lb, pb = params.lambda_bar, params.phi_bar
    # G^(1-sigma) = lambda_bar/F * int_S exp(-alpha|x-y|) dy
    g1s = 2.0 * lb * (-math.expm1(-a * math.pi)) / (params.F * a)
    G = g1s ** (1.0 / (1.0 - params.sigma))
    w = params.mu * (pb + lb) / (params.sigma * lb)
    # ln G from the power directly keeps omega accurate when G ~ 1
    omega = w - params.mu * math.log(g1s) / (1.0 - params.sigma)
    return HomogeneousState(lambda_bar=lb, phi_bar=pb, w_bar=w, G_bar=G,
                            omega_bar=omega, G_power=1.0 / g1s)


def mode_coefficient(alpha: float, n) -> float:
    """E_n = int_S exp(i n y) exp(-alpha |x - y|) dy / exp(i n x)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    n = np.abs(np.asarray(n))
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    e = np.exp(-alpha * np.pi)
    E = 2.0 * alpha * (1.0 - sign * e) / (n.astype(np.float64) ** 2 + alpha ** 2)
    return E if E.ndim else float(E)


def limit_product(params: ModelParams, n) -> float:
    """G_bar^(sigma-1) * E_n, which tends to 2 pi F as alpha grows."""
    return homogeneous_state(params).G_power * mode_coefficient(params.alpha, n)


def stability_coefficient(params: ModelParams, n) -> float:
    n_arr = np.asarray(n)
    if (n_arr == 0).any():
        raise ValueError("n = 0 is not a mass-conserving perturbation")
    hs = homogeneous_state(params)
    s, F = params.sigma, params.F
    gE = hs.G_power * mode_coefficient(params.alpha, n_arr)
    J = (params.mu * gE / F) * (
        (2.0 * s - 1.0) / (s * (s - 1.0))
        - (hs.phi_bar + hs.lambda_bar) / (s * F) * gE)
    return J if np.ndim(J) else float(J)


def growth_rate(params: ModelParams, n) -> float:
    return params.lambda_bar * stability_coefficient(params, n)


def closed_economy_limit(params: ModelParams) -> float:
    """Limit of J_n as alpha -> infinity (same for every n)."""
    s, Phi = params.sigma, params.Phi
    return 2.0 * params.mu * math.pi * (
        (2.0 * s - 1.0 - (s - 1.0) * (Phi + 1.0)) / (s * (s - 1.0)))


def no_black_hole(params: ModelParams) -> bool:
    return params.sigma / (params.sigma - 1.0) < params.Phi


def verdict(J: float) -> str:
    if abs(J) < MARGINAL_TOL:
        return "marginal"
    return "unstable" if J > 0 else "stable"


def tail_bound_constant(params: ModelParams) -> float:
    """C such that every |n| with n^2 > alpha^2 (C - 1) has J_n > 0.

    Odd modes are the worst case for the sign of J_n, which reduces to
    n^2 + alpha^2 > alpha^2 (sigma-1)(Phi+1)(1+e)/((2 sigma-1)(1-e)),
    with e = exp(-alpha pi).
    """
    a, s = params.alpha, params.sigma
    e = math.exp(-a * math.pi)
    return (s - 1.0) * (params.Phi + 1.0) * (1.0 + e) / (
        (2.0 * s - 1.0) * (-math.expm1(-a * math.pi)))


def tail_bound(params: ModelParams) -> int:
    """ceil(alpha sqrt(C)); the threshold mode never exceeds this."""
    return math.ceil(params.alpha * math.sqrt(tail_bound_constant(params)))


def tail_instability_threshold(params: ModelParams, n_max: int) -> int:
    """Smallest n_tilde >= 0 with J_n > 0 for every |n| > n_tilde.

    Modes up to n_max are checked explicitly; beyond n_max positivity is
    guaranteed by the analytic bound, which must already hold at n_max + 1.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    a = params.alpha
    C = tail_bound_constant(params)
    nxt = n_max + 1
    if not nxt * nxt + a * a > a * a * C:
        raise ValueError(
            f"n_max={n_max} too small: analytic tail bound only engages "
            f"above n = {math.sqrt(max(a * a * (C - 1.0), 0.0)):.3f}")
    J = stability_coefficient(params, np.arange(1, n_max + 1))
    nonpos = np.flatnonzero(~(J > 0))
    return 0 if nonpos.size == 0 else int(nonpos[-1] + 1)


def spectrum(params: ModelParams, n_max: int) -> Spectrum:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    n = np.arange(1, n_max + 1)
    E = mode_coefficient(params.alpha, n)
    J = stability_coefficient(params, n)
    rates = params.lambda_bar * J
    rows = [SpectrumRow(n=int(k), E_n=float(e), J_n=float(j),
                        growth_rate=float(g), verdict=verdict(float(j)))
            for k, e, j, g in zip(n, E, J, rates)]
    return Spectrum(rows=rows, fastest_mode=int(n[np.argmax(rates)]))
