import math

import numpy as np
import pytest

from racetrack.equilibrium import ModelParams
from racetrack.geometry import build_grid, build_kernel


def brute_force_fields(params, nodes, lam):
    """Straight double-loop evaluation of G, w, omega, omega_avg.

    Independent of the package: distances, kernel and sums are all computed
    here with plain Python floats.
    """
    I = len(nodes)
    dx = 2 * math.pi / I
    alpha = (params.sigma - 1) * params.tau
    phi = params.Phi / (2 * math.pi)

    def kern(a, b):
        d = abs(a - b)
        d = min(d, 2 * math.pi - d)
        return math.exp(-alpha * d)

    g1s = []
    for i in range(I):
        s = 0.0
        for j in range(I):
            s += kern(nodes[i], nodes[j]) * lam[j]
        g1s.append(s * dx / params.F)
    G = [v ** (1 / (1 - params.sigma)) for v in g1s]
    w = []
    for i in range(I):
        s = 0.0
        for j in range(I):
            s += kern(nodes[i], nodes[j]) * (phi + lam[j]) * G[j] ** (params.sigma - 1)
        w.append(params.mu / (params.sigma * params.F) * dx * s)
    omega = [w[i] - params.mu * math.log(G[i]) for i in range(I)]
    avg = dx * sum(omega[i] * lam[i] for i in range(I))
    return np.array(G), np.array(w), np.array(omega), avg


def brute_force_rk4(params, nodes, lam, dt):
    """Classical RK4 on the brute-force right-hand side, then L1 normalisation."""
    I = len(nodes)
    dx = 2 * math.pi / I

    def f(v):
        _, _, om, avg = brute_force_fields(params, nodes, v)
        return np.array([(om[i] - avg) * v[i] for i in range(I)])

    lam = np.asarray(lam, dtype=float)
    k1 = f(lam)
    k2 = f(lam + 0.5 * dt * k1)
    k3 = f(lam + 0.5 * dt * k2)
    k4 = f(lam + dt * k3)
    new = lam + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return new / (dx * sum(abs(v) for v in new))


@pytest.fixture
def base_params():
    return ModelParams(mu=0.1, sigma=5.0, tau=0.5, F=1.0, Phi=1.3)


@pytest.fixture
def grid256():
    return build_grid(256)


@pytest.fixture
def setup(base_params, grid256):
    return base_params, grid256, build_kernel(grid256, base_params.alpha)


def random_density(grid, seed):
    lam = np.random.default_rng(seed).uniform(0.05, 1.0, grid.I)
    return lam / (grid.dx * lam.sum())


# ---------------------------------------------------------------- acceptance summary

_criteria = {}


def _criterion_of(nodeid):
    if "test_acceptance.py::test_criterion_" not in nodeid:
        return None
    name = nodeid.split("::", 1)[1]
    return int(name.split("_")[2]), name


def pytest_runtest_logreport(report):
    key = _criterion_of(report.nodeid)
    if key is None:
        return
    num, name = key
    entry = _criteria.setdefault(num, {})
    if report.when == "call" or report.outcome != "passed":
        prev = entry.get(name, ("passed", ""))
        outcome = report.outcome if prev[0] == "passed" else prev[0]
        detail = dict(report.user_properties).get("detail", prev[1])
        entry[name] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_criteria):
        tests = _criteria[num]
        outcomes = {o for o, _ in tests.values()}
        verdict = "FAIL" if "failed" in outcomes else ("SKIP" if outcomes == {"skipped"} else "PASS")
        tr.write_line(f"criterion {num:2d}: {verdict}")
        for name, (outcome, detail) in tests.items():
            tr.write_line(f"    {name} [{outcome}] {detail}")
