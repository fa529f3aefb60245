"""Compiled inner loops shared by equilibrium and dynamics.

The circulant product is summed in a fixed order of node offsets for every
output node, so shifting the input by k nodes shifts the output by exactly k
nodes, bit for bit.
"""
import numba as nb
import numpy as np

# Densities below this are set to exactly zero after a step. Subnormal
# arithmetic is ~30x slower and such values carry no mass.
UNDERFLOW_FLUSH = 1e-250

OK = 0
NONFINITE = 1

_FM = {"reassoc", "contract", "arcp"}


@nb.njit(fastmath=_FM, cache=True)
def circulant_apply(c, v, buf, out):
    """out[i] = sum_m c[m] * v[(i + m) % I], m ascending."""
    I = v.shape[0]
    for i in range(I):
        buf[i] = v[i]
        buf[i + I] = v[i]
    for i in range(I):
        s = 0.0
        w = buf[i:i + I]
        for m in range(I):
            s += c[m] * w[m]
        out[i] = s


@nb.njit(cache=True)
def equilibrium_into(c, lam, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
                     buf, g1s, gs1, w, omega):
    """Fill G^(1-sigma), G^(sigma-1), w and omega; return the average real wage.

    g_scale = dx/F, w_scale = mu dx/(sigma F), inv_1ms = 1/(1-sigma).
    Returns NaN if the price-index integral is not positive somewhere.
    """
    I = lam.shape[0]
    circulant_apply(c, lam, buf, g1s)
    for i in range(I):
        g = g_scale * g1s[i]
        if not g > 0.0:
            return np.nan
        g1s[i] = g
        gs1[i] = 1.0 / g
        omega[i] = (phi_bar + lam[i]) * gs1[i]
    circulant_apply(c, omega, buf, w)
    avg = 0.0
    for i in range(I):
        w[i] = w_scale * w[i]
        om = w[i] - mu * inv_1ms * np.log(g1s[i])
        omega[i] = om
        avg += om * lam[i]
    return dx * avg


@nb.njit(cache=True)
def rhs_into(c, lam, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
             buf, g1s, gs1, w, omega, out):
    avg = equilibrium_into(c, lam, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
                           buf, g1s, gs1, w, omega)
    I = lam.shape[0]
    for i in range(I):
        out[i] = (omega[i] - avg) * lam[i]
    return avg


@nb.njit(cache=True)
def _bad_index(v):
    for i in range(v.shape[0]):
        if not np.isfinite(v[i]):
            return i
    return -1


@nb.njit(cache=True)
def rk4_step(c, lam, new, dt, phi_bar, g_scale, w_scale, mu, inv_1ms, dx, work):
    """One RK4 step followed by L1 normalisation.

    Writes the normalised density into `new`. Returns
    (status, bad_node, mass_before_normalisation, sup_diff, n_negative).
    """
    I = lam.shape[0]
    buf = work[0:2 * I]
    g1s = work[2 * I:3 * I]
    gs1 = work[3 * I:4 * I]
    w = work[4 * I:5 * I]
    omega = work[5 * I:6 * I]
    k1 = work[6 * I:7 * I]
    k2 = work[7 * I:8 * I]
    k3 = work[8 * I:9 * I]
    k4 = work[9 * I:10 * I]
    tmp = work[10 * I:11 * I]

    rhs_into(c, lam, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
             buf, g1s, gs1, w, omega, k1)
    for i in range(I):
        tmp[i] = lam[i] + 0.5 * dt * k1[i]
    bad = _bad_index(tmp)
    if bad >= 0:
        return NONFINITE, bad, np.nan, np.nan, 0
    rhs_into(c, tmp, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
             buf, g1s, gs1, w, omega, k2)
    for i in range(I):
        tmp[i] = lam[i] + 0.5 * dt * k2[i]
    bad = _bad_index(tmp)
    if bad >= 0:
        return NONFINITE, bad, np.nan, np.nan, 0
    rhs_into(c, tmp, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
             buf, g1s, gs1, w, omega, k3)
    for i in range(I):
        tmp[i] = lam[i] + dt * k3[i]
    bad = _bad_index(tmp)
    if bad >= 0:
        return NONFINITE, bad, np.nan, np.nan, 0
    rhs_into(c, tmp, phi_bar, g_scale, w_scale, mu, inv_1ms, dx,
             buf, g1s, gs1, w, omega, k4)

    mass = 0.0
    l1 = 0.0
    for i in range(I):
        v = lam[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        tmp[i] = v
        mass += v
        l1 += abs(v)
    mass *= dx
    l1 *= dx
    bad = _bad_index(tmp)
    if bad >= 0 or not (l1 > 0.0 and np.isfinite(l1)):
        return NONFINITE, max(bad, 0), mass, np.nan, 0

    diff = 0.0
    neg = 0
    for i in range(I):
        v = tmp[i] / l1
        if abs(v) < UNDERFLOW_FLUSH:
            v = 0.0
        elif v < 0.0:
            neg += 1
        d = abs(v - lam[i])
        if d > diff:
            diff = d
        new[i] = v
    return OK, -1, mass, diff, neg


@nb.njit(cache=True)
def advance(c, lam, dt, eps, n_steps, phi_bar, g_scale, w_scale, mu, inv_1ms,
            dx, work, history):
    """Step lam in place up to n_steps times, stopping once sup_diff < eps.

    history (length >= n_steps, or length 0 to skip) receives each sup_diff.
    Returns (status, bad_node, steps_done, last_diff, max_mass_drift,
    negative_steps).
    """
    I = lam.shape[0]
    new = np.empty(I)
    keep = history.shape[0] > 0
    drift = 0.0
    negative_steps = 0
    diff = np.inf
    for n in range(n_steps):
        status, bad, mass, diff, neg = rk4_step(
            c, lam, new, dt, phi_bar, g_scale, w_scale, mu, inv_1ms, dx, work)
        if status != OK:
            return status, bad, n, diff, drift, negative_steps
        drift = max(drift, abs(mass - 1.0))
        if neg > 0:
            negative_steps += 1
        for i in range(I):
            lam[i] = new[i]
        if keep:
            history[n] = diff
        if diff < eps:
            return OK, -1, n + 1, diff, drift, negative_steps
    return OK, -1, n_steps, diff, drift, negative_steps
