"""Compiled inner loops for path simulation and ensemble estimators.

All kernels are deterministic functions of their inputs (no RNG inside, no
fastmath reassociation) so that ensemble results depend only on the per-path
increment arrays, never on scheduling.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _implicit_root(q, kdt):
    # positive root of z^2 - q z - kdt = 0, evaluated without cancellation;
    # strictly positive for every finite q when kdt > 0
    s = math.sqrt(q * q + 4.0 * kdt)
    if q >= 0.0:
        return 0.5 * (q + s)
    return 2.0 * kdt / (s - q)


@njit(cache=True, inline="always")
def _hn(x, n):
    # bounded nonincreasing Lipschitz surrogate for 1/x, increasing in n
    thr = 1.0 / n
    if x >= thr:
        return (1.0 - 1.0 / n) / x
    return n - 1.0


@njit(cache=True, nogil=True)
def simulate_kernel(
    x0,
    y0,
    alpha,
    beta,
    gamma,
    delta,
    theta,
    eta,
    rho,
    dt,
    n_steps,
    eps_f,
    truncated,
    hn_level,
    dB,
    dC,
    eps_x,
    eps_y,
    eps_c,
    bridge,
    record_steps,
    out_xy,
):
    """Advance one path and detect boundary-proximity events.

    Records the state at the step indices in ``record_steps`` (0 = start).
    Event thresholds <= 0 disable the corresponding check.  With ``bridge``
    set, accumulates the log survival probability of each threshold under a
    within-step driftless Brownian bridge, so 1 - exp(logS) estimates the
    probability that the continuous path crossed even if the grid skeleton
    did not.

    Returns (hit_x, hit_y, hit_c, logS_x, logS_y, logS_c, x_T, y_T) where the
    hit indices are first-crossing step counts (-1 if never).
    """
    x = x0
    y = y0
    adt = alpha * dt
    ddt = delta * dt
    var_c = (2.0 + 2.0 * rho) * dt  # quadratic variation rate of x + y
    hit_x = -1
    hit_y = -1
    hit_c = -1
    logS_x = 0.0
    logS_y = 0.0
    logS_c = 0.0
    if eps_x > 0.0 and x <= eps_x:
        hit_x = 0
        logS_x = -np.inf
    if eps_y > 0.0 and y <= eps_y:
        hit_y = 0
        logS_y = -np.inf
    if eps_c > 0.0 and x + y <= eps_c:
        hit_c = 0
        logS_c = -np.inf
    j = 0
    while j < record_steps.size and record_steps[j] == 0:
        out_xy[j, 0] = x
        out_xy[j, 1] = y
        j += 1
    for k in range(n_steps):
        if truncated:
            cx = beta * dt * _hn(y, hn_level)
            cy = gamma * dt * _hn(x, hn_level)
        else:
            cx = beta * dt / max(y, eps_f)
            cy = gamma * dt / max(x, eps_f)
        qx = x + dB[k] + cx - theta * dt
        qy = y + dC[k] + cy - eta * dt
        xn = _implicit_root(qx, adt)
        yn = _implicit_root(qy, ddt)
        if eps_x > 0.0 and hit_x < 0:
            if xn <= eps_x:
                hit_x = k + 1
                logS_x = -np.inf
            elif bridge:
                p = math.exp(-2.0 * (x - eps_x) * (xn - eps_x) / dt)
                logS_x += math.log1p(-p)
        if eps_y > 0.0 and hit_y < 0:
            if yn <= eps_y:
                hit_y = k + 1
                logS_y = -np.inf
            elif bridge:
                p = math.exp(-2.0 * (y - eps_y) * (yn - eps_y) / dt)
                logS_y += math.log1p(-p)
        if eps_c > 0.0 and hit_c < 0:
            sn = xn + yn
            if sn <= eps_c:
                hit_c = k + 1
                logS_c = -np.inf
            elif bridge and var_c > 0.0:
                p = math.exp(-2.0 * (x + y - eps_c) * (sn - eps_c) / var_c)
                logS_c += math.log1p(-p)
        x = xn
        y = yn
        while j < record_steps.size and record_steps[j] == k + 1:
            out_xy[j, 0] = x
            out_xy[j, 1] = y
            j += 1
    return hit_x, hit_y, hit_c, logS_x, logS_y, logS_c, x, y


@njit(cache=True, nogil=True)
def martingale_kernel(
    x0,
    y0,
    alpha,
    beta,
    gamma,
    delta,
    dt,
    n_steps,
    eps_f,
    dB,
    dC,
    box,
    power_mode,
    checkpoint_steps,
    out_val,
):
    """Box-stopped conditional mean of the diagnostic functional along one path.

    The functional is M = x^(1-2*alpha) * y^(1-2*delta) (power_mode) or
    M = gamma*ln(x) - beta*ln(y).  The path is stopped on exit from the box
    [1/box, box]^2.  Within-step exits are handled by Brownian-bridge
    crossing probabilities: each step deposits survival-weighted mass at the
    edge-clamped state, which removes the O(sqrt(dt)) mass loss a pure grid
    stopping rule suffers on the singular lower edges.
    """
    x = x0
    y = y0
    adt = alpha * dt
    ddt = delta * dt
    lo = 1.0 / box
    hi = box
    surv = 1.0
    acc = 0.0
    j = 0
    for k in range(n_steps):
        if surv > 0.0:
            xo = x
            yo = y
            qx = x + dB[k] + beta * dt / max(y, eps_f)
            qy = y + dC[k] + gamma * dt / max(x, eps_f)
            x = _implicit_root(qx, adt)
            y = _implicit_root(qy, ddt)
            p_xlo = 1.0 if x <= lo else math.exp(-2.0 * (xo - lo) * (x - lo) / dt)
            p_ylo = 1.0 if y <= lo else math.exp(-2.0 * (yo - lo) * (y - lo) / dt)
            p_xhi = 1.0 if x >= hi else math.exp(-2.0 * (hi - xo) * (hi - x) / dt)
            p_yhi = 1.0 if y >= hi else math.exp(-2.0 * (hi - yo) * (hi - y) / dt)
            p_any = 1.0 - (1.0 - p_xlo) * (1.0 - p_ylo) * (1.0 - p_xhi) * (1.0 - p_yhi)
            if p_any > 0.0:
                xc = min(max(x, lo), hi)
                yc = min(max(y, lo), hi)
                if power_mode:
                    m_xlo = lo ** (1.0 - 2.0 * alpha) * yc ** (1.0 - 2.0 * delta)
                    m_ylo = xc ** (1.0 - 2.0 * alpha) * lo ** (1.0 - 2.0 * delta)
                    m_xhi = hi ** (1.0 - 2.0 * alpha) * yc ** (1.0 - 2.0 * delta)
                    m_yhi = xc ** (1.0 - 2.0 * alpha) * hi ** (1.0 - 2.0 * delta)
                else:
                    m_xlo = gamma * math.log(lo) - beta * math.log(yc)
                    m_ylo = gamma * math.log(xc) - beta * math.log(lo)
                    m_xhi = gamma * math.log(hi) - beta * math.log(yc)
                    m_yhi = gamma * math.log(xc) - beta * math.log(hi)
                tot = p_xlo + p_ylo + p_xhi + p_yhi
                m_edge = (p_xlo * m_xlo + p_ylo * m_ylo + p_xhi * m_xhi + p_yhi * m_yhi) / tot
                acc += surv * p_any * m_edge
                surv *= 1.0 - p_any
            if x <= lo or x >= hi or y <= lo or y >= hi:
                # grid exit: freeze at the clamped state, move residual mass there
                x = min(max(x, lo), hi)
                y = min(max(y, lo), hi)
                if surv > 0.0:
                    if power_mode:
                        acc += surv * (x ** (1.0 - 2.0 * alpha) * y ** (1.0 - 2.0 * delta))
                    else:
                        acc += surv * (gamma * math.log(x) - beta * math.log(y))
                    surv = 0.0
        while j < checkpoint_steps.size and checkpoint_steps[j] == k + 1:
            if power_mode:
                m = x ** (1.0 - 2.0 * alpha) * y ** (1.0 - 2.0 * delta)
            else:
                m = gamma * math.log(x) - beta * math.log(y)
            out_val[j] = acc + surv * m
            j += 1
    return 0


@njit(cache=True, nogil=True)
def importance_kernel(
    x0,
    y0,
    alpha,
    beta,
    gamma,
    delta,
    dt,
    n_steps,
    dB,
    dC,
):
    """Independent reference pair (U, V) plus the Girsanov log-weight.

    U and V follow the own-term-only dynamics (Bessel of dimensions
    2*alpha+1 and 2*delta+1).  The log-weight accumulates the Ito left-point
    sums  beta*dB/V - beta^2 dt/(2 V^2) + gamma*dC/U - gamma^2 dt/(2 U^2),
    whose exponential has expectation exactly one step by step.
    """
    u = x0
    v = y0
    adt = alpha * dt
    ddt = delta * dt
    expo = 0.0
    for k in range(n_steps):
        if beta != 0.0:
            expo += beta * dB[k] / v - 0.5 * beta * beta * dt / (v * v)
        if gamma != 0.0:
            expo += gamma * dC[k] / u - 0.5 * gamma * gamma * dt / (u * u)
        u = _implicit_root(u + dB[k], adt)
        v = _implicit_root(v + dC[k], ddt)
    return u, v, expo
