"""Pure-Python bisection kernels.

Fallback backend used when the compiled extension is unavailable (or forced
via ``WPCS_KERNELS=python``).  Mirrors ``_core.pyx`` statement by statement:
both backends must produce the same floats, so keep every expression and its
evaluation order identical between the two files.
"""

from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)
_EXP2_MAX = 1020.0
_X_OVER_B_MAX = 1000.0


def _exp2(u: float) -> float:
    if u > _EXP2_MAX:
        return math.inf
    return 2.0 ** u


def pa_priority(a, h, alpha, R, B, N0, eta, c):
    """Crowd-sensing priority of a sensor at fixed compression ratio.

    Sensors whose priority falls below the power-budget dual are allocated
    nothing; the expression is the sign of the stationarity residual at the
    full-window transmission boundary.
    """
    return a * eta * h / (alpha + N0 * LN2 / (h * B * R)) - c


def pa_residual(t, lam, a, h, alpha, beta, R, T, B, N0, eta, c):
    """Stationarity residual of the reward in the transmission duration t.

    Monotone increasing in t on (0, T]; its root is the optimal duration.
    Saturates to -inf when the implied transmission rate overflows, which
    keeps the bisection sign test valid arbitrarily close to t = 0.
    """
    u = (T - t) / (B * R * beta * t)
    p = _exp2(u)
    if math.isinf(p):
        return -math.inf
    y = N0 * ((1.0 - T * LN2 / (B * R * beta * t)) * p - 1.0)
    return a / (beta + (T - t)) + (lam + c) / (eta * h) * (y / h - alpha / beta)


def pa_energy(t, h, alpha, beta, R, T, B, N0, eta):
    """AP-side energy (J) drawn by one sensor transmitting for t seconds,
    with sensing/compression filling the rest of the window."""
    u = (T - t) / (B * R * beta * t)
    f = N0 * (_exp2(u) - 1.0)
    return alpha * (T - t) / (eta * beta * h) + t / (eta * h * h) * f


def pa_t_root(t_low, lam, a, h, alpha, beta, R, T, B, N0, eta, c,
              t_tol, max_iter):
    """Optimal transmission duration at dual value lam.

    Returns T when the sensor's priority is at or below lam (the residual is
    then negative on the whole window).  Otherwise bisects the monotone
    residual on [t_low, T]; a root pushed below t_low clamps there.
    """
    phi = pa_priority(a, h, alpha, R, B, N0, eta, c)
    if phi <= lam:
        return T
    lo = t_low
    hi = T
    it = 0
    while hi - lo > t_tol:
        if it >= max_iter:
            raise RuntimeError("transmission-duration bisection exceeded iteration cap")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pa_residual(mid, lam, a, h, alpha, beta, R, T, B, N0, eta, c) < 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi)


def pa_total_energy(lam, a, h, alpha, beta, R, n, T, B, N0, eta, c,
                    t_low, t_tol, max_iter):
    """Total AP-side energy at dual value lam (durations re-solved per sensor)."""
    total = 0.0
    for i in range(n):
        t = pa_t_root(t_low, lam, a[i], h[i], alpha[i], beta[i], R[i],
                      T, B, N0, eta, c, t_tol, max_iter)
        total += pa_energy(t, h[i], alpha[i], beta[i], R[i], T, B, N0, eta)
    return total


def pa_solve(a, h, alpha, beta, R, T, B, N0, eta, c, budget,
             energy_rtol, t_low, t_tol, max_iter):
    """Dual bisection for the power-budget multiplier.

    Returns (lam, ts).  lam = 0 when the budget is slack at the unconstrained
    optimum; otherwise lam > 0 is driven until the total energy matches the
    budget within energy_rtol (or the bracket exhausts double precision,
    whichever comes first).  ts are re-solved at the returned lam so the pair
    is self-consistent.
    """
    # plain Python floats end to end: same libm calls as the compiled core
    a = np.asarray(a, dtype=np.float64).tolist()
    h = np.asarray(h, dtype=np.float64).tolist()
    alpha = np.asarray(alpha, dtype=np.float64).tolist()
    beta = np.asarray(beta, dtype=np.float64).tolist()
    R = np.asarray(R, dtype=np.float64).tolist()
    n = len(a)

    e0 = pa_total_energy(0.0, a, h, alpha, beta, R, n, T, B, N0, eta, c,
                         t_low, t_tol, max_iter)
    if e0 <= budget:
        lam = 0.0
    else:
        lam_max = 0.0
        for i in range(n):
            phi = pa_priority(a[i], h[i], alpha[i], R[i], B, N0, eta, c)
            if phi > lam_max:
                lam_max = phi
        lo = 0.0
        hi = lam_max
        lam = lam_max
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                lam = mid
                break
            e = pa_total_energy(mid, a, h, alpha, beta, R, n, T, B, N0, eta, c,
                                t_low, t_tol, max_iter)
            lam = mid
            if abs(e - budget) <= energy_rtol * budget:
                break
            if e < budget:
                hi = mid
            else:
                lo = mid

    ts = np.empty(n, dtype=np.float64)
    for i in range(n):
        ts[i] = pa_t_root(t_low, lam, a[i], h[i], alpha[i], beta[i], R[i],
                          T, B, N0, eta, c, t_tol, max_iter)
    return lam, ts


def cr_d(R, ell, T, s, f_cpu, eps):
    """Transmission time left per raw bit after sensing and compressing at
    ratio R.  Positive iff the schedule fits in the window."""
    return T / ell - 1.0 / s - (math.exp(eps * R) - math.exp(eps)) / f_cpu


def cr_z(R, ell, T, s, f_cpu, q_c, h, B, N0, eps):
    """Stationarity function of the per-sensor compression-energy problem
    along the full-time-utilization curve; monotone increasing in R.

    Requires d(R) > 0.  Saturates to +inf when the implied rate overflows
    (the compression term dominates there).
    """
    d = cr_d(R, ell, T, s, f_cpu, eps)
    x = 1.0 / (d * R)
    u = x / B
    if u > _X_OVER_B_MAX:
        return math.inf
    p = 2.0 ** u
    fp = N0 * LN2 / B * p
    g = N0 * ((1.0 - x * LN2 / B) * p - 1.0)
    return (q_c - g / (h * f_cpu)) * eps * math.exp(eps * R) - fp / (h * R * R)


def cr_root(ell, T, s, f_cpu, q_c, h, B, N0, eps, R_max, r_tol, max_iter):
    """Optimal compression ratio for a fixed raw-data size.

    Caller guarantees d(1) > 0.  Bisects z on [1, R_hi] where R_hi is R_max
    or, when the schedule becomes infeasible earlier, a point just inside the
    feasibility edge; clamps at either end per the boundary sign of z.
    """
    if cr_d(R_max, ell, T, s, f_cpu, eps) > 0.0:
        r_hi = R_max
    else:
        lo = 1.0
        hi = R_max
        it = 0
        while hi - lo > 1e-12 * R_max and it < max_iter:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if cr_d(mid, ell, T, s, f_cpu, eps) > 0.0:
                lo = mid
            else:
                hi = mid
            it += 1
        r_hi = lo * (1.0 - 1e-9)
        if r_hi <= 1.0:
            return 1.0
    if cr_z(1.0, ell, T, s, f_cpu, q_c, h, B, N0, eps) >= 0.0:
        return 1.0
    if cr_z(r_hi, ell, T, s, f_cpu, q_c, h, B, N0, eps) <= 0.0:
        return r_hi
    lo = 1.0
    hi = r_hi
    it = 0
    while hi - lo > r_tol:
        if it >= max_iter:
            raise RuntimeError("compression-ratio bisection exceeded iteration cap")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cr_z(mid, ell, T, s, f_cpu, q_c, h, B, N0, eps) > 0.0:
            hi = mid
        else:
            lo = mid
        it += 1
    return 0.5 * (lo + hi)
