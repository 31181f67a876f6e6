# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled bisection kernels.

Hot path of the solvers: the nested dual/duration bisection and the
compression-ratio root find.  Mirrors ``_pure.py`` statement by statement;
keep every expression and its evaluation order identical between the two
files so the backends agree bit for bit.
"""

from libc.math cimport exp, fabs, log, pow

import numpy as np

cdef double LN2 = log(2.0)
cdef double _EXP2_MAX = 1020.0
cdef double _X_OVER_B_MAX = 1000.0
cdef double INF = float("inf")


cdef inline double _exp2(double u) nogil:
    if u > _EXP2_MAX:
        return INF
    return pow(2.0, u)


cpdef double pa_priority(double a, double h, double alpha, double R,
                         double B, double N0, double eta, double c):
    """Crowd-sensing priority of a sensor at fixed compression ratio."""
    return a * eta * h / (alpha + N0 * LN2 / (h * B * R)) - c


cpdef double pa_residual(double t, double lam, double a, double h,
                         double alpha, double beta, double R, double T,
                         double B, double N0, double eta, double c):
    """Stationarity residual of the reward in the transmission duration t;
    monotone increasing in t, saturating to -inf near t = 0."""
    cdef double u = (T - t) / (B * R * beta * t)
    cdef double p = _exp2(u)
    cdef double y
    if p == INF:
        return -INF
    y = N0 * ((1.0 - T * LN2 / (B * R * beta * t)) * p - 1.0)
    return a / (beta + (T - t)) + (lam + c) / (eta * h) * (y / h - alpha / beta)


cpdef double pa_energy(double t, double h, double alpha, double beta,
                       double R, double T, double B, double N0, double eta):
    """AP-side energy (J) drawn by one sensor transmitting for t seconds."""
    cdef double u = (T - t) / (B * R * beta * t)
    cdef double f = N0 * (_exp2(u) - 1.0)
    return alpha * (T - t) / (eta * beta * h) + t / (eta * h * h) * f


cpdef double pa_t_root(double t_low, double lam, double a, double h,
                       double alpha, double beta, double R, double T,
                       double B, double N0, double eta, double c,
                       double t_tol, int max_iter) except -1.0:
    """Optimal transmission duration at dual value lam (T when unselected)."""
    cdef double phi = pa_priority(a, h, alpha, R, B, N0, eta, c)
    cdef double lo, hi, mid
    cdef int it = 0
    if phi <= lam:
        return T
    lo = t_low
    hi = T
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


cdef double _total_energy(double lam, double[::1] a, double[::1] h,
                          double[::1] alpha, double[::1] beta, double[::1] R,
                          Py_ssize_t n, double T, double B, double N0,
                          double eta, double c, double t_low, double t_tol,
                          int max_iter) except -1.0:
    cdef double total = 0.0
    cdef double t
    cdef Py_ssize_t i
    for i in range(n):
        t = pa_t_root(t_low, lam, a[i], h[i], alpha[i], beta[i], R[i],
                      T, B, N0, eta, c, t_tol, max_iter)
        total += pa_energy(t, h[i], alpha[i], beta[i], R[i], T, B, N0, eta)
    return total


def pa_total_energy(lam, a, h, alpha, beta, R, n, T, B, N0, eta, c,
                    t_low, t_tol, max_iter):
    """Total AP-side energy at dual value lam (durations re-solved per sensor)."""
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[::1] alphav = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef double[::1] betav = np.ascontiguousarray(beta, dtype=np.float64)
    cdef double[::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    return _total_energy(lam, av, hv, alphav, betav, Rv, n, T, B, N0, eta, c,
                         t_low, t_tol, max_iter)


def pa_solve(a, h, alpha, beta, R, double T, double B, double N0, double eta,
             double c, double budget, double energy_rtol, double t_low,
             double t_tol, int max_iter):
    """Dual bisection for the power-budget multiplier; returns (lam, ts)."""
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[::1] alphav = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef double[::1] betav = np.ascontiguousarray(beta, dtype=np.float64)
    cdef double[::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t i
    cdef double lam, lam_max, phi, lo, hi, mid, e, e0
    cdef int it

    e0 = _total_energy(0.0, av, hv, alphav, betav, Rv, n, T, B, N0, eta, c,
                       t_low, t_tol, max_iter)
    if e0 <= budget:
        lam = 0.0
    else:
        lam_max = 0.0
        for i in range(n):
            phi = pa_priority(av[i], hv[i], alphav[i], Rv[i], B, N0, eta, c)
            if phi > lam_max:
                lam_max = phi
        lo = 0.0
        hi = lam_max
        lam = lam_max
        for it in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                lam = mid
                break
            e = _total_energy(mid, av, hv, alphav, betav, Rv, n, T, B, N0,
                              eta, c, t_low, t_tol, max_iter)
            lam = mid
            if fabs(e - budget) <= energy_rtol * budget:
                break
            if e < budget:
                hi = mid
            else:
                lo = mid

    ts_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] ts = ts_arr
    for i in range(n):
        ts[i] = pa_t_root(t_low, lam, av[i], hv[i], alphav[i], betav[i], Rv[i],
                          T, B, N0, eta, c, t_tol, max_iter)
    return lam, ts_arr


cpdef double cr_d(double R, double ell, double T, double s, double f_cpu,
                  double eps):
    """Transmission time left per raw bit after sensing and compression."""
    return T / ell - 1.0 / s - (exp(eps * R) - exp(eps)) / f_cpu


cpdef double cr_z(double R, double ell, double T, double s, double f_cpu,
                  double q_c, double h, double B, double N0, double eps):
    """Stationarity function of the compression-energy problem; monotone
    increasing in R, saturating to +inf at the feasibility edge."""
    cdef double d = cr_d(R, ell, T, s, f_cpu, eps)
    cdef double x = 1.0 / (d * R)
    cdef double u = x / B
    cdef double p, fp, g
    if u > _X_OVER_B_MAX:
        return INF
    p = pow(2.0, u)
    fp = N0 * LN2 / B * p
    g = N0 * ((1.0 - x * LN2 / B) * p - 1.0)
    return (q_c - g / (h * f_cpu)) * eps * exp(eps * R) - fp / (h * R * R)


cpdef double cr_root(double ell, double T, double s, double f_cpu, double q_c,
                     double h, double B, double N0, double eps, double R_max,
                     double r_tol, int max_iter) except -1.0:
    """Optimal compression ratio for a fixed raw-data size (d(1) > 0 assumed)."""
    cdef double r_hi, lo, hi, mid
    cdef int it
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
