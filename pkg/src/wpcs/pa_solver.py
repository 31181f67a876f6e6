"""Power allocation, sensing-data sizing and transmission scheduling at
fixed compression ratios.

With the ratios frozen, the reward maximization collapses to choosing each
sensor's transmission duration: the window and energy balances are tight at
any optimum, so the raw-data size is (T - t)/beta and the beam power follows
from the sensor's energy bill.  The duration satisfies a monotone
stationarity condition solved by bisection per sensor, nested inside an
outer bisection on the power-budget dual variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .model import (
    ConvergenceError,
    DerivedCoeffs,
    SensorProfile,
    SystemConfig,
    compression_cycles,
)

# clamp keeping the duration bisection away from the t -> 0 singularity
T_LOW_FRAC = 1e-9
# absolute duration tolerance as a fraction of the sensing window
T_TOL_FRAC = 1e-13
MAX_ITER = 200


@dataclass
class PaSolution:
    """Fixed-ratio solve outcome: per-sensor transmission durations, the
    power-budget dual, beam powers, raw-data sizes and priorities."""

    t_tx: np.ndarray
    lam: float
    powers: np.ndarray
    raw_bits: np.ndarray
    priorities: np.ndarray
    selected: np.ndarray


def priority(
    p: SensorProfile,
    R: float,
    cfg: SystemConfig,
    appendix_variant: bool = False,
) -> float:
    """Crowd-sensing priority: a sensor participates only while the dual
    variable stays below this score.

    ``appendix_variant`` swaps the per-bit compression energy q_c*C(R, eps)
    for q_c*exp(eps*R); the two disagree by q_c*exp(eps) and only the former
    is consistent with the energy coefficient used everywhere else.  The
    variant is exposed so audits can quantify the gap.
    """
    if not 1.0 <= R <= p.R_max:
        raise ValueError(f"ratio {R} outside [1, {p.R_max}]")
    if appendix_variant:
        comp_energy = p.q_c * np.exp(p.epsilon * R)
    else:
        comp_energy = p.q_c * compression_cycles(R, p.epsilon)
    alpha_term = p.q_r + p.q_s + comp_energy
    return _kernels.pa_priority(p.a, p.h, alpha_term, R, cfg.B, cfg.N0, cfg.eta, cfg.c)


def stationarity_residual(
    t: float,
    lam: float,
    p: SensorProfile,
    coeffs: DerivedCoeffs,
    R: float,
    cfg: SystemConfig,
) -> float:
    """Derivative of the per-sensor Lagrangian in the transmission duration.

    Monotone increasing on (0, T]; negative at the optimum boundary t = T
    means the sensor is priced out.  Domain error for t <= 0.
    """
    if t <= 0.0:
        raise ValueError("transmission duration must be positive")
    if lam < 0.0:
        raise ValueError("dual variable must be nonnegative")
    return _kernels.pa_residual(
        t, lam, p.a, p.h, coeffs.alpha, coeffs.beta, R, cfg.T, cfg.B, cfg.N0, cfg.eta, cfg.c
    )


def t_given_lambda(
    lam: float,
    p: SensorProfile,
    coeffs: DerivedCoeffs,
    R: float,
    cfg: SystemConfig,
    tol: float = 1e-6,
) -> float:
    """Optimal transmission duration at dual value ``lam``.

    Interior roots carry |stationarity_residual| <= ``tol``.  Returns T when
    the residual is negative throughout (unselected sensor), and clamps just
    above zero in the opposite degenerate case.
    """
    if lam < 0.0:
        raise ValueError("dual variable must be nonnegative")
    try:
        t = _kernels.pa_t_root(
            T_LOW_FRAC * cfg.T, lam, p.a, p.h, coeffs.alpha, coeffs.beta, R,
            cfg.T, cfg.B, cfg.N0, cfg.eta, cfg.c, T_TOL_FRAC * cfg.T, MAX_ITER,
        )
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from None
    if t >= cfg.T:
        return cfg.T
    res = stationarity_residual(t, lam, p, coeffs, R, cfg)
    if abs(res) > tol:
        if res > 0.0 and t <= T_LOW_FRAC * cfg.T * 2.0:
            return t  # root below the clamp, residual positive everywhere
        raise ConvergenceError(
            f"duration bisection left residual {res:.3e} above tolerance {tol:.1e}"
        )
    return t


def power_from_time(
    t: float,
    p: SensorProfile,
    coeffs: DerivedCoeffs,
    R: float,
    cfg: SystemConfig,
) -> float:
    """Beam power that exactly funds a sensor transmitting for ``t`` seconds
    (zero at t = T: nothing sensed, nothing sent)."""
    if t <= 0.0:
        raise ValueError("transmission duration must be positive")
    return (
        _kernels.pa_energy(t, p.h, coeffs.alpha, coeffs.beta, R, cfg.T, cfg.B, cfg.N0, cfg.eta)
        / cfg.T0
    )


def total_energy(
    ts: Sequence[float],
    profiles: Sequence[SensorProfile],
    coeffs: Sequence[DerivedCoeffs],
    ratios: Sequence[float],
    cfg: SystemConfig,
) -> float:
    """Sum of AP-side energies for given transmission durations (J)."""
    total = 0.0
    for t, p, co, R in zip(ts, profiles, coeffs, ratios):
        if t <= 0.0:
            raise ValueError("transmission duration must be positive")
        total += _kernels.pa_energy(t, p.h, co.alpha, co.beta, R, cfg.T, cfg.B, cfg.N0, cfg.eta)
    return total


def solve_lambda(
    profiles: Sequence[SensorProfile],
    coeffs: Sequence[DerivedCoeffs],
    ratios: Sequence[float],
    cfg: SystemConfig,
    tol: float = 1e-12,
) -> PaSolution:
    """Solve the fixed-ratio allocation problem by nested bisection.

    The dual starts at zero; if the unconstrained durations already fit the
    power budget that is the answer, otherwise the dual is bisected below the
    largest priority until the spent energy matches the budget within
    ``tol`` relative (or double precision runs out).  Always feasible: the
    empty allocation costs nothing.
    """
    n = len(profiles)
    if n == 0:
        raise ValueError("sensor set must be nonempty")
    a = np.array([p.a for p in profiles])
    h = np.array([p.h for p in profiles])
    alpha = np.array([co.alpha for co in coeffs])
    beta = np.array([co.beta for co in coeffs])
    R = np.asarray(ratios, dtype=np.float64)

    try:
        lam, ts = _kernels.pa_solve(
            a, h, alpha, beta, R, cfg.T, cfg.B, cfg.N0, cfg.eta, cfg.c,
            cfg.P0 * cfg.T0, tol, T_LOW_FRAC * cfg.T, T_TOL_FRAC * cfg.T, MAX_ITER,
        )
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from None
    ts = np.asarray(ts)

    priorities = np.array(
        [_kernels.pa_priority(a[i], h[i], alpha[i], R[i], cfg.B, cfg.N0, cfg.eta, cfg.c)
         for i in range(n)]
    )
    selected = priorities > lam
    raw_bits = np.where(selected, (cfg.T - ts) / beta, 0.0)
    powers = np.array(
        [
            _kernels.pa_energy(ts[i], h[i], alpha[i], beta[i], R[i],
                               cfg.T, cfg.B, cfg.N0, cfg.eta) / cfg.T0
            if selected[i]
            else 0.0
            for i in range(n)
        ]
    )
    return PaSolution(
        t_tx=ts, lam=lam, powers=powers, raw_bits=raw_bits,
        priorities=priorities, selected=selected,
    )
