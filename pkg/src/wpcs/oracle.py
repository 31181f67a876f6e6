"""Independent validation of solver outputs.

Brute-force grid search over the convex subproblems plus finite-difference
audits of the structural claims the solvers rely on (convexity, monotone
stationarity functions, tight constraints, dual-threshold selection).  All
grid evaluation is written directly against the physical model with numpy,
deliberately not sharing code with the bisection kernels it checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import comp_solver, pa_solver
from .model import (
    DerivedCoeffs,
    SensorProfile,
    SystemConfig,
    g_func,
    rate_energy_fprime,
)

MAX_GRID_SENSORS = 3


@dataclass(frozen=True)
class GridSpec:
    """Rectangular search grid: one (name, lower, upper) triple per axis."""

    points_per_axis: int
    axes: tuple[tuple[str, float, float], ...]

    def __post_init__(self) -> None:
        if self.points_per_axis < 2:
            raise ValueError("GridSpec.points_per_axis must be >= 2")
        for name, lo, hi in self.axes:
            if not lo < hi:
                raise ValueError(f"GridSpec axis {name}: lower must be < upper")


@dataclass
class CheckResult:
    """One audited condition: the measured worst case, its pass limit and
    the verdict."""

    name: str
    value: float
    limit: float
    passed: bool


@dataclass
class AuditReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def _ap_energy(
    t: np.ndarray, p: SensorProfile, co: DerivedCoeffs, R: float, cfg: SystemConfig
) -> np.ndarray:
    """Vectorized AP-side energy of one sensor over a duration grid."""
    with np.errstate(over="ignore"):
        x = (cfg.T - t) / (R * co.beta * t)
        f = cfg.N0 * (np.exp2(x / cfg.B) - 1.0)
        return co.alpha * (cfg.T - t) / (cfg.eta * co.beta * p.h) + t / (
            cfg.eta * p.h * p.h
        ) * f


def grid_best_p2(
    profiles: Sequence[SensorProfile],
    coeffs: Sequence[DerivedCoeffs],
    ratios: Sequence[float],
    cfg: SystemConfig,
    grid: GridSpec,
) -> tuple[np.ndarray, float]:
    """Exhaustive search of the fixed-ratio reward over a duration grid.

    Returns the best feasible grid point (power budget enforced) and its
    reward.  Capped at three sensors; the all-idle corner is always feasible.
    """
    n = len(profiles)
    if n > MAX_GRID_SENSORS:
        raise ValueError(f"grid oracle supports at most {MAX_GRID_SENSORS} sensors")
    if len(grid.axes) != n:
        raise ValueError("grid must have one axis per sensor")
    axes = [
        np.linspace(lo, hi, grid.points_per_axis) for (_, lo, hi) in grid.axes
    ]
    utils = []
    energies = []
    for t, p, co, R in zip(axes, profiles, coeffs, ratios):
        utils.append(p.a * np.log1p((cfg.T - t) / co.beta))
        energies.append(_ap_energy(t, p, co, R, cfg))
    shape = [grid.points_per_axis] * n
    total_u = np.zeros(shape)
    total_e = np.zeros(shape)
    for i in range(n):
        expand = [None] * n
        expand[i] = slice(None)
        total_u = total_u + utils[i][tuple(expand)]
        total_e = total_e + energies[i][tuple(expand)]
    reward = total_u - cfg.c * total_e
    reward[total_e > cfg.P0 * cfg.T0] = -np.inf
    flat = int(np.argmax(reward))
    idx = np.unravel_index(flat, shape)
    best_t = np.array([axes[i][idx[i]] for i in range(n)])
    return best_t, float(reward[idx])


def grid_best_p1b(
    raw_bits: float,
    profile: SensorProfile,
    cfg: SystemConfig,
    grid: GridSpec,
) -> tuple[float, float, float]:
    """Exhaustive search of the per-sensor energy bill over a ratio grid,
    transmission stretched to fill the window (never worse for fixed ratio).

    Returns (ratio, duration, energy) at the best feasible grid point."""
    if raw_bits <= 0.0:
        raise ValueError("raw_bits must be positive")
    (_, lo, hi) = grid.axes[0]
    Rs = np.linspace(lo, hi, grid.points_per_axis)
    cyc = np.exp(profile.epsilon * Rs) - np.exp(profile.epsilon)
    d = cfg.T / raw_bits - 1.0 / profile.s - cyc / profile.f_cpu
    feasible = d > 0.0
    if not feasible.any():
        raise ValueError("no feasible ratio on the grid")
    Rs, cyc, d = Rs[feasible], cyc[feasible], d[feasible]
    t = d * raw_bits
    with np.errstate(over="ignore"):
        x = 1.0 / (d * Rs)
        energy = (profile.q_r + profile.q_s + profile.q_c * cyc) * raw_bits + (
            t / profile.h
        ) * cfg.N0 * (np.exp2(x / cfg.B) - 1.0)
    k = int(np.argmin(energy))
    return float(Rs[k]), float(t[k]), float(energy[k])


def convexity_audit(
    fn: Callable[[float], float],
    interval: tuple[float, float],
    samples: int,
    name: str = "convexity",
) -> CheckResult:
    """Second-difference scan of a scalar curve; passes when the most
    negative second difference stays above -1e-12 of the curve's scale."""
    if samples < 3:
        raise ValueError("need at least 3 samples for second differences")
    xs = np.linspace(interval[0], interval[1], samples)
    vals = np.array([fn(float(x)) for x in xs])
    # curves diverging at the left end overflow to +inf there; scan the
    # finite tail (contiguous, so spacing stays uniform)
    finite = np.isfinite(vals)
    first = int(np.argmax(finite))
    if not finite.any() or not finite[first:].all() or finite[first:].sum() < 3:
        return CheckResult(name=name, value=float("nan"), limit=0.0, passed=False)
    vals = vals[first:]
    d2 = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
    scale = float(np.max(np.abs(vals)))
    limit = -1e-12 * max(scale, 1e-300)
    worst = float(np.min(d2))
    return CheckResult(name=name, value=worst, limit=limit, passed=bool(worst >= limit))


def _kkt_audit_pa(
    sol: pa_solver.PaSolution,
    profiles: Sequence[SensorProfile],
    coeffs: Sequence[DerivedCoeffs],
    ratios: Sequence[float],
    cfg: SystemConfig,
) -> AuditReport:
    checks = []
    budget = cfg.P0 * cfg.T0

    worst_interior = 0.0
    worst_boundary = -np.inf
    scale = 1.0
    for i, (p, co, R) in enumerate(zip(profiles, coeffs, ratios)):
        res = pa_solver.stationarity_residual(
            float(sol.t_tx[i]), sol.lam, p, co, R, cfg
        )
        term = p.a / (co.beta + (cfg.T - sol.t_tx[i])) if p.a > 0 else 0.0
        scale = max(
            scale, abs(term), (sol.lam + cfg.c) * co.alpha / (cfg.eta * p.h * co.beta)
        )
        if sol.selected[i]:
            worst_interior = max(worst_interior, abs(res))
        else:
            worst_boundary = max(worst_boundary, res)
    checks.append(
        CheckResult(
            "stationarity_interior",
            worst_interior,
            1e-6 * scale,
            worst_interior <= 1e-6 * scale,
        )
    )
    if np.isfinite(worst_boundary):
        limit = 1e-9 * scale
        checks.append(
            CheckResult(
                "stationarity_boundary_sign",
                worst_boundary,
                limit,
                worst_boundary <= limit,
            )
        )

    spent = pa_solver.total_energy(sol.t_tx, profiles, coeffs, ratios, cfg)
    checks.append(
        CheckResult(
            "primal_power_budget",
            spent - budget,
            1e-9 * budget,
            spent - budget <= 1e-9 * budget,
        )
    )
    t_breach = max(float(np.max(sol.t_tx)) - cfg.T, -float(np.min(sol.t_tx)), 0.0)
    checks.append(CheckResult("primal_durations", t_breach, 0.0, t_breach <= 0.0))
    slack = sol.lam * abs(budget - spent)
    checks.append(
        CheckResult(
            "complementary_slackness", slack, 1e-6 * budget, slack <= 1e-6 * budget
        )
    )
    checks.append(CheckResult("dual_sign", sol.lam, 0.0, sol.lam >= 0.0))
    return AuditReport(checks)


def _kkt_audit_comp(
    sol: comp_solver.CompSolution,
    raw_bits: float,
    profile: SensorProfile,
    cfg: SystemConfig,
) -> AuditReport:
    checks = []
    d = comp_solver.d_func(sol.ratio, raw_bits, profile, cfg)
    checks.append(CheckResult("feasible_ratio", d, 0.0, d > 0.0))

    gap = abs(
        sol.t_tx
        + raw_bits / profile.s
        + raw_bits
        * (np.exp(profile.epsilon * sol.ratio) - np.exp(profile.epsilon))
        / profile.f_cpu
        - cfg.T
    )
    checks.append(
        CheckResult("full_window_use", gap, 1e-9 * cfg.T, gap <= 1e-9 * cfg.T)
    )

    x = 1.0 / (d * sol.ratio)
    term1 = abs(
        (profile.q_c - g_func(x, cfg.B, cfg.N0) / (profile.h * profile.f_cpu))
        * profile.epsilon
        * np.exp(profile.epsilon * sol.ratio)
    )
    term2 = abs(
        rate_energy_fprime(x, cfg.B, cfg.N0) / (profile.h * sol.ratio**2)
    )
    zscale = max(term1, term2)
    z = comp_solver.z_func(sol.ratio, raw_bits, profile, cfg)
    step_up = sol.ratio * (1.0 + 2e-9)
    at_feasibility_edge = (
        step_up <= profile.R_max
        and comp_solver.d_func(step_up, raw_bits, profile, cfg) <= 0.0
    )
    if sol.ratio <= 1.0 + 1e-12:
        checks.append(
            CheckResult("boundary_low_sign", z, -1e-9 * zscale, z >= -1e-9 * zscale)
        )
    elif sol.ratio >= profile.R_max * (1.0 - 1e-12) or at_feasibility_edge:
        checks.append(
            CheckResult("boundary_high_sign", z, 1e-9 * zscale, z <= 1e-9 * zscale)
        )
    else:
        checks.append(
            CheckResult(
                "stationarity_root", abs(z), 1e-6 * zscale, abs(z) <= 1e-6 * zscale
            )
        )
    return AuditReport(checks)


def kkt_audit(solution, *args) -> AuditReport:
    """Residual report of the first-order optimality system for a completed
    fixed-ratio solve (PaSolution) or ratio selection (CompSolution)."""
    if isinstance(solution, pa_solver.PaSolution):
        return _kkt_audit_pa(solution, *args)
    if isinstance(solution, comp_solver.CompSolution):
        return _kkt_audit_comp(solution, *args)
    raise TypeError(f"no KKT audit for {type(solution).__name__}")
