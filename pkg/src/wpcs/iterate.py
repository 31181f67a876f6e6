"""Block-coordinate ascent on the operator's reward.

Alternates two exact subproblem solves until the reward settles: the
fixed-ratio allocation (power, data sizes, durations) and the fixed-size
compression-ratio selection.  Each step can only raise the reward, so the
trace is a non-decreasing sequence converging to a coordinate-wise optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import comp_solver, pa_solver
from .model import (
    Allocation,
    ConvergenceError,
    SensorProfile,
    SolveReport,
    SystemConfig,
    compression_cycles,
    derived_coeffs,
    operator_reward,
    utility,
)

# allowed backwards drift per ascent step before it is flagged as a breach
_MONOTONE_RTOL = 1e-9
_MONOTONE_ATOL = 1e-15


@dataclass(frozen=True)
class IterateConfig:
    """Knobs of the alternating loop: starting ratio(s), relative reward
    tolerance and the iteration cap."""

    init_ratio: float | Sequence[float] = 1.5
    rel_tol: float = 1e-6
    max_iters: int = 50

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise ValueError("IterateConfig.rel_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("IterateConfig.max_iters must be >= 1")


@dataclass
class IterState:
    """One point of the alternating iteration; step functions return new
    states and never mutate their input."""

    profiles: Sequence[SensorProfile]
    cfg: SystemConfig
    ratios: np.ndarray
    raw_bits: np.ndarray
    t_tx: np.ndarray
    powers: np.ndarray
    lam: float
    kkt_residual: float
    reward: float
    utility: float
    energy_cost: float


def initial_state(
    profiles: Sequence[SensorProfile], cfg: SystemConfig, ratios: np.ndarray
) -> IterState:
    """All-idle starting point at the given compression ratios."""
    n = len(profiles)
    return IterState(
        profiles=profiles,
        cfg=cfg,
        ratios=ratios.copy(),
        raw_bits=np.zeros(n),
        t_tx=np.full(n, cfg.T),
        powers=np.zeros(n),
        lam=0.0,
        kkt_residual=0.0,
        reward=0.0,
        utility=0.0,
        energy_cost=0.0,
    )


def step_pa(state: IterState) -> IterState:
    """Re-solve power allocation, data sizes and durations at the current
    compression ratios."""
    profiles, cfg = state.profiles, state.cfg
    coeffs = [derived_coeffs(p, R) for p, R in zip(profiles, state.ratios)]
    sol = pa_solver.solve_lambda(profiles, coeffs, state.ratios, cfg)
    util = utility((p.a, ell) for p, ell in zip(profiles, sol.raw_bits))
    reward = operator_reward(util, sol.powers, cfg)
    kkt = 0.0
    for i, p in enumerate(profiles):
        if sol.selected[i]:
            res = pa_solver.stationarity_residual(
                sol.t_tx[i], sol.lam, p, coeffs[i], state.ratios[i], cfg
            )
            kkt = max(kkt, abs(res))
    return replace(
        state,
        raw_bits=sol.raw_bits,
        t_tx=sol.t_tx,
        powers=sol.powers,
        lam=sol.lam,
        kkt_residual=kkt,
        reward=reward,
        utility=util,
        energy_cost=util - reward,
    )


def step_comp(state: IterState) -> IterState:
    """Re-select every participating sensor's compression ratio at its
    current data size, shrinking the energy bill at constant utility.
    Deselected sensors fall back to ratio 1."""
    profiles, cfg = state.profiles, state.cfg
    n = len(profiles)
    ratios = state.ratios.copy()
    t_tx = state.t_tx.copy()
    powers = state.powers.copy()
    for i, p in enumerate(profiles):
        if state.raw_bits[i] > 0.0:
            cs = comp_solver.optimal_ratio(state.raw_bits[i], p, cfg)
            ratios[i] = cs.ratio
            t_tx[i] = cs.t_tx
            powers[i] = cs.min_energy / (cfg.eta * p.h * cfg.T0)
        else:
            ratios[i] = 1.0
            t_tx[i] = cfg.T
            powers[i] = 0.0
    reward = operator_reward(state.utility, powers, cfg)
    return replace(
        state,
        ratios=ratios,
        t_tx=t_tx,
        powers=powers,
        reward=reward,
        energy_cost=state.utility - reward,
    )


def _check_ascent(prev: float, new: float) -> None:
    if new < prev - max(_MONOTONE_RTOL * abs(prev), _MONOTONE_ATOL):
        raise ConvergenceError(
            f"reward decreased from {prev!r} to {new!r} during an ascent step"
        )


def build_allocations(state: IterState) -> list[Allocation]:
    """Physical per-sensor schedule of the current state (idle sensors get
    all-zero rows)."""
    allocs = []
    for i, p in enumerate(state.profiles):
        ell = float(state.raw_bits[i])
        if ell > 0.0:
            R = float(state.ratios[i])
            allocs.append(
                Allocation(
                    power=float(state.powers[i]),
                    raw_bits=ell,
                    ratio=R,
                    t_sense=ell / p.s,
                    t_comp=ell * compression_cycles(R, p.epsilon) / p.f_cpu,
                    t_tx=float(state.t_tx[i]),
                    selected=True,
                )
            )
        else:
            allocs.append(
                Allocation(
                    power=0.0, raw_bits=0.0, ratio=float(state.ratios[i]),
                    t_sense=0.0, t_comp=0.0, t_tx=0.0, selected=False,
                )
            )
    return allocs


def solve_p1(
    profiles: Sequence[SensorProfile],
    cfg: SystemConfig,
    icfg: IterateConfig = IterateConfig(),
) -> tuple[list[Allocation], SolveReport]:
    """Full joint solve: alternate the two subproblems from the configured
    starting ratios until the reward change falls below rel_tol (or the
    iteration cap is hit), then report the last fixed-ratio optimum.

    The reward trace holds one entry per half-step and never decreases; a
    decrease beyond rounding raises ConvergenceError since it would disprove
    the ascent property the loop relies on.
    """
    n = len(profiles)
    if n == 0:
        raise ValueError("sensor set must be nonempty")
    ratios = np.broadcast_to(
        np.asarray(icfg.init_ratio, dtype=np.float64), (n,)
    ).astype(np.float64)
    for i, p in enumerate(profiles):
        if not 1.0 <= ratios[i] <= p.R_max:
            raise ValueError(
                f"init_ratio {ratios[i]} outside [1, {p.R_max}] for sensor {i}"
            )

    trace: list[float] = []
    state = step_pa(initial_state(profiles, cfg, ratios))
    trace.append(state.reward)

    iterations = 0
    prev_reward = state.reward
    for _ in range(icfg.max_iters):
        after_comp = step_comp(state)
        _check_ascent(state.reward, after_comp.reward)
        trace.append(after_comp.reward)

        state = step_pa(after_comp)
        _check_ascent(after_comp.reward, state.reward)
        trace.append(state.reward)

        iterations += 1
        if abs(state.reward - prev_reward) <= icfg.rel_tol * abs(state.reward):
            break
        prev_reward = state.reward

    report = SolveReport(
        reward=state.reward,
        utility=state.utility,
        energy_cost=state.energy_cost,
        lam=state.lam,
        kkt_residual=state.kkt_residual,
        iterations=iterations,
        trace=trace,
    )
    return build_allocations(state), report
