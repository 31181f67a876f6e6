"""Per-sensor compression-ratio selection at fixed sensing-data size.

With the raw-data size frozen, a sensor minimizes its own energy bill by
trading compression cycles against transmission effort.  The whole sensing
window is always used up (stretching the transmission only ever helps), which
leaves a single unknown: the ratio, found by bisecting a monotone
stationarity function over the feasible range.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .model import (
    ConvergenceError,
    InfeasibleError,
    SensorProfile,
    SystemConfig,
    compression_cycles,
    rate_energy_f,
)

R_TOL = 1e-10
MAX_ITER = 200


@dataclass
class CompSolution:
    """Energy-minimal compression choice for one sensor: ratio, transmission
    duration under full window use, the resulting energy and the stationarity
    value at the returned ratio."""

    ratio: float
    t_tx: float
    min_energy: float
    root_residual: float


def d_func(R: float, raw_bits: float, p: SensorProfile, cfg: SystemConfig) -> float:
    """Transmission time remaining per raw bit once sensing and compressing
    at ratio ``R`` are scheduled; nonpositive values flag an infeasible R."""
    if raw_bits <= 0.0:
        raise ValueError("raw_bits must be positive")
    if R < 1.0:
        raise ValueError("compression ratio must be >= 1")
    return _kernels.cr_d(R, raw_bits, cfg.T, p.s, p.f_cpu, p.epsilon)


def z_func(R: float, raw_bits: float, p: SensorProfile, cfg: SystemConfig) -> float:
    """Stationarity function of the energy bill in the ratio, evaluated on
    the full-window-utilization curve; strictly increasing in R."""
    if d_func(R, raw_bits, p, cfg) <= 0.0:
        raise ValueError(f"ratio {R} leaves no transmission time (infeasible)")
    return _kernels.cr_z(
        R, raw_bits, cfg.T, p.s, p.f_cpu, p.q_c, p.h, cfg.B, cfg.N0, p.epsilon
    )


def p1b_objective(
    R: float, t: float, raw_bits: float, p: SensorProfile, cfg: SystemConfig
) -> float:
    """Sensor-side energy (J) of compressing ``raw_bits`` at ratio ``R`` and
    transmitting the compressed size over ``t`` seconds."""
    if t <= 0.0:
        raise ValueError("transmission duration must be positive")
    if R < 1.0:
        raise ValueError("compression ratio must be >= 1")
    if raw_bits == 0.0:
        return 0.0
    cyc = compression_cycles(R, p.epsilon)
    per_bit = p.q_r + p.q_s + p.q_c * cyc
    return per_bit * raw_bits + t / p.h * rate_energy_f(raw_bits / (R * t), cfg.B, cfg.N0)


def optimal_ratio(
    raw_bits: float, p: SensorProfile, cfg: SystemConfig, tol: float = R_TOL
) -> CompSolution:
    """Energy-minimal compression ratio for a fixed raw-data size.

    Bisects the monotone stationarity function and clamps at 1, at R_max, or
    just inside the point where compression alone would exhaust the window.
    ``tol`` is the bisection tolerance on the ratio.  Nothing to do when
    raw_bits = 0; raises InfeasibleError when even uncompressed data cannot
    be sensed within the window.
    """
    if raw_bits < 0.0:
        raise ValueError("raw_bits must be nonnegative")
    if raw_bits == 0.0:
        return CompSolution(ratio=1.0, t_tx=cfg.T, min_energy=0.0, root_residual=0.0)
    if d_func(1.0, raw_bits, p, cfg) <= 0.0:
        raise InfeasibleError(
            f"sensing {raw_bits:.6g} bits alone does not fit in the window T={cfg.T}"
        )
    try:
        ratio = _kernels.cr_root(
            raw_bits, cfg.T, p.s, p.f_cpu, p.q_c, p.h, cfg.B, cfg.N0,
            p.epsilon, p.R_max, tol, MAX_ITER,
        )
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from None
    t_tx = (
        cfg.T
        - raw_bits * compression_cycles(ratio, p.epsilon) / p.f_cpu
        - raw_bits / p.s
    )
    return CompSolution(
        ratio=ratio,
        t_tx=t_tx,
        min_energy=p1b_objective(ratio, t_tx, raw_bits, p, cfg),
        root_residual=z_func(ratio, raw_bits, p, cfg),
    )
