"""Domain types and closed-form physics of the wirelessly powered crowd
sensing (WPCS) system.

Everything here is a pure function of its inputs: the access point beams
power to sensors for ``T0`` seconds, each sensor spends the crowd-sensing
window ``T`` on sensing, lossless compression and transmission, and the
operator's reward is the logarithmic data utility minus the priced energy
bill.  All quantities are SI (s, W, J, bit, Hz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

LN2 = math.log(2.0)

# 2**u overflows double beyond ~1024; above this the sign analysis of every
# caller is already decided, so we pin the result to +inf.
_EXP2_MAX = 1020.0


class ConvergenceError(RuntimeError):
    """A bisection or the block-coordinate loop exhausted its iteration cap."""


class InfeasibleError(ValueError):
    """The requested operating point cannot be scheduled inside ``T``."""


def exp2_or_inf(u: float) -> float:
    """2**u, saturating to +inf instead of overflowing."""
    if u > _EXP2_MAX:
        return math.inf
    return 2.0 ** u


@dataclass(frozen=True)
class SystemConfig:
    """Access-point side and global constants.

    P0    AP transmit power budget (W)
    T0    wireless power transfer duration (s)
    T     crowd-sensing duration (s)
    B     per-sensor bandwidth (Hz)
    N0    channel noise variance (W)
    eta   energy conversion efficiency, in (0, 1)
    c     price of unit energy relative to unit utility (1/J)
    """

    P0: float
    T0: float
    T: float
    B: float
    N0: float
    eta: float
    c: float

    def __post_init__(self) -> None:
        for name in ("P0", "T0", "T", "B", "N0", "eta", "c"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"SystemConfig.{name} must be strictly positive")
        if not self.eta < 1.0:
            raise ValueError("SystemConfig.eta must be in (0, 1)")


@dataclass(frozen=True)
class SensorProfile:
    """Per-sensor physical parameters.

    h        effective channel gain (power gain, dimensionless)
    a        utility weight
    s        sensing output rate (bit/s)
    f_cpu    CPU-cycle frequency (cycles/s)
    q_r      reward energy per raw bit (J/bit)
    q_s      sensing energy per raw bit (J/bit)
    q_c      compression energy per CPU cycle (J/cycle)
    epsilon  compression-method constant
    R_max    maximum compression ratio, >= 1
    """

    h: float
    a: float
    s: float
    f_cpu: float
    q_r: float
    q_s: float
    q_c: float
    epsilon: float
    R_max: float

    def __post_init__(self) -> None:
        for name in ("h", "s", "f_cpu", "q_r", "q_s", "q_c", "epsilon", "R_max"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"SensorProfile.{name} must be strictly positive")
        # a = 0 is a worthless but physically valid sensor (never selected)
        if self.a < 0.0:
            raise ValueError("SensorProfile.a must be nonnegative")
        if self.R_max < 1.0:
            raise ValueError("SensorProfile.R_max must be >= 1")


@dataclass(frozen=True)
class DerivedCoeffs:
    """Per-raw-bit energy (``alpha``, J/bit) and time (``beta``, s/bit) at a
    fixed compression ratio."""

    alpha: float
    beta: float


@dataclass
class Allocation:
    """Per-sensor decision variables: WPT beam power, raw data size,
    compression ratio and the three slot durations."""

    power: float
    raw_bits: float
    ratio: float
    t_sense: float
    t_comp: float
    t_tx: float
    selected: bool


@dataclass
class SolveReport:
    """Outcome summary of a solve: objective split, the power-budget dual
    variable, the worst stationarity residual and the reward trace."""

    reward: float
    utility: float
    energy_cost: float
    lam: float
    kkt_residual: float
    iterations: int
    trace: list[float] = field(default_factory=list)


def compression_cycles(R: float, epsilon: float) -> float:
    """CPU cycles needed to compress one raw bit at ratio ``R``:
    exp(epsilon*R) - exp(epsilon).  Zero at R=1, strictly increasing."""
    if R < 1.0:
        raise ValueError("compression ratio must be >= 1")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    return math.exp(epsilon * R) - math.exp(epsilon)


def rate_energy_f(x: float, B: float, N0: float) -> float:
    """Transmit power (W) needed to sustain rate ``x`` bit/s over bandwidth
    ``B`` with noise ``N0``: N0*(2**(x/B) - 1).  Convex, f(0)=0."""
    if x < 0.0:
        raise ValueError("rate must be nonnegative")
    return N0 * (exp2_or_inf(x / B) - 1.0)


def rate_energy_fprime(x: float, B: float, N0: float) -> float:
    """Derivative of rate_energy_f: N0*ln2/B * 2**(x/B)."""
    if x < 0.0:
        raise ValueError("rate must be nonnegative")
    return N0 * LN2 / B * exp2_or_inf(x / B)


def g_func(x: float, B: float, N0: float) -> float:
    """f(x) - x*f'(x); zero at the origin, strictly decreasing, negative for
    x > 0.  Measures the marginal saving of stretching a transmission."""
    if x < 0.0:
        raise ValueError("rate must be nonnegative")
    p = exp2_or_inf(x / B)
    if math.isinf(p):
        return -math.inf
    return N0 * ((1.0 - x * LN2 / B) * p - 1.0)


def y_func(x: float, R: float, beta: float, B: float, N0: float) -> float:
    """f(x) - (x + 1/(R*beta))*f'(x), the transmission term of the
    reward-stationarity condition; equals g(x) - f'(x)/(R*beta)."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if x < 0.0:
        raise ValueError("rate must be nonnegative")
    p = exp2_or_inf(x / B)
    if math.isinf(p):
        return -math.inf
    return N0 * ((1.0 - (x + 1.0 / (R * beta)) * LN2 / B) * p - 1.0)


def derived_coeffs(p: SensorProfile, R: float) -> DerivedCoeffs:
    """Collapse sensing + compression of one raw bit into the coefficients
    alpha (J/bit) and beta (s/bit) for a fixed ratio ``R``."""
    if not 1.0 <= R <= p.R_max:
        raise ValueError(f"ratio {R} outside [1, {p.R_max}]")
    cyc = compression_cycles(R, p.epsilon)
    return DerivedCoeffs(
        alpha=p.q_r + p.q_s + p.q_c * cyc,
        beta=1.0 / p.s + cyc / p.f_cpu,
    )


def sensor_energies(
    p: SensorProfile, alloc: Allocation, cfg: SystemConfig
) -> tuple[float, float, float, float]:
    """Split a sensor's energy bill into reward, sensing, compression and
    transmission parts (J).  Transmission sends the compressed size
    raw_bits/ratio over ``t_tx``."""
    ell = alloc.raw_bits
    if ell == 0.0:
        return (0.0, 0.0, 0.0, 0.0)
    if alloc.t_tx <= 0.0:
        raise InfeasibleError("positive data size with zero transmission time")
    cyc = compression_cycles(alloc.ratio, p.epsilon)
    e_r = p.q_r * ell
    e_s = p.q_s * ell
    e_c = p.q_c * ell * cyc
    e_t = alloc.t_tx / p.h * rate_energy_f(ell / alloc.ratio / alloc.t_tx, cfg.B, cfg.N0)
    return (e_r, e_s, e_c, e_t)


def utility(sensors: Iterable[tuple[float, float]], b: Sequence[float] | None = None) -> float:
    """Sum data utility: sum of a*log(1 + b*raw_bits) over (a, raw_bits)
    pairs.  Natural log; the per-sensor scale ``b`` defaults to 1."""
    pairs = list(sensors)
    if b is None:
        b = [1.0] * len(pairs)
    return sum(a * math.log1p(bn * ell) for (a, ell), bn in zip(pairs, b))


def operator_reward(util: float, powers: Iterable[float], cfg: SystemConfig) -> float:
    """Operator's objective: data utility minus c * T0 * total beam power."""
    return util - cfg.c * cfg.T0 * sum(powers)


def constraint_residuals(
    allocs: Sequence[Allocation],
    profiles: Sequence[SensorProfile],
    cfg: SystemConfig,
) -> tuple[list[float], list[float], float]:
    """Slack (RHS - LHS) of the time, energy and power constraints.

    Feasible iff every slack is >= -tolerance.  The energy left-hand side is
    re-derived from the physical model rather than read off the allocation,
    so it double-checks solver outputs.
    """
    time_slack = []
    energy_slack = []
    total_power = 0.0
    for alloc, p in zip(allocs, profiles):
        time_slack.append(cfg.T - (alloc.t_sense + alloc.t_comp + alloc.t_tx))
        if alloc.raw_bits > 0.0:
            e_r, e_s, e_c, e_t = sensor_energies(p, alloc, cfg)
            lhs = e_r + e_s + e_c + e_t
        else:
            lhs = 0.0
        energy_slack.append(cfg.eta * alloc.power * p.h * cfg.T0 - lhs)
        total_power += alloc.power
    return time_slack, energy_slack, cfg.P0 - total_power
