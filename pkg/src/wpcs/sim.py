"""Scenario sampling, baseline policies and parameter sweeps.

Scenarios follow the reference numerical setup: Rayleigh-faded channels
(unit-mean exponential power gains scaled to the average attenuation) and
uniformly drawn per-sensor rates and energy prices.  Sweeps are paired: one
RNG stream per trial, spawned from the root seed, so the same sensor
population is reused across every axis point and policy, and adding trials
never reshuffles earlier ones.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from . import iterate
from .model import SensorProfile, SolveReport, SystemConfig

DEFAULT_POLICIES = ("optimal", "fcr:1.5", "no_compression")


@dataclass(frozen=True)
class ScenarioSpec:
    """Distribution of a random scenario plus the fixed system constants."""

    n_sensors: int = 10
    seed: int = 0
    attenuation_mean: float = 1e-3
    s_range: tuple[float, float] = (1e4, 1e5)
    q_s_range: tuple[float, float] = (1e-12, 1e-11)
    q_c_range: tuple[float, float] = (1e-14, 1e-13)
    q_r_range: tuple[float, float] = (1e-12, 1e-11)
    f_cpu_range: tuple[float, float] = (1e8, 1e9)
    a: float = 0.04
    c: float = 0.6
    B: float = 1e4
    N0: float = 1e-9
    epsilon: float = 4.0
    R_max: float = 3.0
    eta: float = 0.5
    T0: float = 1.0
    P0: float = 1.0
    T: float = 1.0

    def __post_init__(self) -> None:
        if self.n_sensors < 1:
            raise ValueError("ScenarioSpec.n_sensors must be >= 1")
        for name in ("s_range", "q_s_range", "q_c_range", "q_r_range", "f_cpu_range"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi):
                raise ValueError(f"ScenarioSpec.{name} must be a positive interval")
        if self.attenuation_mean <= 0.0:
            raise ValueError("ScenarioSpec.attenuation_mean must be positive")

    def system(self) -> SystemConfig:
        return SystemConfig(
            P0=self.P0, T0=self.T0, T=self.T, B=self.B, N0=self.N0,
            eta=self.eta, c=self.c,
        )


def sample_scenario(
    spec: ScenarioSpec, rng: np.random.Generator | None = None
) -> tuple[SystemConfig, list[SensorProfile]]:
    """Draw one scenario. The draw order (h, s, q_s, q_c, q_r, f_cpu) is part
    of the determinism contract: same seed, same scenario."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n = spec.n_sensors
    h = spec.attenuation_mean * rng.exponential(1.0, n)
    s = rng.uniform(*spec.s_range, n)
    q_s = rng.uniform(*spec.q_s_range, n)
    q_c = rng.uniform(*spec.q_c_range, n)
    q_r = rng.uniform(*spec.q_r_range, n)
    f_cpu = rng.uniform(*spec.f_cpu_range, n)
    profiles = [
        SensorProfile(
            h=float(h[i]), a=spec.a, s=float(s[i]), f_cpu=float(f_cpu[i]),
            q_r=float(q_r[i]), q_s=float(q_s[i]), q_c=float(q_c[i]),
            epsilon=spec.epsilon, R_max=spec.R_max,
        )
        for i in range(n)
    ]
    return spec.system(), profiles


def parse_policy(policy: str) -> tuple[str, float]:
    """Split a policy label into (kind, fixed ratio); the ratio only matters
    for the fixed-compression policy ("fcr" or "fcr:<R>")."""
    if policy == "optimal":
        return "optimal", 0.0
    if policy == "no_compression":
        return "no_compression", 1.0
    if policy == "fcr":
        return "fcr", 1.5
    if policy.startswith("fcr:"):
        return "fcr", float(policy.split(":", 1)[1])
    raise ValueError(f"unknown policy {policy!r}")


def _fixed_ratio_report(
    profiles: Sequence[SensorProfile], cfg: SystemConfig, ratio: float
) -> SolveReport:
    state = iterate.step_pa(
        iterate.initial_state(profiles, cfg, np.full(len(profiles), ratio))
    )
    return SolveReport(
        reward=float(state.reward),
        utility=float(state.utility),
        energy_cost=float(state.energy_cost),
        lam=float(state.lam),
        kkt_residual=float(state.kkt_residual),
        iterations=1,
        trace=[float(state.reward)],
    )


def run_policy(
    policy: str,
    scenario: tuple[SystemConfig, Sequence[SensorProfile]],
    icfg: iterate.IterateConfig | None = None,
) -> SolveReport:
    """Solve one scenario under a policy: the full alternating optimization,
    a fixed compression ratio, or no compression at all."""
    cfg, profiles = scenario
    kind, ratio = parse_policy(policy)
    if kind == "optimal":
        _, report = iterate.solve_p1(profiles, cfg, icfg or iterate.IterateConfig())
        return report
    if kind == "no_compression":
        return _fixed_ratio_report(profiles, cfg, 1.0)
    return _fixed_ratio_report(profiles, cfg, ratio)


@dataclass
class SweepResult:
    """Per-policy mean rewards with standard errors along one swept axis."""

    axis: str
    values: list[float]
    policies: list[str]
    mean_reward: np.ndarray
    stderr: np.ndarray
    trials: int

    def rows(self) -> Iterator[tuple[float, str, float, float, int]]:
        for vi, v in enumerate(self.values):
            for pi, pol in enumerate(self.policies):
                yield v, pol, float(self.mean_reward[vi, pi]), float(
                    self.stderr[vi, pi]
                ), self.trials


def sweep(
    axis: str,
    values: Sequence[float],
    spec: ScenarioSpec,
    trials: int,
    policies: Sequence[str] = DEFAULT_POLICIES,
    icfg: iterate.IterateConfig | None = None,
) -> SweepResult:
    """Paired Monte-Carlo sweep of the power budget ("p0") or the sensing
    window ("t"). Every trial's scenario is shared by all points and
    policies, making cross-point comparisons noise-free per trial."""
    if axis not in ("p0", "t"):
        raise ValueError('axis must be "p0" or "t"')
    if len(values) == 0:
        raise ValueError("values must be nonempty")
    if list(values) != sorted(values):
        raise ValueError("values must be sorted ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for pol in policies:
        parse_policy(pol)

    rewards = np.zeros((trials, len(values), len(policies)))
    children = np.random.SeedSequence(spec.seed).spawn(trials)
    for ti in range(trials):
        rng = np.random.default_rng(children[ti])
        base_cfg, profiles = sample_scenario(spec, rng)
        for vi, v in enumerate(values):
            if axis == "p0":
                cfg = replace(base_cfg, P0=float(v))
            else:
                cfg = replace(base_cfg, T=float(v))
            for pi, pol in enumerate(policies):
                rewards[ti, vi, pi] = run_policy(pol, (cfg, profiles), icfg).reward

    mean = rewards.mean(axis=0)
    if trials > 1:
        stderr = rewards.std(axis=0, ddof=1) / np.sqrt(trials)
    else:
        stderr = np.zeros_like(mean)
    return SweepResult(
        axis=axis, values=[float(v) for v in values], policies=list(policies),
        mean_reward=mean, stderr=stderr, trials=trials,
    )


def sweep_csv_lines(result: SweepResult) -> Iterator[str]:
    """CSV rows (no trailing newlines): header then one row per
    (axis value, policy)."""
    yield "axis_value,policy,mean_reward,stderr,trials"
    for v, pol, mean, err, trials in result.rows():
        yield f"{v!r},{pol},{mean!r},{err!r},{trials}"
