"""Command-line driver: solve single instances, run sweeps, audit solutions,
dump sampled scenarios.

One JSON config document feeds every command, with sections ``system``,
``scenario``, ``sensors``, ``iterate`` and ``run``; an explicit sensor list
overrides random scenario sampling.  ``--set section.key=value`` patches any
field.  Data goes to stdout (or ``--out``), diagnostics to stderr with
verbosity from ``WPCS_LOG`` (error|info|debug).  Exit codes: 0 ok, 2 parse
error, 3 validation error, 4 convergence error, 5 audit failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import iterate, oracle, pa_solver, sim
from .model import (
    Allocation,
    ConvergenceError,
    SensorProfile,
    SolveReport,
    SystemConfig,
    constraint_residuals,
    derived_coeffs,
)

log = logging.getLogger("wpcs")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_AUDIT = 5

_SECTIONS = ("system", "scenario", "sensors", "iterate", "run")
# saved solve documents round-trip through `verify`
_DOC_SECTIONS = _SECTIONS + ("report", "allocations")
_RUN_KEYS = ("seed", "trials", "axis", "values", "policies", "instances", "out")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    """Resolved invocation: command, input/output paths, seed and overrides."""

    command: str
    config_path: str | None = None
    out_path: str | None = None
    seed: int | None = None
    overrides: tuple[str, ...] = ()
    trials: int | None = None
    axis: str | None = None
    values: tuple[float, ...] | None = None


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise CliError(EXIT_PARSE, f"config file not found: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CliError(EXIT_PARSE, "config root must be a JSON object")
    for key in doc:
        if key not in _DOC_SECTIONS:
            raise CliError(EXIT_VALIDATION, f"unknown config section {key!r}")
    return doc


def _apply_overrides(doc: dict, overrides: Sequence[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise CliError(EXIT_VALIDATION, f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        parts = key.split(".")
        if len(parts) != 2 or parts[0] not in _SECTIONS or parts[0] == "sensors":
            raise CliError(
                EXIT_VALIDATION,
                f"--set key must be <section>.<field> with section in "
                f"{_SECTIONS[:2] + _SECTIONS[3:]}, got {key!r}",
            )
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        doc.setdefault(parts[0], {})[parts[1]] = value
    return doc


def _dataclass_from_section(cls, section: dict, path: str, defaults: dict | None = None):
    known = {f.name for f in dataclasses.fields(cls)}
    merged = dict(defaults or {})
    for key, value in section.items():
        if key not in known:
            raise CliError(EXIT_VALIDATION, f"unknown field {path}.{key}")
        if isinstance(value, list):
            value = tuple(value)
        merged[key] = value
    try:
        return cls(**merged)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, f"{path}: {exc}") from None


def _build_scenario_spec(doc: dict, seed: int | None) -> sim.ScenarioSpec:
    section = dict(doc.get("scenario", {}))
    if seed is not None:
        section["seed"] = seed
    return _dataclass_from_section(sim.ScenarioSpec, section, "scenario")


def _build_instance(
    doc: dict, seed: int | None
) -> tuple[SystemConfig, list[SensorProfile], sim.ScenarioSpec]:
    spec = _build_scenario_spec(doc, seed)
    if "sensors" in doc:
        profiles = []
        for i, sensor in enumerate(doc["sensors"]):
            profiles.append(
                _dataclass_from_section(SensorProfile, sensor, f"sensors[{i}]")
            )
        cfg = _dataclass_from_section(
            SystemConfig, doc.get("system", {}), "system",
            defaults=dataclasses.asdict(spec.system()),
        )
        return cfg, profiles, spec
    cfg, profiles = sim.sample_scenario(spec)
    if "system" in doc:
        cfg = _dataclass_from_section(
            SystemConfig, doc["system"], "system", defaults=dataclasses.asdict(cfg)
        )
    return cfg, profiles, spec


def _build_iterate(doc: dict) -> iterate.IterateConfig:
    return _dataclass_from_section(
        iterate.IterateConfig, doc.get("iterate", {}), "iterate"
    )


def _report_doc(report: SolveReport) -> dict:
    return {
        "reward": float(report.reward),
        "utility": float(report.utility),
        "energy_cost": float(report.energy_cost),
        "lambda": float(report.lam),
        "kkt_residual": float(report.kkt_residual),
        "iterations": int(report.iterations),
        "trace": [float(x) for x in report.trace],
    }


def _alloc_doc(alloc: Allocation) -> dict:
    return {
        "power": float(alloc.power),
        "raw_bits": float(alloc.raw_bits),
        "ratio": float(alloc.ratio),
        "t_sense": float(alloc.t_sense),
        "t_comp": float(alloc.t_comp),
        "t_tx": float(alloc.t_tx),
        "selected": bool(alloc.selected),
    }


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)
        log.info("wrote %s", out_path)


def _emit_json(doc: dict, out_path: str | None) -> None:
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out_path)


def cmd_solve(manifest: RunManifest) -> int:
    doc = _apply_overrides(_load_config(manifest.config_path), manifest.overrides)
    cfg, profiles, _ = _build_instance(doc, manifest.seed)
    icfg = _build_iterate(doc)
    log.info("solving instance with %d sensors", len(profiles))
    allocs, report = iterate.solve_p1(profiles, cfg, icfg)
    out = {
        "system": dataclasses.asdict(cfg),
        "sensors": [dataclasses.asdict(p) for p in profiles],
        "iterate": {
            "init_ratio": icfg.init_ratio,
            "rel_tol": icfg.rel_tol,
            "max_iters": icfg.max_iters,
        },
        "report": _report_doc(report),
        "allocations": [_alloc_doc(a) for a in allocs],
    }
    _emit_json(out, manifest.out_path)
    return EXIT_OK


def cmd_sweep(manifest: RunManifest) -> int:
    doc = _apply_overrides(_load_config(manifest.config_path), manifest.overrides)
    run = doc.get("run", {})
    for key in run:
        if key not in _RUN_KEYS:
            raise CliError(EXIT_VALIDATION, f"unknown field run.{key}")
    spec = _build_scenario_spec(doc, manifest.seed)
    axis = manifest.axis or run.get("axis")
    values = manifest.values if manifest.values is not None else run.get("values")
    trials = manifest.trials if manifest.trials is not None else run.get("trials", 200)
    policies = tuple(run.get("policies", sim.DEFAULT_POLICIES))
    if axis not in ("p0", "t"):
        raise CliError(EXIT_VALIDATION, 'sweep needs --axis "p0" or "t"')
    if not values:
        raise CliError(EXIT_VALIDATION, "sweep needs a nonempty --values list")
    try:
        result = sim.sweep(axis, list(values), spec, int(trials), policies,
                           _build_iterate(doc))
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    _emit("\n".join(sim.sweep_csv_lines(result)) + "\n", manifest.out_path)
    for pi, pol in enumerate(result.policies):
        means = result.mean_reward[:, pi]
        trend = "non-decreasing" if np.all(np.diff(means) >= 0) else "NOT monotone"
        print(f"sweep[{axis}] {pol}: mean reward {trend} over {len(means)} points",
              file=sys.stderr)
    return EXIT_OK


def _audit_saved_instance(doc: dict) -> list[oracle.CheckResult]:
    try:
        cfg = SystemConfig(**doc["system"])
        profiles = [SensorProfile(**d) for d in doc["sensors"]]
        report = doc["report"]
        allocs = [Allocation(**d) for d in doc["allocations"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, f"not a saved solve document: {exc}") from None

    checks = []
    t_slack, e_slack, p_slack = constraint_residuals(allocs, profiles, cfg)
    scale_e = max(
        (cfg.eta * a.power * p.h * cfg.T0 for a, p in zip(allocs, profiles)),
        default=0.0,
    )
    checks.append(
        oracle.CheckResult(
            "time_constraint", min(t_slack), -1e-6 * cfg.T,
            min(t_slack) >= -1e-6 * cfg.T,
        )
    )
    worst_e = min(e_slack)
    limit_e = -1e-6 * max(scale_e, 1e-300)
    checks.append(
        oracle.CheckResult("energy_constraint", worst_e, limit_e, worst_e >= limit_e)
    )
    checks.append(
        oracle.CheckResult(
            "power_constraint", p_slack, -1e-6 * cfg.P0, p_slack >= -1e-6 * cfg.P0
        )
    )
    recomputed = sum(
        p.a * np.log1p(a.raw_bits) for a, p in zip(allocs, profiles)
    ) - cfg.c * cfg.T0 * sum(a.power for a in allocs)
    drift = abs(recomputed - report["reward"])
    limit = 1e-9 * max(1.0, abs(report["reward"]))
    checks.append(
        oracle.CheckResult("reward_consistency", drift, limit, drift <= limit)
    )
    identity = abs(report["reward"] - (report["utility"] - report["energy_cost"]))
    checks.append(
        oracle.CheckResult("reward_identity", identity, limit, identity <= limit)
    )
    trace = report.get("trace", [])
    worst_step = min(
        (b - a for a, b in zip(trace, trace[1:])), default=0.0
    )
    trace_limit = -1e-9 * max(1.0, abs(report["reward"]))
    checks.append(
        oracle.CheckResult(
            "trace_monotone", worst_step, trace_limit, worst_step >= trace_limit
        )
    )
    return checks


def _audit_battery(spec: sim.ScenarioSpec, instances: int) -> list[oracle.CheckResult]:
    checks: list[oracle.CheckResult] = []
    children = np.random.SeedSequence(spec.seed).spawn(instances)
    worst_time = worst_energy = worst_power = np.inf
    worst_kkt = worst_slack = 0.0
    threshold_ok = True
    worst_trace = np.inf
    for ti in range(instances):
        rng = np.random.default_rng(children[ti])
        cfg, profiles = sim.sample_scenario(spec, rng)
        allocs, report = iterate.solve_p1(profiles, cfg)
        t_slack, e_slack, p_slack = constraint_residuals(allocs, profiles, cfg)
        scale_e = max(
            (cfg.eta * a.power * p.h * cfg.T0 for a, p in zip(allocs, profiles)
             if a.selected),
            default=1e-300,
        )
        worst_time = min(worst_time, min(t_slack) / cfg.T)
        worst_energy = min(worst_energy, min(e_slack) / scale_e)
        worst_power = min(worst_power, p_slack / cfg.P0)
        worst_trace = min(
            worst_trace,
            min((b - a for a, b in zip(report.trace, report.trace[1:])),
                default=0.0) / max(1.0, report.reward),
        )

        ratios = [a.ratio for a in allocs]
        coeffs = [derived_coeffs(p, R) for p, R in zip(profiles, ratios)]
        sol = pa_solver.solve_lambda(profiles, coeffs, ratios, cfg)
        audit = oracle.kkt_audit(sol, profiles, coeffs, ratios, cfg)
        for c in audit.checks:
            if c.name == "stationarity_interior":
                worst_kkt = max(worst_kkt, c.value)
            if c.name == "complementary_slackness":
                worst_slack = max(worst_slack, c.value / (cfg.P0 * cfg.T0))
            if not c.passed:
                checks.append(
                    oracle.CheckResult(
                        f"instance{ti}.{c.name}", c.value, c.limit, False
                    )
                )
        threshold_ok &= bool(
            np.all((sol.priorities >= sol.lam) == (sol.powers > 0.0))
        )
    checks.append(
        oracle.CheckResult("time_tightness", worst_time, -1e-6, worst_time >= -1e-6)
    )
    checks.append(
        oracle.CheckResult(
            "energy_tightness", worst_energy, -1e-6, worst_energy >= -1e-6
        )
    )
    checks.append(
        oracle.CheckResult("power_budget", worst_power, -1e-9, worst_power >= -1e-9)
    )
    checks.append(
        oracle.CheckResult("stationarity", worst_kkt, 1e-6, worst_kkt <= 1e-6)
    )
    checks.append(
        oracle.CheckResult(
            "complementary_slackness", worst_slack, 1e-6, worst_slack <= 1e-6
        )
    )
    checks.append(
        oracle.CheckResult(
            "threshold_selection", 1.0 if threshold_ok else 0.0, 1.0, threshold_ok
        )
    )
    checks.append(
        oracle.CheckResult(
            "trace_monotone", worst_trace, -1e-9, worst_trace >= -1e-9
        )
    )

    # analytic curve audits on the first sampled instance
    cfg, profiles = sim.sample_scenario(spec)
    p = profiles[0]
    co = derived_coeffs(p, 1.5)
    checks.append(
        oracle.convexity_audit(
            lambda t: float(
                oracle._ap_energy(np.array([t]), p, co, 1.5, cfg)[0]
            ),
            (1e-3 * cfg.T, cfg.T),
            2001,
            name="transmit_energy_convexity",
        )
    )
    from .model import g_func

    xs = np.linspace(0.0, 5.0 * cfg.B, 2001)
    gs = np.array([g_func(float(x), cfg.B, cfg.N0) for x in xs])
    g_worst = float(np.max(np.diff(gs)))
    checks.append(
        oracle.CheckResult(
            "g_strictly_decreasing", g_worst, 0.0, g_worst < 0.0 and gs[0] == 0.0
        )
    )

    if spec.n_sensors <= 2:
        coeffs = [derived_coeffs(p, 1.5) for p in profiles]
        ratios = [1.5] * len(profiles)
        sol = pa_solver.solve_lambda(profiles, coeffs, ratios, cfg)
        from .model import operator_reward, utility

        reward = operator_reward(
            utility((p.a, ell) for p, ell in zip(profiles, sol.raw_bits)),
            sol.powers, cfg,
        )
        grid = oracle.GridSpec(
            points_per_axis=400,
            axes=tuple(
                (f"t{i}", 1e-6 * cfg.T, cfg.T) for i in range(len(profiles))
            ),
        )
        _, grid_reward = oracle.grid_best_p2(profiles, coeffs, ratios, cfg, grid)
        gap = (grid_reward - reward) / max(1.0, abs(grid_reward))
        checks.append(
            oracle.CheckResult("grid_oracle_gap", gap, 1e-3, gap <= 1e-3)
        )
    return checks


def cmd_verify(manifest: RunManifest) -> int:
    doc = _apply_overrides(_load_config(manifest.config_path), manifest.overrides)
    if "allocations" in doc:
        checks = _audit_saved_instance(doc)
    else:
        run = doc.get("run", {})
        spec = _build_scenario_spec(doc, manifest.seed)
        checks = _audit_battery(spec, int(run.get("instances", 20)))
    passed = bool(all(c.passed for c in checks))
    out = {
        "passed": passed,
        "checks": [
            {"name": c.name, "value": float(c.value), "limit": float(c.limit),
             "passed": bool(c.passed)}
            for c in checks
        ],
    }
    _emit_json(out, manifest.out_path)
    for c in checks:
        if not c.passed:
            print(f"FAIL {c.name}: value={c.value!r} limit={c.limit!r}",
                  file=sys.stderr)
    return EXIT_OK if passed else EXIT_AUDIT


def cmd_sample(manifest: RunManifest) -> int:
    doc = _apply_overrides(_load_config(manifest.config_path), manifest.overrides)
    cfg, profiles, spec = _build_instance(doc, manifest.seed)
    out = {
        "system": dataclasses.asdict(cfg),
        "sensors": [dataclasses.asdict(p) for p in profiles],
        "scenario": dataclasses.asdict(spec),
    }
    _emit_json(out, manifest.out_path)
    return EXIT_OK


def _parse_args(argv: Sequence[str] | None) -> RunManifest:
    parser = argparse.ArgumentParser(
        prog="wpcs",
        description="Wirelessly powered crowd sensing: solver and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "solve one instance and write report + allocations (JSON)"),
        ("sweep", "paired Monte-Carlo sweep over a system axis (CSV)"),
        ("verify", "audit a saved solve or a seeded random battery"),
        ("sample", "draw a scenario and dump it for replay (JSON)"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", metavar="PATH", default=None)
        sp.add_argument("--set", metavar="KEY=VALUE", action="append", default=[])
        if name == "sweep":
            sp.add_argument("--trials", type=int, default=None)
            sp.add_argument("--axis", choices=("p0", "t"), default=None)
            sp.add_argument("--values", default=None,
                            help="comma-separated axis values")
    ns = parser.parse_args(argv)
    values = None
    if getattr(ns, "values", None):
        try:
            values = tuple(float(v) for v in ns.values.split(",") if v.strip())
        except ValueError:
            raise CliError(EXIT_VALIDATION, f"bad --values list: {ns.values!r}")
    return RunManifest(
        command=ns.command,
        config_path=ns.config,
        out_path=ns.out,
        seed=ns.seed,
        overrides=tuple(ns.set),
        trials=getattr(ns, "trials", None),
        axis=getattr(ns, "axis", None),
        values=values,
    )


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("WPCS_LOG", "error").lower()
    logging.basicConfig(
        stream=sys.stderr,
        level={"error": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        manifest = _parse_args(argv)
        handler = {
            "solve": cmd_solve,
            "sweep": cmd_sweep,
            "verify": cmd_verify,
            "sample": cmd_sample,
        }[manifest.command]
        return handler(manifest)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConvergenceError as exc:
        print(f"error: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
