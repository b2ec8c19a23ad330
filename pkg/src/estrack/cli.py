"""Config-driven experiment runner.

One JSON config describes one experiment: cost fixture, controller
parameters, horizon, step policy and a list of verification checks.  The
runner writes trajectory.csv (17-significant-digit decimal text, byte
stable across reruns), one CSV per requested check, and a human-readable
report.txt.  Exit codes: 0 success, 2 parse error, 3 simulation error,
4 check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

from . import cost_models
from .controllers import ControllerConfig, check_gain_conditions
from .cost_models import GridSpec, get_fixture, verify_assumptions
from .errors import ConfigError, EstrackError
from .schedules import SaturationCaps, ScheduleParams
from .simulate import (StepPolicy, Trajectory, compare_full_vs_averaged,
                       fit_decay_rate, run_es)

_FMT = "%.17g"


@dataclass(frozen=True)
class GainConditionsCheck:
    regime: str
    kappa1: Optional[float] = None
    literal_k: bool = False


@dataclass(frozen=True)
class AssumptionsCheck:
    t_range: Optional[tuple[float, float]] = None
    points_per_axis: int = 10
    time_samples: int = 20


@dataclass(frozen=True)
class AveragedComparisonCheck:
    omega_list: tuple[float, ...]
    t_end: Optional[float] = None
    averaged_dt: float = 1e-3


@dataclass(frozen=True)
class DecayFitCheck:
    window: tuple[float, float]
    expect_range: Optional[tuple[float, float]] = None


CheckSpec = Union[GainConditionsCheck, AssumptionsCheck,
                  AveragedComparisonCheck, DecayFitCheck]


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    cost: str
    controller: ControllerConfig
    theta0: tuple[float, ...]
    t_span: tuple[float, float]
    policy: StepPolicy
    sample_every: float
    outputs: Optional[str]
    checks: tuple[CheckSpec, ...]


def _expect_keys(d: dict, path: str, required: Sequence[str],
                 optional: Sequence[str] = ()):
    if not isinstance(d, dict):
        raise ConfigError(path, f"expected an object, got {type(d).__name__}")
    for key in d:
        if key not in required and key not in optional:
            raise ConfigError(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in d:
            raise ConfigError(f"{path}.{key}", "missing required key")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _vector(value, path: str, length: Optional[int] = None) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a non-empty array of numbers")
    vec = tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))
    if length is not None and len(vec) != length:
        raise ConfigError(path, f"expected length {length}, got {len(vec)}")
    return vec


def _parse_schedule(d: dict, path: str) -> ScheduleParams:
    _expect_keys(d, path, ["variant"],
                 ["t0", "beta", "r", "m", "lambda", "p", "caps"])
    variant = d["variant"]
    if variant not in ("asymptotic", "exponential"):
        raise ConfigError(f"{path}.variant",
                          "must be 'asymptotic' or 'exponential'")
    caps = None
    if "caps" in d and d["caps"] is not None:
        _expect_keys(d["caps"], f"{path}.caps", [],
                     ["nu_max", "phi_max", "freq_max"])
        caps = SaturationCaps(
            nu_max=None if "nu_max" not in d["caps"]
            else _number(d["caps"]["nu_max"], f"{path}.caps.nu_max"),
            phi_max=None if "phi_max" not in d["caps"]
            else _number(d["caps"]["phi_max"], f"{path}.caps.phi_max"),
            freq_max=None if "freq_max" not in d["caps"]
            else _number(d["caps"]["freq_max"], f"{path}.caps.freq_max"),
        )
    kwargs = dict(variant=variant,
                  t0=_number(d.get("t0", 0.0), f"{path}.t0"), caps=caps)
    try:
        if variant == "asymptotic":
            for key in ("beta", "r", "m"):
                if key not in d:
                    raise ConfigError(f"{path}.{key}",
                                      "required for the asymptotic variant")
                kwargs[key] = _number(d[key], f"{path}.{key}")
            return ScheduleParams(**kwargs)
        for key, attr in (("lambda", "lam"), ("p", "p")):
            if key not in d:
                raise ConfigError(f"{path}.{key}",
                                  "required for the exponential variant")
            kwargs[attr] = _number(d[key], f"{path}.{key}")
        return ScheduleParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_controller(d: dict, path: str) -> ControllerConfig:
    _expect_keys(d, path, ["dim_n", "omega", "omega_hat", "alpha", "k",
                           "schedule"])
    dim_n = d["dim_n"]
    if isinstance(dim_n, bool) or not isinstance(dim_n, int) or dim_n < 1:
        raise ConfigError(f"{path}.dim_n", "must be a positive integer")
    schedule = _parse_schedule(d["schedule"], f"{path}.schedule")
    kwargs = {}
    for key in ("omega_hat", "alpha", "k"):
        kwargs[key] = _vector(d[key], f"{path}.{key}", dim_n)
    try:
        return ControllerConfig(dim_n=dim_n,
                                omega=_number(d["omega"], f"{path}.omega"),
                                schedule=schedule, **kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_policy(d: dict, path: str) -> StepPolicy:
    _expect_keys(d, path, [], ["mode", "dt", "steps_per_period", "dt_max",
                               "dt_min"])
    kwargs = {}
    if "mode" in d:
        kwargs["mode"] = d["mode"]
    if "dt" in d and d["dt"] is not None:
        kwargs["dt"] = _number(d["dt"], f"{path}.dt")
    if "steps_per_period" in d:
        spp = d["steps_per_period"]
        if isinstance(spp, bool) or not isinstance(spp, int):
            raise ConfigError(f"{path}.steps_per_period", "must be an integer")
        kwargs["steps_per_period"] = spp
    for key in ("dt_max", "dt_min"):
        if key in d:
            kwargs[key] = _number(d[key], f"{path}.{key}")
    try:
        return StepPolicy(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_check(d: dict, path: str) -> CheckSpec:
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError(path, "each check needs a 'type' key")
    kind = d["type"]
    if kind == "gain_conditions":
        _expect_keys(d, path, ["type", "regime"], ["kappa1", "literal_k"])
        regime = str(d["regime"]).replace("-", "_")
        if regime not in ("constant", "time_varying"):
            raise ConfigError(f"{path}.regime",
                              "must be 'constant' or 'time_varying'")
        return GainConditionsCheck(
            regime=regime,
            kappa1=None if d.get("kappa1") is None
            else _number(d["kappa1"], f"{path}.kappa1"),
            literal_k=bool(d.get("literal_k", False)),
        )
    if kind == "assumptions":
        _expect_keys(d, path, ["type"],
                     ["t_range", "points_per_axis", "time_samples"])
        t_range = None
        if "t_range" in d and d["t_range"] is not None:
            vec = _vector(d["t_range"], f"{path}.t_range", 2)
            t_range = (vec[0], vec[1])
        return AssumptionsCheck(t_range=t_range,
                                points_per_axis=int(d.get("points_per_axis", 10)),
                                time_samples=int(d.get("time_samples", 20)))
    if kind == "averaged_comparison":
        _expect_keys(d, path, ["type", "omega_list"], ["t_end", "averaged_dt"])
        return AveragedComparisonCheck(
            omega_list=_vector(d["omega_list"], f"{path}.omega_list"),
            t_end=None if d.get("t_end") is None
            else _number(d["t_end"], f"{path}.t_end"),
            averaged_dt=_number(d.get("averaged_dt", 1e-3), f"{path}.averaged_dt"),
        )
    if kind == "decay_fit":
        _expect_keys(d, path, ["type", "window"], ["expect_range"])
        window = _vector(d["window"], f"{path}.window", 2)
        expect = None
        if "expect_range" in d and d["expect_range"] is not None:
            vec = _vector(d["expect_range"], f"{path}.expect_range", 2)
            expect = (vec[0], vec[1])
        return DecayFitCheck(window=(window[0], window[1]), expect_range=expect)
    raise ConfigError(f"{path}.type", f"unknown check type {kind!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate an experiment config document (JSON, UTF-8)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"malformed JSON: {exc}") from None
    _expect_keys(doc, "config", ["name", "cost", "controller", "theta0",
                                 "t_span"],
                 ["policy", "sample_every", "outputs", "checks"])
    name = doc["name"]
    if not isinstance(name, str) or not name:
        raise ConfigError("config.name", "must be a non-empty string")
    cost_name = doc["cost"]
    if cost_name not in cost_models.FIXTURES:
        raise ConfigError("config.cost",
                          f"unknown fixture {cost_name!r}; available: "
                          f"{sorted(cost_models.FIXTURES)}")
    controller = _parse_controller(doc["controller"], "config.controller")
    theta0 = _vector(doc["theta0"], "config.theta0", controller.dim_n)
    t_span = _vector(doc["t_span"], "config.t_span", 2)
    if not t_span[1] > t_span[0]:
        raise ConfigError("config.t_span", "end must exceed start")
    policy = _parse_policy(doc.get("policy", {}), "config.policy")
    sample_every = _number(doc.get("sample_every", 0.01), "config.sample_every")
    if sample_every <= 0:
        raise ConfigError("config.sample_every", "must be > 0")
    outputs = doc.get("outputs")
    if outputs is not None and not isinstance(outputs, str):
        raise ConfigError("config.outputs", "must be a string path")
    checks_doc = doc.get("checks", [])
    if not isinstance(checks_doc, list):
        raise ConfigError("config.checks", "must be an array")
    checks = tuple(_parse_check(c, f"config.checks[{i}]")
                   for i, c in enumerate(checks_doc))
    return ExperimentConfig(name=name, cost=cost_name, controller=controller,
                            theta0=theta0, t_span=(t_span[0], t_span[1]),
                            policy=policy, sample_every=sample_every,
                            outputs=outputs, checks=checks)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Round-trippable dict form with every default filled in."""
    sched = cfg.controller.schedule
    sched_d: dict = {"variant": sched.variant, "t0": sched.t0}
    if sched.variant == "asymptotic":
        sched_d.update(beta=sched.beta, r=sched.r, m=sched.m)
    else:
        sched_d.update({"lambda": sched.lam, "p": sched.p})
    if sched.caps is not None:
        caps_d = {}
        for key in ("nu_max", "phi_max", "freq_max"):
            val = getattr(sched.caps, key)
            if val is not None:
                caps_d[key] = val
        sched_d["caps"] = caps_d

    policy_d: dict = {"mode": cfg.policy.mode}
    if cfg.policy.mode == "fixed":
        policy_d["dt"] = cfg.policy.dt
    else:
        policy_d.update(steps_per_period=cfg.policy.steps_per_period,
                        dt_max=cfg.policy.dt_max, dt_min=cfg.policy.dt_min)

    checks = []
    for check in cfg.checks:
        if isinstance(check, GainConditionsCheck):
            d = {"type": "gain_conditions", "regime": check.regime}
            if check.kappa1 is not None:
                d["kappa1"] = check.kappa1
            if check.literal_k:
                d["literal_k"] = True
        elif isinstance(check, AssumptionsCheck):
            d = {"type": "assumptions", "points_per_axis": check.points_per_axis,
                 "time_samples": check.time_samples}
            if check.t_range is not None:
                d["t_range"] = list(check.t_range)
        elif isinstance(check, AveragedComparisonCheck):
            d = {"type": "averaged_comparison",
                 "omega_list": list(check.omega_list),
                 "averaged_dt": check.averaged_dt}
            if check.t_end is not None:
                d["t_end"] = check.t_end
        else:
            d = {"type": "decay_fit", "window": list(check.window)}
            if check.expect_range is not None:
                d["expect_range"] = list(check.expect_range)
        checks.append(d)

    out = {
        "name": cfg.name,
        "cost": cfg.cost,
        "controller": {
            "dim_n": cfg.controller.dim_n,
            "omega": cfg.controller.omega,
            "omega_hat": list(cfg.controller.omega_hat),
            "alpha": list(cfg.controller.alpha),
            "k": list(cfg.controller.k),
            "schedule": sched_d,
        },
        "theta0": list(cfg.theta0),
        "t_span": list(cfg.t_span),
        "policy": policy_d,
        "sample_every": cfg.sample_every,
        "checks": checks,
    }
    if cfg.outputs is not None:
        out["outputs"] = cfg.outputs
    return out


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def write_trajectory_csv(path: Path, traj: Trajectory):
    n = traj.theta.shape[1]
    header = (["t"] + [f"theta_{i+1}" for i in range(n)] + ["y"]
              + [f"theta_star_{i+1}" for i in range(n)]
              + ["y_star", "err_norm"]
              + [f"inst_freq_{i+1}" for i in range(n)])
    lines = [",".join(header)]
    for idx in range(traj.times.size):
        row = ([traj.times[idx]] + list(traj.theta[idx]) + [traj.y[idx]]
               + list(traj.theta_star[idx])
               + [traj.y_star[idx], traj.err_norm[idx]]
               + list(traj.inst_freq[idx]))
        lines.append(",".join(_FMT % v for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_check_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_FMT % v if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


@dataclass
class CheckResult:
    name: str
    passed: Optional[bool]  # None = skipped
    lines: list[str] = field(default_factory=list)


class _ExperimentContext:
    """Shares the assumption estimate between checks that need kappa1."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.cost = get_fixture(cfg.cost)
        self._assumption_cache: dict = {}

    def assumption_report(self, check: AssumptionsCheck):
        key = (check.t_range, check.points_per_axis, check.time_samples)
        if key not in self._assumption_cache:
            t_range = check.t_range or self.cfg.t_span
            grid = GridSpec(points_per_axis=check.points_per_axis,
                            time_samples=check.time_samples)
            self._assumption_cache[key] = verify_assumptions(
                self.cost, t_range, grid)
        return self._assumption_cache[key]


def _run_gain_check(ctx: _ExperimentContext, check: GainConditionsCheck,
                    out: Path) -> CheckResult:
    if check.kappa1 is not None:
        kappa1 = check.kappa1
        source = "config"
    else:
        report = ctx.assumption_report(AssumptionsCheck())
        kappa1 = report.kappa1_hat
        source = "assumption estimate"
    cond = check_gain_conditions(ctx.cfg.controller, kappa1, check.regime,
                                 literal_k=check.literal_k)
    rows = [(i + 1, ctx.cfg.controller.k[i], ctx.cfg.controller.alpha[i],
             cond.thresholds[i], cond.margins[i])
            for i in range(ctx.cfg.controller.dim_n)]
    _write_check_csv(out / "gain_conditions.csv",
                     ["channel", "k", "alpha", "threshold", "margin"], rows)
    lines = [f"regime: {cond.regime}",
             f"kappa1 = {kappa1:.6g} ({source})",
             f"exponent within admissible interval: {cond.exponent_ok}"]
    for i, (thr, mg) in enumerate(zip(cond.thresholds, cond.margins)):
        lines.append(f"channel {i+1}: threshold {thr:.6g}, margin {mg:.6g}")
    lines.append(f"pass: {cond.passed}")
    return CheckResult("gain_conditions", cond.passed, lines)


def _run_assumptions_check(ctx: _ExperimentContext, check: AssumptionsCheck,
                           out: Path) -> CheckResult:
    report = ctx.assumption_report(check)
    _write_check_csv(out / "assumptions.csv",
                     ["kappa1_hat", "kappa2_hat", "m_theta_hat", "m_j_hat",
                      "n_violations"],
                     [(report.kappa1_hat, report.kappa2_hat,
                       report.m_theta_hat, report.m_j_hat,
                       len(report.violations))])
    lines = [f"kappa1_hat = {report.kappa1_hat:.6g}",
             f"kappa2_hat = {report.kappa2_hat:.6g}",
             f"m_theta_hat = {report.m_theta_hat:.6g}",
             f"m_j_hat = {report.m_j_hat:.6g}",
             f"violations: {len(report.violations)}",
             f"pass: {report.passing}"]
    for v in report.violations[:10]:
        lines.append(f"  violated {v[2]} at t={v[0]:.4g}, theta={list(v[1])}")
    return CheckResult("assumptions", report.passing, lines)


def _run_averaged_check(ctx: _ExperimentContext, check: AveragedComparisonCheck,
                        out: Path) -> CheckResult:
    cfg = ctx.cfg
    t_end = check.t_end if check.t_end is not None else min(
        cfg.t_span[1], cfg.t_span[0] + 10.0)
    rms = compare_full_vs_averaged(cfg.controller, ctx.cost, cfg.theta0,
                                   (cfg.t_span[0], t_end), check.omega_list,
                                   policy=cfg.policy,
                                   sample_every=cfg.sample_every,
                                   averaged_dt=check.averaged_dt)
    _write_check_csv(out / "averaged_comparison.csv", ["omega", "rms"],
                     list(zip(check.omega_list, rms)))
    passed = rms[-1] < rms[0]
    lines = [f"omega={w:g}: rms deviation {v:.6g}"
             for w, v in zip(check.omega_list, rms)]
    lines.append(f"deviation shrinks with omega: {passed}")
    return CheckResult("averaged_comparison", passed, lines)


def _run_decay_check(ctx: _ExperimentContext, check: DecayFitCheck,
                     traj: Trajectory, out: Path) -> CheckResult:
    lam_hat = fit_decay_rate(traj, check.window)
    if check.expect_range is not None:
        lo, hi = check.expect_range
        passed = lo <= lam_hat <= hi
    else:
        passed = True
    _write_check_csv(out / "decay_fit.csv",
                     ["window_start", "window_end", "lambda_hat"],
                     [(check.window[0], check.window[1], lam_hat)])
    lines = [f"window [{check.window[0]:g}, {check.window[1]:g}]",
             f"lambda_hat = {lam_hat:.6g}"]
    if check.expect_range is not None:
        lines.append(f"expected range [{check.expect_range[0]:g}, "
                     f"{check.expect_range[1]:g}]")
    lines.append(f"pass: {passed}")
    return CheckResult("decay_fit", passed, lines)


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[str] = None,
                   quiet: bool = False, skip_simulation: bool = False) -> int:
    """Execute one experiment and write its artifacts.

    With skip_simulation=True only the simulation-free checks run
    (decay_fit is reported as skipped).
    """
    out = Path(out_dir or cfg.outputs or f"estrack_out/{cfg.name}")
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    ctx = _ExperimentContext(cfg)
    report_lines = [f"estrack experiment: {cfg.name}", "", "== config ==",
                    serialize_config(cfg), ""]
    results: list[CheckResult] = []
    exit_code = 0

    traj = None
    if not skip_simulation:
        try:
            traj = run_es(cfg.controller, ctx.cost, cfg.theta0, cfg.t_span,
                          cfg.policy, cfg.sample_every)
        except (EstrackError, ValueError) as exc:
            report_lines += ["== simulation ==", f"ERROR: {exc}"]
            (out / "report.txt").write_text("\n".join(report_lines) + "\n")
            if not quiet:
                print(f"simulation error: {exc}", file=sys.stderr)
            return 3
        write_trajectory_csv(out / "trajectory.csv", traj)
        report_lines += [
            "== simulation ==",
            f"samples: {traj.times.size}",
            f"integration steps: {traj.meta.steps}",
            f"max dt * inst_freq: {traj.meta.max_dt_freq:.6g}",
            f"final err_norm: {traj.err_norm[-1]:.6g}",
            f"config hash: {traj.meta.config_hash}",
            "",
        ]

    for check in cfg.checks:
        try:
            if isinstance(check, GainConditionsCheck):
                results.append(_run_gain_check(ctx, check, out))
            elif isinstance(check, AssumptionsCheck):
                results.append(_run_assumptions_check(ctx, check, out))
            elif isinstance(check, AveragedComparisonCheck):
                results.append(_run_averaged_check(ctx, check, out))
            elif isinstance(check, DecayFitCheck):
                if traj is None:
                    results.append(CheckResult(
                        "decay_fit", None,
                        ["skipped: needs the main trajectory"]))
                else:
                    results.append(_run_decay_check(ctx, check, traj, out))
        except (EstrackError, ValueError) as exc:
            res = CheckResult(type(check).__name__, False, [f"ERROR: {exc}"])
            results.append(res)

    for res in results:
        status = "SKIP" if res.passed is None else ("PASS" if res.passed else "FAIL")
        report_lines.append(f"== check: {res.name} [{status}] ==")
        report_lines.extend(res.lines)
        report_lines.append("")
        if res.passed is False:
            exit_code = 4

    wall = time.perf_counter() - started
    report_lines.append(f"wall clock: {wall:.3f} s")
    report_lines.append(f"exit status: {exit_code}")
    (out / "report.txt").write_text("\n".join(report_lines) + "\n")
    if not quiet:
        for res in results:
            status = "SKIP" if res.passed is None else (
                "PASS" if res.passed else "FAIL")
            print(f"[{status}] {res.name}")
        print(f"artifacts written to {out}")
    return exit_code


def preset_dir() -> Path:
    return Path(str(resources.files("estrack").joinpath("presets")))


def list_presets() -> dict[str, Path]:
    return {p.stem: p for p in sorted(preset_dir().glob("*.json"))}


def load_config(path_or_preset: str) -> ExperimentConfig:
    path = Path(path_or_preset)
    if not path.exists():
        presets = list_presets()
        if path_or_preset in presets:
            path = presets[path_or_preset]
        else:
            raise ConfigError("<document>",
                              f"no such config file or preset: {path_or_preset}")
    return parse_config(path.read_text())


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="estrack",
        description="extremum-seeking tracking experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--quiet", action="store_true")

    p_verify = sub.add_parser(
        "verify", help="run the checks without the main simulation")
    p_verify.add_argument("config", help="config file path or preset name")
    p_verify.add_argument("--out", default=None, help="output directory")
    p_verify.add_argument("--quiet", action="store_true")

    sub.add_parser("presets", help="list shipped preset configs")

    args = parser.parse_args(argv)
    if args.command == "presets":
        for name, path in list_presets().items():
            print(f"{name}\t{path}")
        return 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run_experiment(cfg, out_dir=args.out, quiet=args.quiet,
                          skip_simulation=(args.command == "verify"))


if __name__ == "__main__":
    sys.exit(main())
