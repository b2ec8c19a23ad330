"""Closed-loop and averaged-system integration with a dither-aware step
policy, trajectory records, and tracking-error metrics.

The integrator is classical fixed-order RK4.  In frequency-adaptive mode
the step is slaved to the instantaneous dither frequency,
dt = clamp(2*pi / (steps_per_period * f_max(t)), dt_min, dt_max),
re-evaluated every step, which keeps the phase error per step bounded and
the whole run deterministic.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from .averaging import AveragedSystem, make_averaged_rhs
from .controllers import ControllerConfig, derive_frequencies, make_es_rhs
from .cost_models import CostFunction, optimizer_ref
from .errors import DivergenceError, InsufficientDataError, StepUnderflowError
from .schedules import make_schedule_fn

_TWO_PI = 2.0 * math.pi

#: peaks shallower than this are treated as numerical ripple
ENVELOPE_PROMINENCE = 1e-12


@dataclass(frozen=True)
class StepPolicy:
    """Integration step selection.

    mode "fixed" uses dt as-is; mode "frequency_adaptive" requires an
    instantaneous-frequency callback at integration time.
    """

    mode: str = "frequency_adaptive"
    dt: Optional[float] = None
    steps_per_period: int = 40
    dt_max: float = 1e-2
    dt_min: float = 1e-8

    def __post_init__(self):
        if self.mode not in ("fixed", "frequency_adaptive"):
            raise ValueError(f"unknown step policy mode {self.mode!r}")
        if self.mode == "fixed":
            if self.dt is None or self.dt <= 0:
                raise ValueError("fixed mode requires dt > 0")
        else:
            if self.steps_per_period < 20:
                raise ValueError("steps_per_period must be >= 20")
            if not self.dt_min <= self.dt_max:
                raise ValueError("dt_min must not exceed dt_max")


@dataclass
class IntegrationStats:
    steps: int = 0
    max_dt_freq: float = 0.0
    wall_clock_s: float = 0.0


@dataclass
class RawTrajectory:
    """Sampled states from one integration run."""

    times: np.ndarray
    states: np.ndarray
    stats: IntegrationStats


@dataclass
class RunMeta:
    config_hash: str
    policy: StepPolicy
    wall_clock_s: float
    steps: int
    max_dt_freq: float


@dataclass
class Trajectory:
    """Time-indexed record of a closed-loop run, including the reference
    optimizer columns (verification only, never fed back)."""

    times: np.ndarray
    theta: np.ndarray
    y: np.ndarray
    theta_star: np.ndarray
    y_star: np.ndarray
    err_norm: np.ndarray
    inst_freq: np.ndarray
    meta: RunMeta


def integrate(rhs: Callable[[Sequence[float], float], Sequence[float]],
              x0: Sequence[float], t_span: tuple[float, float],
              policy: StepPolicy, sample_every: float,
              inst_freq: Optional[Callable[[float], float]] = None) -> RawTrajectory:
    """Integrate dx/dt = rhs(x, t) over t_span with RK4.

    `rhs` receives the state as a list of floats and may return any float
    sequence.  States are recorded at the `sample_every` cadence (nearest
    accepted step) plus both endpoints.  In frequency-adaptive mode,
    `inst_freq(t)` must return the largest instantaneous frequency in
    rad/s; a required step below dt_min raises StepUnderflowError.
    """
    t_start, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t_start:
        raise ValueError("t_span must satisfy t_end > t_start")
    if sample_every <= 0:
        raise ValueError("sample_every must be > 0")
    adaptive = policy.mode == "frequency_adaptive"
    if adaptive and inst_freq is None:
        raise ValueError("frequency-adaptive policy needs an inst_freq callback")

    start_wall = time.perf_counter()
    x = [float(v) for v in x0]
    t = t_start
    rec_t = [t_start]
    rec_x = [list(x)]
    due = t_start + sample_every
    stats = IntegrationStats()
    spp = policy.steps_per_period
    dt_fixed = policy.dt
    isfinite = math.isfinite

    while t < t_end - 1e-15:
        if adaptive:
            f = inst_freq(t)
            dt = _TWO_PI / (spp * f)
            if dt < policy.dt_min:
                raise StepUnderflowError(t, dt, policy.dt_min)
            if dt > policy.dt_max:
                dt = policy.dt_max
        else:
            dt = dt_fixed
        if t + dt > t_end:
            dt = t_end - t
        if adaptive:
            prod = dt * f
            if prod > stats.max_dt_freq:
                stats.max_dt_freq = prod

        h2 = 0.5 * dt
        k1 = rhs(x, t)
        k2 = rhs([xi + h2 * ki for xi, ki in zip(x, k1)], t + h2)
        k3 = rhs([xi + h2 * ki for xi, ki in zip(x, k2)], t + h2)
        k4 = rhs([xi + dt * ki for xi, ki in zip(x, k3)], t + dt)
        s6 = dt / 6.0
        x_new = [xi + s6 * (a + 2.0 * (b + c) + d)
                 for xi, a, b, c, d in zip(x, k1, k2, k3, k4)]
        t_new = t + dt
        stats.steps += 1

        ok = True
        for v in x_new:
            if not isfinite(v):
                ok = False
                break
        if not ok:
            raise DivergenceError(last_valid_time=t)

        while due <= t_new + 1e-12:
            # record whichever accepted endpoint is nearer the due time
            if (due - t) <= (t_new - due) and rec_t[-1] < t:
                rec_t.append(t)
                rec_x.append(list(x))
            elif rec_t[-1] < t_new:
                rec_t.append(t_new)
                rec_x.append(list(x_new))
            due += sample_every

        x = x_new
        t = t_new

    if rec_t[-1] < t_end:
        rec_t.append(t_end)
        rec_x.append(list(x))
    stats.wall_clock_s = time.perf_counter() - start_wall
    return RawTrajectory(times=np.array(rec_t), states=np.array(rec_x), stats=stats)


def _config_hash(*parts) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(repr(part).encode())
    return digest.hexdigest()[:16]


def run_es(cfg: ControllerConfig, cost: CostFunction, theta0: Sequence[float],
           t_span: tuple[float, float], policy: StepPolicy,
           sample_every: float = 0.01) -> Trajectory:
    """Simulate the closed ES loop: y = J(theta, t) measured live, theta
    driven by the control law."""
    if len(theta0) != cfg.dim_n or cfg.dim_n != cost.dim_n:
        raise ValueError("theta0, controller and cost dimensions must agree")
    t0 = cfg.schedule.t0
    if abs(t_span[0] - t0) > 1e-12:
        raise ValueError(f"t_span must start at the schedule t0={t0:g}")

    es = make_es_rhs(cfg)
    cost_eval = cost.eval
    sched_fn = make_schedule_fn(cfg.schedule)
    w_max = cfg.omega * max(cfg.omega_hat)

    def closed_loop(x, t):
        return es(x, cost_eval(x, t), t)

    def freq(t):
        return w_max * sched_fn(t)[3]

    raw = integrate(closed_loop, theta0, t_span, policy, sample_every,
                    inst_freq=freq)

    times, theta = raw.times, raw.states
    m = times.size
    y = np.empty(m)
    y_star = np.empty(m)
    theta_star = np.empty_like(theta)
    deta = np.empty(m)
    for i, t in enumerate(times):
        ts, ys = optimizer_ref(cost, float(t))
        theta_star[i] = ts
        y_star[i] = ys
        y[i] = cost_eval(theta[i], float(t))
        deta[i] = sched_fn(float(t))[3]
    err_norm = np.sqrt(np.sum((theta - theta_star) ** 2, axis=1))
    inst = deta[:, None] * derive_frequencies(cfg)[None, :]

    meta = RunMeta(config_hash=_config_hash(cfg, policy),
                   policy=policy, wall_clock_s=raw.stats.wall_clock_s,
                   steps=raw.stats.steps, max_dt_freq=raw.stats.max_dt_freq)
    return Trajectory(times=times, theta=theta, y=y, theta_star=theta_star,
                      y_star=y_star, err_norm=err_norm, inst_freq=inst, meta=meta)


def run_averaged(sys: AveragedSystem, theta_f0: Sequence[float],
                 t_span: tuple[float, float], policy: StepPolicy,
                 sample_every: float = 0.01) -> RawTrajectory:
    """Integrate the averaged comparison system in transformed coordinates."""
    if len(theta_f0) != sys.cfg.dim_n:
        raise ValueError("theta_f0 dimension must match the controller")
    rhs = make_averaged_rhs(sys)
    return integrate(rhs, theta_f0, t_span, policy, sample_every)


def fit_decay_rate(traj: Trajectory, window: tuple[float, float]) -> float:
    """Fitted exponential rate of the tracking-error envelope.

    Local maxima of err_norm inside the window (minimum prominence
    1e-12) are fit as log(peak) vs t; the negated slope is returned.  A
    numerically flat signal has a flat envelope and returns 0.  Fewer
    than 5 peaks on a non-flat signal raises InsufficientDataError.
    """
    t_a, t_b = float(window[0]), float(window[1])
    if t_a < traj.times[0] - 1e-12 or t_b > traj.times[-1] + 1e-12:
        raise ValueError("window must lie inside the trajectory")
    sel = (traj.times >= t_a) & (traj.times <= t_b)
    tt = traj.times[sel]
    err = traj.err_norm[sel]
    if err.size < 3:
        raise InsufficientDataError("window contains too few samples")
    if err.max() - err.min() <= 1e-12 * max(err.max(), 1e-300):
        return 0.0
    peaks, _ = find_peaks(err, prominence=ENVELOPE_PROMINENCE)
    if peaks.size < 5:
        raise InsufficientDataError(
            f"only {peaks.size} envelope maxima in window, need >= 5"
        )
    slope = np.polyfit(tt[peaks], np.log(err[peaks]), 1)[0]
    return float(-slope)


def envelope_block_maxima(traj: Trajectory, t_start: float,
                          block: float = 5.0) -> np.ndarray:
    """Upper envelope of err_norm after t_start, one value per `block`
    seconds.  The block width should cover the slowest oscillation in the
    tracking error (the dither beat) so the sequence reflects the decay
    rather than intra-beat swell."""
    edges = np.arange(t_start, float(traj.times[-1]) + 1e-9, block)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (traj.times >= a) & (traj.times < b)
        if sel.any():
            out.append(float(traj.err_norm[sel].max()))
    return np.array(out)


def compare_full_vs_averaged(cfg: ControllerConfig, cost: CostFunction,
                             theta0: Sequence[float],
                             t_span: tuple[float, float],
                             omega_list: Sequence[float],
                             policy: Optional[StepPolicy] = None,
                             sample_every: float = 0.01,
                             averaged_dt: float = 1e-3) -> list[float]:
    """RMS deviation between the transformed full loop and the averaged
    system, one value per dither frequency.

    For each omega the full loop runs with that base frequency, the
    tracking error is mapped forward through the state transform, and the
    deviation from the averaged trajectory (matched initial condition) is
    averaged over the sample times.
    """
    omegas = [float(w) for w in omega_list]
    if len(omegas) < 2:
        raise ValueError("need at least two omega values")
    if any(b < a for a, b in zip(omegas, omegas[1:])):
        raise ValueError("omega_list must be non-decreasing")
    policy = policy or StepPolicy()

    sched = cfg.schedule
    sched_fn = make_schedule_fn(sched)
    theta_star0, _ = optimizer_ref(cost, t_span[0])
    theta_f0 = np.asarray(theta0, dtype=float) - theta_star0

    avg_sys = AveragedSystem(cfg=cfg, cost=cost)
    avg = run_averaged(avg_sys, theta_f0, t_span,
                       StepPolicy(mode="fixed", dt=averaged_dt), sample_every)

    rms_list = []
    for w in omegas:
        full = run_es(replace(cfg, omega=w), cost, theta0, t_span, policy,
                      sample_every)
        base = np.array([sched_fn(float(t))[0] for t in full.times])
        theta_f = (full.theta - full.theta_star) * base[:, None]
        avg_interp = np.column_stack([
            np.interp(full.times, avg.times, avg.states[:, j])
            for j in range(cfg.dim_n)
        ])
        diff = theta_f - avg_interp
        rms_list.append(float(np.sqrt(np.mean(np.sum(diff * diff, axis=1)))))
    return rms_list
