"""Lie-bracket averaged comparison systems and supporting transforms.

The averaged right-hand sides are implemented in the dilated clock, where
the dither is a constant-frequency sinusoid and the averaging result is

    asymptotic:  dx/dtau = -u^{1/(r+2)} dtheta*_tau/dtau + x/((r+2) u)
                 - u^{2m/(r+2)} r^2/((r+2)^2 beta^2)
                   * sum_i (k_i alpha_i / 2) e_i dJf/dx_i
    exponential: dx/dtau = -u^{1/2} dtheta*_tau/dtau + x/(2 u)
                 - u^p / (4 lam^2) * sum_i (k_i alpha_i / 2) e_i dJf/dx_i

with u = tau - t0 + 1 and Jf the cost seen through the state transform
x = base(t) * (theta - theta*(t)).  The original-time form is the same
field scaled by the dilation rate d(tau)/dt, so full-versus-averaged
comparisons can run on one clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .controllers import ControllerConfig
from .cost_models import CostFunction
from .errors import NumericError, UnsupportedConfigError
from .schedules import (ASYMPTOTIC, ScheduleParams, contract_time, dilate_time,
                        dilation_rate, make_schedule_fn)

ORIGINAL_TIME = "original-time"
DILATED_TIME = "dilated-time"

#: finite-difference steps for vector-field Jacobians and cost gradients
BRACKET_STEP = 1e-5
_OPT_STEP = 1e-5


def lie_bracket(f: Callable, g: Callable, x: Sequence[float], t: float,
                step: float = BRACKET_STEP) -> np.ndarray:
    """Numeric Lie bracket [f, g](x, t) = (dg/dx) f - (df/dx) g.

    Jacobians are central differences at `step`.  Raises NumericError if
    either field returns non-finite values near x.
    """
    x = np.asarray(x, dtype=float)
    n = x.size

    def _jac(field):
        J = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            J[:, j] = (np.asarray(field(x + e, t), dtype=float)
                       - np.asarray(field(x - e, t), dtype=float)) / (2.0 * step)
        return J

    fx = np.asarray(f(x, t), dtype=float)
    gx = np.asarray(g(x, t), dtype=float)
    out = _jac(g) @ fx - _jac(f) @ gx
    if not np.all(np.isfinite(out)):
        raise NumericError(f"non-finite Lie bracket at x={x.tolist()}, t={t}")
    return out


def transform_state(sched: ScheduleParams, theta_err: Sequence[float], t: float,
                    direction: str = "forward") -> np.ndarray:
    """Scale a tracking error by the growth base: forward multiplies,
    inverse divides.  Requires an uncapped schedule."""
    if sched.caps is not None:
        raise UnsupportedConfigError("transform_state requires an uncapped schedule")
    if t < sched.t0:
        raise ValueError(f"t={t:g} precedes schedule start t0={sched.t0:g}")
    base = make_schedule_fn(sched)(t)[0]
    err = np.asarray(theta_err, dtype=float)
    if direction == "forward":
        return base * err
    if direction == "inverse":
        return err / base
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


@dataclass(frozen=True)
class AveragedSystem:
    """Averaged comparison system for one controller/cost pair.

    `domain` selects the clock of the exposed right-hand side.
    """

    cfg: ControllerConfig
    cost: CostFunction
    domain: str = ORIGINAL_TIME

    def __post_init__(self):
        if self.domain not in (ORIGINAL_TIME, DILATED_TIME):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.cfg.schedule.caps is not None:
            raise UnsupportedConfigError(
                "averaged analysis assumes an unclamped schedule"
            )
        if self.cfg.dim_n != self.cost.dim_n:
            raise ValueError("controller and cost dimensions differ")


def make_averaged_rhs(sys: AveragedSystem) -> Callable[[Sequence[float], float], list]:
    """Build the averaged right-hand side closure for `sys.domain`."""
    cfg, cost = sys.cfg, sys.cost
    sched = cfg.schedule
    t0 = sched.t0
    n = cfg.dim_n
    ka_half = [k * a / 2.0 for k, a in zip(cfg.k, cfg.alpha)]
    cost_eval = cost.eval
    optimizer = cost.optimizer

    if sched.variant == ASYMPTOTIC:
        r, beta = sched.r, sched.beta
        drift_pow = 1.0 / (r + 2.0)
        grad_pow = 2.0 * sched.m / (r + 2.0)
        grad_coef = r * r / ((r + 2.0) ** 2 * beta * beta)
        lin_coef = 1.0 / (r + 2.0)
    else:
        lam = sched.lam
        drift_pow = 0.5
        grad_pow = sched.p
        grad_coef = 1.0 / (4.0 * lam * lam)
        lin_coef = 0.5

    def tau_rhs(x: Sequence[float], tau: float) -> list:
        u = tau - t0 + 1.0
        t = contract_time(sched, tau)
        base = u ** drift_pow
        theta_star = np.asarray(optimizer(t), dtype=float)

        # optimizer drift mapped into the dilated clock
        sp = np.asarray(optimizer(t + _OPT_STEP), dtype=float)
        sm = np.asarray(optimizer(t - _OPT_STEP), dtype=float)
        dstar_dt = (sp - sm) / (2.0 * _OPT_STEP)
        dstar_dtau = dstar_dt / dilation_rate(sched, t)

        # dJf/dx_i by differencing the cost through the inverse transform
        gcoef = grad_coef * u ** grad_pow
        out = []
        h = _OPT_STEP
        for i in range(n):
            zp = [x[j] / base + theta_star[j] for j in range(n)]
            zm = list(zp)
            zp[i] += h / base
            zm[i] -= h / base
            djf = (cost_eval(zp, t) - cost_eval(zm, t)) / (2.0 * h)
            out.append(-base * dstar_dtau[i] + lin_coef * x[i] / u
                       - gcoef * ka_half[i] * djf)
        return out

    if sys.domain == DILATED_TIME:
        return tau_rhs

    def t_rhs(x: Sequence[float], t: float) -> list:
        tau = dilate_time(sched, t)
        rate = dilation_rate(sched, t)
        return [v * rate for v in tau_rhs(x, tau)]

    return t_rhs


def averaged_rhs(sys: AveragedSystem, theta_f_bar: Sequence[float],
                 t: float) -> np.ndarray:
    """Averaged comparison field at state theta_f_bar and clock value t
    (original time or dilated time, per sys.domain)."""
    if len(theta_f_bar) != sys.cfg.dim_n:
        raise ValueError(
            f"state has length {len(theta_f_bar)}, expected {sys.cfg.dim_n}"
        )
    return np.array(make_averaged_rhs(sys)(theta_f_bar, t))


@dataclass(frozen=True)
class LemmaOneParams:
    """Parameters of the scalar decay system
    dV/dt = -eps_a * mu^{m1}(t) * V + eps_b * mu^{m2}(t),
    mu(t) = 1 + beta*(t - t0)."""

    eps_a: float
    eps_b: float
    m1: float
    m2: float
    beta: float
    t0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if not self.m1 > self.m2:
            raise ValueError("m1 must exceed m2")
        if self.m1 < -1.0:
            raise ValueError("m1 must be >= -1")
        if not self.eps_a > self.beta * (self.m1 - self.m2):
            raise ValueError("eps_a must exceed beta * (m1 - m2)")
        if self.v0 < 0:
            raise ValueError("v0 must be >= 0")


def lemma1_bound(params: LemmaOneParams, t: float) -> float:
    """Closed-form decay bound on |V(t)| from the quadratic comparison
    function of the transformed state."""
    mu = 1.0 + params.beta * (t - params.t0)
    eps_c = params.eps_a - params.beta * (params.m1 - params.m2)
    ups0 = 0.5 * params.v0 * params.v0
    offset = 0.0
    if params.eps_b != 0.0:
        offset = params.eps_b ** 2 / (2.0 * eps_c ** 2)
    if abs(params.m1 + 1.0) < 1e-12:
        ups = mu ** (-eps_c / params.beta) * ups0 + offset
    else:
        expo = eps_c / ((params.m1 + 1.0) * params.beta) * (mu ** (params.m1 + 1.0) - 1.0)
        ups = math.exp(-expo) * ups0 + offset
    return math.sqrt(2.0 * ups) / mu ** (params.m1 - params.m2)


def lemma1_trajectory(params: LemmaOneParams, t_grid: Sequence[float],
                      dt: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the scalar decay system over t_grid.

    Returns (V values, closed-form bound values) at the grid points.  The
    grid must start at t0 and be strictly increasing; integration uses
    fixed-step RK4 with substeps of at most `dt`.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if abs(grid[0] - params.t0) > 1e-12:
        raise ValueError("t_grid must start at t0")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("t_grid must be strictly increasing")

    beta, t0 = params.beta, params.t0
    ea, eb, m1, m2 = params.eps_a, params.eps_b, params.m1, params.m2

    def f(v: float, t: float) -> float:
        mu = 1.0 + beta * (t - t0)
        return -ea * mu ** m1 * v + eb * mu ** m2

    v = float(params.v0)
    values = [v]
    t = float(grid[0])
    for target in grid[1:]:
        while t < target - 1e-15:
            h = min(dt, target - t)
            k1 = f(v, t)
            k2 = f(v + 0.5 * h * k1, t + 0.5 * h)
            k3 = f(v + 0.5 * h * k2, t + 0.5 * h)
            k4 = f(v + h * k3, t + h)
            v += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
            t += h
        t = float(target)
        values.append(v)
    bounds = np.array([lemma1_bound(params, float(tt)) for tt in grid])
    return np.array(values), bounds
