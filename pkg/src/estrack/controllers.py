"""The two ES control laws and their gain-condition validators.

Both laws share one shape: a bank of dithered channels

    dtheta_i/dt = nu(t) * sqrt(alpha_i * omega_i)
                  * cos(omega_i * eta(t) + k_i * phi_gain(t) * y)

driven only by the measured output y.  The schedule supplies nu, eta and
phi_gain, so saturation caps act on the law exactly as on the reported
schedule samples.  The controller holds no internal state; theta evolves
purely by integrating this right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .schedules import ASYMPTOTIC, ScheduleParams, make_schedule_fn

#: multipliers closer than this relative gap count as duplicates
_MIN_RELATIVE_GAP = 1e-9


@dataclass(frozen=True)
class ControllerConfig:
    """Full parameterization of one ES loop; the variant is implied by the
    schedule."""

    dim_n: int
    omega: float
    omega_hat: tuple[float, ...]
    alpha: tuple[float, ...]
    k: tuple[float, ...]
    schedule: ScheduleParams

    def __post_init__(self):
        object.__setattr__(self, "omega_hat", tuple(float(v) for v in self.omega_hat))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        if self.dim_n < 1:
            raise ValueError("dim_n must be a positive integer")
        if self.omega <= 0:
            raise ValueError("omega must be > 0")
        for name, vec in (("omega_hat", self.omega_hat), ("alpha", self.alpha),
                          ("k", self.k)):
            if len(vec) != self.dim_n:
                raise ValueError(
                    f"{name} has length {len(vec)}, expected dim_n={self.dim_n}"
                )
        if any(v <= 0 for v in self.alpha) or any(v <= 0 for v in self.k):
            raise ValueError("alpha and k entries must be > 0")
        if any(v <= 0 for v in self.omega_hat):
            raise ValueError("omega_hat entries must be > 0")
        for i in range(self.dim_n):
            for j in range(i + 1, self.dim_n):
                wi, wj = self.omega_hat[i], self.omega_hat[j]
                if abs(wi - wj) < _MIN_RELATIVE_GAP * max(abs(wi), abs(wj)):
                    raise ValueError(
                        f"omega_hat multipliers at indices {i} and {j} collide "
                        f"({wi!r} vs {wj!r})"
                    )


@dataclass(frozen=True)
class ConditionReport:
    """Pass/fail evidence for one convergence gain condition.

    thresholds[i] is the required lower bound for k_i * alpha_i (or k_i
    alone under the literal reading of the exponential time-varying
    condition); margins[i] is the checked quantity minus the threshold.
    """

    regime: str
    exponent_ok: bool
    thresholds: tuple[float, ...]
    margins: tuple[float, ...]
    passed: bool


def derive_frequencies(cfg: ControllerConfig) -> np.ndarray:
    """Per-channel dither frequencies omega_i = omega * omega_hat_i."""
    return cfg.omega * np.asarray(cfg.omega_hat)


@lru_cache(maxsize=128)
def make_es_rhs(cfg: ControllerConfig) -> Callable[[Sequence[float], float, float], list]:
    """Build the fast closure ``f(theta, y, t) -> dtheta/dt`` (list of floats).

    The public es_rhs wraps this; run_es calls it directly in the
    integration hot loop.
    """
    sched_fn = make_schedule_fn(cfg.schedule)
    omegas = [cfg.omega * w for w in cfg.omega_hat]
    amps = [math.sqrt(a * w) for a, w in zip(cfg.alpha, omegas)]
    ks = list(cfg.k)
    n = cfg.dim_n
    cos = math.cos

    def rhs(theta: Sequence[float], y: float, t: float) -> list:
        _base, nu, eta, _deta, phi, _sat = sched_fn(t)
        ky = phi * y
        return [nu * amps[i] * cos(omegas[i] * eta + ks[i] * ky) for i in range(n)]

    return rhs


def es_rhs(cfg: ControllerConfig, theta: Sequence[float], y: float,
           t: float) -> np.ndarray:
    """Control law right-hand side at (theta, y, t).

    Pure output feedback: theta enters only through the caller-supplied
    measurement y, never through any cost internals.
    """
    if len(theta) != cfg.dim_n:
        raise ValueError(
            f"theta has length {len(theta)}, expected dim_n={cfg.dim_n}"
        )
    return np.array(make_es_rhs(cfg)(theta, float(y), t))


def instantaneous_frequencies(cfg: ControllerConfig, t: float) -> np.ndarray:
    """Per-channel dither rates omega_i * d(eta)/dt in rad/s."""
    _base, _nu, _eta, deta, _phi, _sat = make_schedule_fn(cfg.schedule)(t)
    return derive_frequencies(cfg) * deta


def check_gain_conditions(cfg: ControllerConfig, kappa1: float, regime: str,
                          literal_k: bool = False) -> ConditionReport:
    """Evaluate the convergence gain inequalities for the given regime.

    regime is "constant" (fixed optimizer) or "time_varying".  For the
    exponential law in the time-varying regime the product k_i * alpha_i
    is checked against 8*lam^2*p/kappa1 by default; literal_k=True checks
    k_i alone against the same threshold instead.
    """
    if kappa1 <= 0:
        raise ValueError("kappa1 must be > 0")
    regime = regime.replace("-", "_")
    if regime not in ("constant", "time_varying"):
        raise ValueError(f"unknown regime {regime!r}")

    sched = cfg.schedule
    quantities = [k * a for k, a in zip(cfg.k, cfg.alpha)]

    if sched.variant == ASYMPTOTIC:
        beta, r, m = sched.beta, sched.r, sched.m
        if regime == "constant":
            exponent_ok = -r / 2.0 <= m <= 1.0
            thr = 2.0 * (r + 2.0) ** 2 * beta ** 3 / (r ** 3 * kappa1)
        else:
            exponent_ok = 0.5 < m <= 1.0
            thr = (2.0 * (r + 2.0) ** 2 * (2.0 * m * r - r + 1.0) * beta ** 3
                   / (r ** 3 * kappa1))
    else:
        lam, p = sched.lam, sched.p
        if regime == "constant":
            exponent_ok = 0.0 <= p <= 1.0
            thr = 4.0 * lam ** 2 / kappa1
        else:
            exponent_ok = 0.5 < p <= 1.0
            thr = 8.0 * lam ** 2 * p / kappa1
            if literal_k:
                quantities = list(cfg.k)

    thresholds = tuple(thr for _ in range(cfg.dim_n))
    margins = tuple(q - thr for q in quantities)
    passed = exponent_ok and all(mg > 0.0 for mg in margins)
    return ConditionReport(regime=regime, exponent_ok=exponent_ok,
                           thresholds=thresholds, margins=margins, passed=passed)
