"""Time-varying gain and frequency schedules for both ES variants.

Each variant is driven by a scalar growth function, the "base": an
algebraic power law ``(1 + beta*(t - t0))**(1/r)`` for the asymptotic
design and ``exp(lam*(t - t0))`` for the exponential one.  The dither
amplitude gain ``nu``, the warped phase time ``eta``, and the
demodulation gain ``phi_gain`` are fixed powers of the base:

    asymptotic:   nu = base**m,  eta = t0 + base**(r+2) - 1,  phi_gain = base**2
    exponential:  nu = base**p,  eta = t0 + base**2 - 1,      phi_gain = base**2

Optional saturation clamps each gain at a cap and freezes its growth;
once the phase rate ``deta_dt`` saturates, ``eta`` keeps growing linearly
so the dither phase stays continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import ScheduleOverflowError, UnsupportedConfigError

ASYMPTOTIC = "asymptotic"
EXPONENTIAL = "exponential"

#: Any schedule component above this value raises ScheduleOverflowError.
OVERFLOW_LIMIT = 1e12


@dataclass(frozen=True)
class SaturationCaps:
    """Clamp levels for the schedule components (None leaves one unclamped)."""

    nu_max: Optional[float] = None
    phi_max: Optional[float] = None
    freq_max: Optional[float] = None


@dataclass(frozen=True)
class ScheduleParams:
    """Parameters of one schedule variant.

    Asymptotic uses (beta, r, m); exponential uses (lam, p).  The exponent
    m or p is range-checked by the gain-condition report, not at
    construction.
    """

    variant: str
    t0: float = 0.0
    beta: Optional[float] = None
    r: Optional[float] = None
    m: Optional[float] = None
    lam: Optional[float] = None
    p: Optional[float] = None
    caps: Optional[SaturationCaps] = None

    def __post_init__(self):
        if self.variant not in (ASYMPTOTIC, EXPONENTIAL):
            raise ValueError(f"unknown schedule variant {self.variant!r}")
        if self.t0 < 0:
            raise ValueError("t0 must be >= 0")
        if self.variant == ASYMPTOTIC:
            if self.beta is None or self.r is None or self.m is None:
                raise ValueError("asymptotic schedule requires beta, r and m")
            if self.beta <= 0 or self.r <= 0:
                raise ValueError("beta and r must be > 0")
        else:
            if self.lam is None or self.p is None:
                raise ValueError("exponential schedule requires lam and p")
            if self.lam <= 0:
                raise ValueError("lam must be > 0")
        if self.caps is not None:
            c = self.caps
            if c.nu_max is not None and c.nu_max <= 1.0:
                raise ValueError("nu_max must exceed nu(t0) = 1")
            if c.phi_max is not None and c.phi_max <= 1.0:
                raise ValueError("phi_max must exceed phi_gain(t0) = 1")
            if c.freq_max is not None and c.freq_max <= self.deta_dt0:
                raise ValueError(
                    f"freq_max must exceed deta_dt(t0) = {self.deta_dt0:g}"
                )

    @property
    def deta_dt0(self) -> float:
        """Phase rate d(eta)/dt at t = t0."""
        if self.variant == ASYMPTOTIC:
            return (self.r + 2.0) / self.r * self.beta
        return 2.0 * self.lam


@dataclass(frozen=True)
class ScheduleSample:
    """Schedule components evaluated at one instant."""

    nu: float
    eta: float
    deta_dt: float
    phi_gain: float
    base: float
    saturated: bool


def asymptotic_schedule(beta: float, r: float, m: float, t0: float = 0.0,
                        caps: Optional[SaturationCaps] = None) -> ScheduleParams:
    return ScheduleParams(variant=ASYMPTOTIC, t0=t0, beta=beta, r=r, m=m, caps=caps)


def exponential_schedule(lam: float, p: float, t0: float = 0.0,
                         caps: Optional[SaturationCaps] = None) -> ScheduleParams:
    return ScheduleParams(variant=EXPONENTIAL, t0=t0, lam=lam, p=p, caps=caps)


_LOG_LIMIT = math.log(OVERFLOW_LIMIT)


def make_schedule_fn(sched: ScheduleParams) -> Callable[[float], tuple]:
    """Build the fast evaluator ``f(t) -> (base, nu, eta, deta_dt, phi_gain, saturated)``.

    This closure is the single source of truth for schedule arithmetic;
    eval_schedule, the controller laws and the step policy all go through
    it so saturation and overflow behave identically everywhere.
    """
    t0 = sched.t0
    caps = sched.caps or SaturationCaps()
    nu_max, phi_max, freq_max = caps.nu_max, caps.phi_max, caps.freq_max

    if sched.variant == ASYMPTOTIC:
        beta, r, m = sched.beta, sched.r, sched.m
        inv_r = 1.0 / r
        e_nu = m / r
        e_phi = 2.0 / r
        e_eta = (r + 2.0) / r
        c_deta = (r + 2.0) / r * beta
        # freeze instant for the phase rate, if a frequency cap is set
        if freq_max is not None:
            u_f = (freq_max / c_deta) ** (r / 2.0)
            t_freeze = t0 + (u_f - 1.0) / beta
            eta_freeze = t0 + u_f ** e_eta - 1.0
        else:
            t_freeze = eta_freeze = None

        def schedule_fn(t: float) -> tuple:
            u = 1.0 + beta * (t - t0)
            log_u = math.log(u)
            saturated = False

            if log_u * inv_r > _LOG_LIMIT:
                raise ScheduleOverflowError("base", t, OVERFLOW_LIMIT)
            base = u ** inv_r

            if e_nu > 0 and nu_max is not None and log_u * e_nu >= math.log(nu_max):
                nu = nu_max
                saturated = True
            else:
                if log_u * e_nu > _LOG_LIMIT:
                    raise ScheduleOverflowError("nu", t, OVERFLOW_LIMIT)
                nu = u ** e_nu

            if t_freeze is not None and t > t_freeze:
                eta = eta_freeze + freq_max * (t - t_freeze)
                deta = freq_max
                saturated = True
            else:
                if log_u * e_eta > _LOG_LIMIT:
                    raise ScheduleOverflowError("eta", t, OVERFLOW_LIMIT)
                eta = t0 + u ** e_eta - 1.0
                deta = c_deta * u ** e_phi
            if eta > OVERFLOW_LIMIT:
                raise ScheduleOverflowError("eta", t, OVERFLOW_LIMIT)

            if phi_max is not None and log_u * e_phi >= math.log(phi_max):
                phi = phi_max
                saturated = True
            else:
                if log_u * e_phi > _LOG_LIMIT:
                    raise ScheduleOverflowError("phi_gain", t, OVERFLOW_LIMIT)
                phi = u ** e_phi

            if deta > OVERFLOW_LIMIT:
                raise ScheduleOverflowError("deta_dt", t, OVERFLOW_LIMIT)
            return base, nu, eta, deta, phi, saturated

    else:
        lam, p = sched.lam, sched.p
        two_lam = 2.0 * lam
        if freq_max is not None:
            t_freeze = t0 + math.log(freq_max / two_lam) / two_lam
            eta_freeze = t0 + freq_max / two_lam - 1.0
        else:
            t_freeze = eta_freeze = None

        def schedule_fn(t: float) -> tuple:
            z = lam * (t - t0)
            saturated = False

            if z > _LOG_LIMIT:
                raise ScheduleOverflowError("base", t, OVERFLOW_LIMIT)
            base = math.exp(z)

            if p > 0 and nu_max is not None and p * z >= math.log(nu_max):
                nu = nu_max
                saturated = True
            else:
                if p * z > _LOG_LIMIT:
                    raise ScheduleOverflowError("nu", t, OVERFLOW_LIMIT)
                nu = base ** p

            if t_freeze is not None and t > t_freeze:
                eta = eta_freeze + freq_max * (t - t_freeze)
                deta = freq_max
                saturated = True
            else:
                if 2.0 * z > _LOG_LIMIT:
                    raise ScheduleOverflowError("eta", t, OVERFLOW_LIMIT)
                sq = base * base
                eta = t0 + sq - 1.0
                deta = two_lam * sq
            if eta > OVERFLOW_LIMIT:
                raise ScheduleOverflowError("eta", t, OVERFLOW_LIMIT)

            if phi_max is not None and 2.0 * z >= math.log(phi_max):
                phi = phi_max
                saturated = True
            else:
                if 2.0 * z > _LOG_LIMIT:
                    raise ScheduleOverflowError("phi_gain", t, OVERFLOW_LIMIT)
                phi = base * base

            if deta > OVERFLOW_LIMIT:
                raise ScheduleOverflowError("deta_dt", t, OVERFLOW_LIMIT)
            return base, nu, eta, deta, phi, saturated

    return schedule_fn


def eval_schedule(sched: ScheduleParams, t: float) -> ScheduleSample:
    """Evaluate all schedule components at time t (t >= t0)."""
    if t < sched.t0:
        raise ValueError(f"t={t:g} precedes schedule start t0={sched.t0:g}")
    base, nu, eta, deta, phi, saturated = make_schedule_fn(sched)(t)
    return ScheduleSample(nu=nu, eta=eta, deta_dt=deta, phi_gain=phi,
                          base=base, saturated=saturated)


def _require_uncapped(sched: ScheduleParams, what: str):
    if sched.caps is not None:
        raise UnsupportedConfigError(
            f"{what} is an analysis transform and requires an uncapped schedule"
        )


def dilate_time(sched: ScheduleParams, t: float) -> float:
    """Map original time t to the dilated clock in which the dither has
    constant frequency."""
    _require_uncapped(sched, "dilate_time")
    if t < sched.t0:
        raise ValueError(f"t={t:g} precedes schedule start t0={sched.t0:g}")
    t0 = sched.t0
    if sched.variant == ASYMPTOTIC:
        u = 1.0 + sched.beta * (t - t0)
        return t0 + u ** ((sched.r + 2.0) / sched.r) - 1.0
    # same arithmetic as the eta component so eta(t) == dilate_time(t) bit-exactly
    base = math.exp(sched.lam * (t - t0))
    return t0 + base * base - 1.0


def contract_time(sched: ScheduleParams, tau: float) -> float:
    """Exact inverse of dilate_time."""
    _require_uncapped(sched, "contract_time")
    if tau < sched.t0:
        raise ValueError(f"tau={tau:g} precedes schedule start t0={sched.t0:g}")
    t0 = sched.t0
    if sched.variant == ASYMPTOTIC:
        return t0 + ((tau - t0 + 1.0) ** (sched.r / (sched.r + 2.0)) - 1.0) / sched.beta
    return t0 + math.log(tau - t0 + 1.0) / (2.0 * sched.lam)


def dilation_rate(sched: ScheduleParams, t: float) -> float:
    """Analytic d(tau)/dt of the time dilation at original time t."""
    _require_uncapped(sched, "dilation_rate")
    if t < sched.t0:
        raise ValueError(f"t={t:g} precedes schedule start t0={sched.t0:g}")
    if sched.variant == ASYMPTOTIC:
        u = 1.0 + sched.beta * (t - sched.t0)
        return (sched.r + 2.0) / sched.r * sched.beta * u ** (2.0 / sched.r)
    return 2.0 * sched.lam * math.exp(2.0 * sched.lam * (t - sched.t0))
