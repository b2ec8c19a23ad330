"""Time-varying cost maps with known optimizer paths.

Every fixture exposes the measured output J(theta, t), the analytic
optimizer path theta_star(t) and optimum value y_star(t) (verification
only, never fed back to a controller), and a compact box on which the
convexity and boundedness assumptions are checked by sampling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

#: central-difference steps, tuned for O(1)-scaled fixtures
GRAD_STEP = 1e-5
HESS_STEP = 1e-4
#: points closer than this to theta_star are excluded from the kappa_1 ratio
EXCLUSION_RADIUS = 1e-6


@dataclass(frozen=True)
class CostFunction:
    """A cost map y = J(theta, t) with a known reference optimizer.

    `eval` accepts any float sequence of length dim_n and must be pure and
    thread-safe.  `grad` is an optional analytic gradient used only by
    consistency tests.
    """

    name: str
    dim_n: int
    eval: Callable[[Sequence[float], float], float]
    optimizer: Callable[[float], np.ndarray]
    optimum_value: Callable[[float], float]
    domain_box: tuple[tuple[float, float], ...]
    grad: Optional[Callable[[Sequence[float], float], np.ndarray]] = None


@dataclass(frozen=True)
class GridSpec:
    """Deterministic sampling lattice for assumption checks."""

    points_per_axis: int = 10
    time_samples: int = 20

    def __post_init__(self):
        if self.points_per_axis < 10:
            raise ValueError("grid needs >= 10 points per axis")
        if self.time_samples < 20:
            raise ValueError("grid needs >= 20 time samples")


@dataclass(frozen=True)
class AssumptionReport:
    """Sampled evidence for the convexity and boundedness assumptions.

    kappa1_hat is the smallest observed ratio (theta - theta*)' grad J /
    |theta - theta*|^2, kappa2_hat the largest sampled Hessian spectral
    norm.  The M bounds are recorded for documentation and never gate an
    experiment.  m_theta_hat covers the observable optimizer-path part of
    the boundedness sum; m_j_hat uses time partials of J in place of the
    unobservable internal-parameter partials.
    """

    kappa1_hat: float
    kappa2_hat: float
    m_theta_hat: float
    m_j_hat: float
    violations: tuple[tuple[float, tuple[float, ...], str], ...]

    @property
    def passing(self) -> bool:
        return len(self.violations) == 0


def eval_cost(cost: CostFunction, theta: Sequence[float], t: float) -> float:
    """Measured output y = J(theta, t)."""
    if len(theta) != cost.dim_n:
        raise ValueError(
            f"theta has length {len(theta)}, expected dim_n={cost.dim_n}"
        )
    return float(cost.eval(theta, t))


def optimizer_ref(cost: CostFunction, t: float) -> tuple[np.ndarray, float]:
    """Analytic (theta_star(t), y_star(t)); for verification only."""
    return np.asarray(cost.optimizer(t), dtype=float), float(cost.optimum_value(t))


def central_gradient(f: Callable, theta: Sequence[float], t: float,
                     h: float = GRAD_STEP) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = np.empty(theta.size)
    for i in range(theta.size):
        e = np.zeros(theta.size)
        e[i] = h
        g[i] = (f(theta + e, t) - f(theta - e, t)) / (2.0 * h)
    return g


def central_hessian(f: Callable, theta: Sequence[float], t: float,
                    h: float = HESS_STEP) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    H = np.empty((n, n))
    f0 = f(theta, t)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (f(theta + ei, t) - 2.0 * f0 + f(theta - ei, t)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (
                f(theta + ei + ej, t) - f(theta + ei - ej, t)
                - f(theta - ei + ej, t) + f(theta - ei - ej, t)
            ) / (4.0 * h * h)
    return H


def _optimizer_derivatives(cost: CostFunction, t: float,
                           h: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    tp = np.asarray(cost.optimizer(t + h), dtype=float)
    tm = np.asarray(cost.optimizer(t - h), dtype=float)
    tc = np.asarray(cost.optimizer(t), dtype=float)
    d1 = (tp - tm) / (2.0 * h)
    d2 = (tp - 2.0 * tc + tm) / (h * h)
    return d1, d2


def verify_assumptions(cost: CostFunction, t_range: tuple[float, float],
                       grid: GridSpec = GridSpec()) -> AssumptionReport:
    """Estimate the convexity constants and boundedness sums on a lattice.

    Every sampled point with (theta - theta*)' grad J <= 0 outside the
    exclusion radius, or with J(theta*) > J(theta), is recorded as a
    violation and marks the report failing.
    """
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    if not t_hi > t_lo:
        raise ValueError("t_range must satisfy t_hi > t_lo")
    for lo, hi in cost.domain_box:
        if not hi > lo:
            raise ValueError("domain_box must be non-degenerate on every axis")

    axes = [np.linspace(lo, hi, grid.points_per_axis) for lo, hi in cost.domain_box]
    times = np.linspace(t_lo, t_hi, grid.time_samples)
    thetas = [np.array(p) for p in itertools.product(*axes)]

    kappa1 = math.inf
    kappa2 = 0.0
    m_theta = 0.0
    m_j = 0.0
    violations: list[tuple[float, tuple[float, ...], str]] = []

    for t in times:
        t = float(t)
        theta_star = np.asarray(cost.optimizer(t), dtype=float)
        y_star = float(cost.eval(theta_star, t))
        d1, d2 = _optimizer_derivatives(cost, t)
        m_theta = max(
            m_theta,
            float(np.linalg.norm(theta_star) + np.linalg.norm(d1) + np.linalg.norm(d2)),
        )
        for theta in thetas:
            y = float(cost.eval(theta, t))
            if y_star - y > 1e-12 * max(1.0, abs(y)):
                violations.append((t, tuple(theta), "minimality"))

            g = central_gradient(cost.eval, theta, t)
            d = theta - theta_star
            dn2 = float(d @ d)
            if dn2 >= EXCLUSION_RADIUS ** 2:
                s = float(d @ g)
                if s <= 0.0:
                    violations.append((t, tuple(theta), "strong-convexity"))
                else:
                    kappa1 = min(kappa1, s / dn2)

            H = central_hessian(cost.eval, theta, t)
            kappa2 = max(kappa2, float(np.linalg.norm(H, 2)))

            # observable stand-ins for the bound on J and its partials
            ht = 1e-5
            dj_dt = (cost.eval(theta, t + ht) - cost.eval(theta, t - ht)) / (2.0 * ht)
            gp = central_gradient(cost.eval, theta, t + ht)
            gm = central_gradient(cost.eval, theta, t - ht)
            mixed = float(np.linalg.norm((gp - gm) / (2.0 * ht)))
            m_j = max(m_j, abs(y) + abs(dj_dt) + mixed)

    if not math.isfinite(kappa1):
        kappa1 = 0.0
    return AssumptionReport(
        kappa1_hat=kappa1,
        kappa2_hat=kappa2,
        m_theta_hat=m_theta,
        m_j_hat=m_j,
        violations=tuple(violations),
    )


def quadratic_tv_sec6() -> CostFunction:
    """Planar quadratic with sinusoidally moving optimum and drifting
    optimal value; the standard demo problem for both ES variants."""

    def _eval(theta, t):
        d1 = theta[0] + 1.0 - 0.2 * math.sin(0.7 * t)
        d2 = theta[1] - 1.0 - 0.3 * math.cos(0.8 * t)
        return 0.2 * math.sin(0.5 * t) + d1 * d1 + d2 * d2

    def _opt(t):
        return np.array([-1.0 + 0.2 * math.sin(0.7 * t),
                         1.0 + 0.3 * math.cos(0.8 * t)])

    def _grad(theta, t):
        return np.array([
            2.0 * (theta[0] + 1.0 - 0.2 * math.sin(0.7 * t)),
            2.0 * (theta[1] - 1.0 - 0.3 * math.cos(0.8 * t)),
        ])

    return CostFunction(
        name="quadratic_tv_sec6",
        dim_n=2,
        eval=_eval,
        optimizer=_opt,
        optimum_value=lambda t: 0.2 * math.sin(0.5 * t),
        domain_box=((-2.0, 0.0), (0.0, 2.0)),
        grad=_grad,
    )


def quadratic_constant(center: Sequence[float] = (0.5, -0.5)) -> CostFunction:
    """Isotropic quadratic |theta - c|^2 with a constant optimizer."""
    c = np.asarray(center, dtype=float)
    n = c.size

    def _eval(theta, t):
        s = 0.0
        for i in range(n):
            d = theta[i] - c[i]
            s += d * d
        return s

    return CostFunction(
        name="quadratic_constant",
        dim_n=n,
        eval=_eval,
        optimizer=lambda t: c.copy(),
        optimum_value=lambda t: 0.0,
        domain_box=tuple((ci - 2.0, ci + 2.0) for ci in c),
        grad=lambda theta, t: 2.0 * (np.asarray(theta, dtype=float) - c),
    )


def quadratic_aniso() -> CostFunction:
    """Quadratic with distinct axis curvatures (1 and 3)."""
    a = np.array([1.0, 3.0])
    c = np.array([0.3, -0.2])

    def _eval(theta, t):
        d1 = theta[0] - c[0]
        d2 = theta[1] - c[1]
        return a[0] * d1 * d1 + a[1] * d2 * d2

    return CostFunction(
        name="quadratic_aniso",
        dim_n=2,
        eval=_eval,
        optimizer=lambda t: c.copy(),
        optimum_value=lambda t: 0.0,
        domain_box=((-2.0, 2.0), (-2.0, 2.0)),
        grad=lambda theta, t: 2.0 * a * (np.asarray(theta, dtype=float) - c),
    )


FIXTURES: dict[str, Callable[[], CostFunction]] = {
    "quadratic_tv_sec6": quadratic_tv_sec6,
    "quadratic_constant": quadratic_constant,
    "quadratic_aniso": quadratic_aniso,
}


def get_fixture(name: str) -> CostFunction:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ValueError(
            f"unknown cost fixture {name!r}; available: {sorted(FIXTURES)}"
        ) from None
