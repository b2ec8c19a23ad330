import numpy as np
import pytest

from estrack import (ControllerConfig, CostFunction, asymptotic_schedule,
                     exponential_schedule, get_fixture)


@pytest.fixture(scope="session")
def sec6_cost():
    return get_fixture("quadratic_tv_sec6")


@pytest.fixture(scope="session")
def const_cost():
    return get_fixture("quadratic_constant")


@pytest.fixture(scope="session")
def sec6_config():
    """The reference exponential parameter set."""
    return ControllerConfig(
        dim_n=2, omega=10.0, omega_hat=(1.0, 1.2), alpha=(0.015, 0.02),
        k=(10.0, 11.0), schedule=exponential_schedule(lam=0.1, p=0.51))


@pytest.fixture(scope="session")
def const_asym_config():
    """Asymptotic law on the constant-optimum quadratic, passing gains."""
    return ControllerConfig(
        dim_n=2, omega=10.0, omega_hat=(1.0, 1.5), alpha=(1.0, 1.0),
        k=(3.0, 3.0), schedule=asymptotic_schedule(beta=1.0, r=2.0, m=0.5))


def make_concave_cost() -> CostFunction:
    """Concave bowl; violates strong convexity everywhere."""
    return CostFunction(
        name="concave",
        dim_n=2,
        eval=lambda theta, t: -(theta[0] * theta[0] + theta[1] * theta[1]),
        optimizer=lambda t: np.zeros(2),
        optimum_value=lambda t: 0.0,
        domain_box=((-1.0, 1.0), (-1.0, 1.0)),
    )


def make_origin_quadratic(n: int = 2) -> CostFunction:
    """|theta|^2 with the optimum at the origin."""
    def _eval(theta, t):
        return float(sum(v * v for v in theta))

    return CostFunction(
        name="origin_quadratic",
        dim_n=n,
        eval=_eval,
        optimizer=lambda t: np.zeros(n),
        optimum_value=lambda t: 0.0,
        domain_box=tuple((-2.0, 2.0) for _ in range(n)),
        grad=lambda theta, t: 2.0 * np.asarray(theta, dtype=float),
    )
