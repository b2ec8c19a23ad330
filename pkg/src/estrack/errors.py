"""Exception types shared across the package."""


class EstrackError(Exception):
    """Base class for all package-specific errors."""


class ScheduleOverflowError(EstrackError):
    """A schedule component grew past the overflow guard.

    `component` names the first offending quantity ("base", "nu", "eta",
    "phi_gain" or "deta_dt").
    """

    def __init__(self, component: str, t: float, limit: float):
        self.component = component
        self.t = t
        self.limit = limit
        super().__init__(
            f"schedule component '{component}' exceeds overflow guard "
            f"{limit:g} at t={t:g}"
        )


class UnsupportedConfigError(EstrackError):
    """The requested operation does not support this configuration."""


class NumericError(EstrackError):
    """A numeric routine encountered non-finite intermediate values."""


class DivergenceError(EstrackError):
    """The integrated state became non-finite."""

    def __init__(self, last_valid_time: float):
        self.last_valid_time = last_valid_time
        super().__init__(
            f"state became non-finite; last valid time t={last_valid_time:g}"
        )


class StepUnderflowError(EstrackError):
    """The step policy would require a step below dt_min."""

    def __init__(self, t: float, needed_dt: float, dt_min: float):
        self.t = t
        self.needed_dt = needed_dt
        self.dt_min = dt_min
        super().__init__(
            f"required step {needed_dt:g} below dt_min {dt_min:g} at t={t:g}"
        )


class InsufficientDataError(EstrackError):
    """Not enough structure in the data to perform the requested fit."""


class ConfigError(EstrackError):
    """An experiment config failed to parse or validate.

    `path` points at the offending key, e.g. "controller.k".
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
