"""Exception types shared across the package.

Everything user-facing derives from ValueError or RuntimeError so callers can
catch broadly; the CLI maps ConfigError/ParameterError to exit code 2 and the
runtime failures to exit code 1.
"""


class DomainError(ValueError):
    """A point violates the domain a quantity needs (e.g. a vanishing gap)."""


class ParameterError(ValueError):
    """A parameter combination is invalid or infeasible."""


class ConfigError(ValueError):
    """An experiment config file is malformed; message names the field."""


class IntegratorError(RuntimeError):
    """The SDE integrator produced an invalid state."""

    def __init__(self, message: str, step_index: int | None = None):
        if step_index is not None:
            message = f"{message} (step {step_index})"
        super().__init__(message)
        self.step_index = step_index


class FitError(RuntimeError):
    """A decay-rate fit had too little usable data."""


class EstimatorError(RuntimeError):
    """A Monte Carlo estimator failed its own validity checks."""
