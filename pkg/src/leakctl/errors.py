"""Exception hierarchy shared by all leakctl modules."""


class LeakctlError(Exception):
    """Base class for all errors raised by this package."""


class DimError(LeakctlError):
    """Operands have incompatible dimensions."""


class LabelError(LeakctlError):
    """A basis label is unknown for the given operator."""


class InvalidOperator(LeakctlError):
    """Operator entries are non-finite or otherwise unusable."""


class ConfigError(LeakctlError):
    """A configuration value violates its contract."""


class DegenerateTrajectory(LeakctlError):
    """A trajectory segment requires azimuthal motion where none is possible."""


class SingularAnharmonicity(LeakctlError):
    """Derivative-correction fields diverge at zero anharmonicity."""


class IntegrationError(LeakctlError):
    """A time integration diverged or drifted beyond tolerance."""


class FitError(LeakctlError):
    """Least-squares design matrix is rank deficient."""


class OptError(LeakctlError):
    """Objective returned a non-finite value during optimization."""


class DivergentDuration(LeakctlError):
    """Requested gate duration is infinite for the given parameters."""
