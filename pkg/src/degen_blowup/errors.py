"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A numeric parameter violates its admissible range."""


class DomainError(ValueError):
    """A point or geometric datum lies outside the domain it refers to."""


class BoundaryEvaluationError(ValueError):
    """A weight was evaluated at the boundary where it is singular or vanishes."""


class OrderingError(ValueError):
    """A lower bound field exceeds its upper bound field somewhere."""


class AssemblyError(RuntimeError):
    """A non-finite value appeared while assembling a discrete operator."""


class LinearSolveError(RuntimeError):
    """Tridiagonal elimination hit a vanishing or non-finite pivot."""


class ActivationRadiusError(RuntimeError):
    """The activation-radius root could not be bracketed inside the domain."""


class FitError(RuntimeError):
    """A rate fit was requested on data that cannot support it."""


class CertificationError(RuntimeError):
    """A computed field failed its two-sided bound certificate."""


class ConfigError(ValueError):
    """A run configuration file is malformed or violates a precondition."""
