"""Exception types shared across the package."""


class TeichLabError(Exception):
    """Base class for all package-specific errors."""


class NotIrreducible(TeichLabError):
    """Operation requires an irreducible permutation."""


class NotTypeW(TeichLabError):
    """Operation requires a type-W permutation."""


class DimensionMismatch(TeichLabError):
    """Vector/matrix sizes do not agree."""


class OutOfDomain(TeichLabError):
    """Point lies outside [0, total)."""


class DegenerateGeometry(TeichLabError):
    """A polygon collapsed under a linear map."""


class BudgetExceeded(TeichLabError):
    """Unfolding search exceeded its node budget."""


class QuadratureUnstable(TeichLabError):
    """Integrand varies too wildly between adjacent quadrature nodes."""


class InvalidSuspension(TeichLabError):
    """Suspension data violates the sign/positivity conditions."""


class SingularTrajectory(TeichLabError):
    """A traced trajectory hit a cone point."""


class InconsistentLevels(TeichLabError):
    """Cover accumulation received masks with unusable level structure."""


class InsufficientLevels(TeichLabError):
    """Dimension fit needs at least three cover levels."""


class ConfigError(TeichLabError):
    """Experiment configuration failed validation."""
