"""Exception taxonomy shared across the package.

Solver errors carry the last iterate so failed runs can still be inspected
and serialized as partial artifacts.
"""


class SelError(Exception):
    """Base class for all package errors."""


class DomainGeometryError(SelError):
    """Invalid domain description or point outside the domain closure."""


class ResolutionError(SelError):
    """Grid resolution below the supported floor."""


class GridMismatchError(SelError):
    """Two grid functions do not live on the same grid."""


class ContractViolation(SelError):
    """Input violates an operation contract (e.g. non-symmetric Hessian)."""


class PreconditionError(SelError):
    """A stated precondition fails; the message names the inequality."""


class RangeError(SelError):
    """Composition argument leaves the tabulated barrier domain."""


class ShootingError(SelError):
    """Barrier ODE shooting could not bracket or converge."""


class SingularityError(SelError):
    """Barrier ODE trajectory hit zero at an interior time."""


class SolverError(SelError):
    """Newton iteration diverged.  Carries the last iterate."""

    def __init__(self, message, last_iterate=None, diagnostics=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.diagnostics = diagnostics or {}


class PositivityBreachError(SolverError):
    """Iterate touched zero at an interior node.

    Signals non-existence regimes or insufficient boundary grading.
    """


class IterationError(SolverError):
    """Outer fixed-point iteration failed to converge in max_iter."""


class InfeasibleConeError(SelError):
    """Cone constant system infeasible (determinant condition fails)."""


class UnsupportedRegimeError(SelError):
    """Exponent quadruple outside every supported existence regime."""


class LayerError(SelError):
    """Fitting layer contains too few points."""


class ConfigError(SelError):
    """Run configuration failed schema validation."""
