"""Exception hierarchy. Validation errors map to CLI exit code 1, numerical ones to 2."""


class OscPairError(Exception):
    """Base class for all package errors."""


class ValidationError(OscPairError, ValueError):
    """Bad parameters or run configuration."""


class DomainError(OscPairError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class EstimationError(OscPairError, RuntimeError):
    """A numerical estimate (e.g. a correlation-width search) failed."""


class PropagationError(OscPairError, RuntimeError):
    """Time propagation could not be carried out reliably."""


class SteadyStateError(OscPairError, RuntimeError):
    """The affine generator has no unique fixed point."""


class ConsistencyError(OscPairError, RuntimeError):
    """Two internal routes to the same quantity disagree beyond tolerance."""


class CutoffError(OscPairError, RuntimeError):
    """Fock-space truncation too small for the requested state or evolution."""


class NonPhysicalStateError(OscPairError, RuntimeError):
    """State violates positivity beyond tolerance where a physical one is required."""
