"""Exception types shared across the package."""


class NNElastError(Exception):
    """Base class for all package errors."""


class DegenerateTet(NNElastError):
    """Tetrahedron with (near-)zero volume."""


class SingularDofMatrix(NNElastError):
    """The 30x30 degree-of-freedom matrix could not be inverted.

    This must never happen for non-degenerate tetrahedra; it signals either a
    degenerate element that slipped through or an implementation bug.
    """


class NonConformingMesh(NNElastError):
    """A face is shared by more than two tetrahedra."""


class ParseError(NNElastError):
    """Malformed mesh file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SolverBreakdown(NNElastError):
    """Factorization of the saddle-point matrix failed (singular system)."""


class ToleranceNotReached(NNElastError):
    """Linear solve finished but the residual exceeds the requested tolerance."""
