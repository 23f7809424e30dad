"""Exception hierarchy."""


class PG3Error(Exception):
    """Base class for all package-specific errors."""


class DegenerateJoin(PG3Error):
    """Join of two points that coincide within tolerance."""


class OffQuadric(PG3Error):
    """A 6-vector violates the Klein quadric constraint."""

    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"Klein quadric residual {residual:.3e} too large")


class ZeroDivisor(PG3Error):
    """Attempt to invert the zero quaternion."""


class NotInPencil(PG3Error):
    """Pencil transfer applied to a line that misses the base point."""


class ConditioningLoss(PG3Error):
    """An image frame is too ill-conditioned to renormalize reliably."""


class NotClassifiable(PG3Error):
    """Generator is (projectively) scalar; no Jordan case applies."""


class ContinuumOfFixedLines(PG3Error):
    """An eigenspace meets the Klein quadric in a curve of lines."""


class GenericityExhausted(PG3Error):
    """Too many consecutive sample rejections while enforcing genericity."""


class PreconditionError(PG3Error):
    """A replay or operation was invoked outside its stated parameter range."""
