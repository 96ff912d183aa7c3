"""Exception types shared across the package."""


class PetzoptError(Exception):
    """Base class for all errors raised by this package."""


class NotSquare(PetzoptError):
    """Matrix expected to be square is not."""


class NotHermitian(PetzoptError):
    """Hermiticity residual exceeds tolerance."""


class NotPSD(PetzoptError):
    """Matrix has an eigenvalue below the negative tolerance band."""


class ShapeMismatch(PetzoptError):
    """Array shapes are inconsistent with each other or with declared dims."""


class DimensionMismatch(PetzoptError):
    """Operands act on spaces of incompatible dimension."""


class NotTP(PetzoptError):
    """Trace-preservation check failed where it is required."""


class SupportViolation(PetzoptError):
    """supp(rho) is not contained in supp(sigma)."""


class BadDistribution(PetzoptError):
    """Probabilities are negative or not normalized."""


class BadDimensions(PetzoptError):
    """Requested generator dimensions are out of range."""


class InfeasibleParameters(PetzoptError):
    """Generator parameters violate the feasibility constraints."""


class CutoffTooSmall(PetzoptError):
    """Fock cutoff leaves too much state mass in the tail."""


class DegenerateEncoding(PetzoptError):
    """Codeword Gram matrix is singular; no isometric encoding exists."""
