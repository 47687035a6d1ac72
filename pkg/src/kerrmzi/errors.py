"""Exception types raised by kerrmzi."""


class KerrMZIError(Exception):
    """Base class for all library errors."""


class TruncationError(KerrMZIError, ValueError):
    """The photon-number cutoff leaves more input probability than tolerated."""


class NegativeEigenvalueError(KerrMZIError, ValueError):
    """A density block has an eigenvalue below the positivity tolerance."""


class DoubleSmearError(KerrMZIError, ValueError):
    """Detector efficiency applied to an already smeared distribution."""


class DerivativeMismatchError(KerrMZIError, ArithmeticError):
    """Analytic and finite-difference derivatives disagree."""


class UnsupportedChi(KerrMZIError, ValueError):
    """Closed-form references exist only for chi = pi/2."""


class ZeroInformation(KerrMZIError, ValueError):
    """Fisher information is zero, so no Cramer-Rao bound exists."""


class UndefinedG2(KerrMZIError, ValueError):
    """g2(0) requested for a mode with (numerically) zero mean photon number."""
