"""Exception hierarchy for cglforge.

Every failure mode that a caller may reasonably want to catch gets its own
class; all inherit from CglforgeError so `except CglforgeError` catches the
lot without swallowing programming errors.
"""


class CglforgeError(Exception):
    """Base class for all cglforge errors."""


class NonSimpleEigenvalue(CglforgeError):
    """Selected eigenvalue fails the simplicity gap test."""


class NoConvergence(CglforgeError):
    """An iterative solver exhausted its iteration budget."""


class SingularMatrix(CglforgeError):
    """Matrix is singular to working precision."""


class ReducedResolventSingular(CglforgeError):
    """(I - Pi) M0 (I - Pi) is not invertible on range(I - Pi)."""


class CallbackFailure(CglforgeError):
    """A user-supplied multiplier callback reported a domain error."""


class MissingDerivativeCallback(CglforgeError):
    """Nonlocal model lacks the derivative callback that was requested."""


class NonlocalUnsupported(CglforgeError):
    """Operation requires a local (matrix-polynomial) linear part."""


class GridTooCoarse(CglforgeError):
    """Eigenvalue curves cross zero more often than the grid can resolve."""


class NoSignChange(CglforgeError):
    """Critical-point bracket does not straddle the instability threshold."""


class NonUniqueCritical(CglforgeError):
    """Two separated wavenumbers both attain the instability threshold."""


class NotDiagonalizable(CglforgeError):
    """Leading coefficient matrix has a defective eigenvalue."""


class BoundViolated(CglforgeError):
    """Uniform invertibility bound fails; carries the witness frequency."""

    def __init__(self, message, eta=None):
        super().__init__(message)
        self.eta = eta


class NonQuadraticOrder(CglforgeError):
    """Nonlinearity does not vanish to quadratic order at the equilibrium."""


class ZeroModeSingular(CglforgeError):
    """S(0, mu_c) is singular; the mean-mode response cannot be slaved."""


class SecondHarmonicSingular(CglforgeError):
    """S(2 k*, mu_c) + 2 i k* d* is singular; 2:1 resonance."""


class RouteMismatch(CglforgeError):
    """Two independent Landau-constant assemblies disagree."""


class ResonantMode(CglforgeError):
    """A required harmonic response matrix is singular."""


class CollapseToZero(CglforgeError):
    """Newton iterate fell onto the trivial branch."""


class TruncationInsufficient(CglforgeError):
    """Fourier tail energy exceeds tolerance; increase the mode count."""


class FitIllConditioned(CglforgeError):
    """Branch data too degenerate to fit the Landau constant."""


class BlowUp(CglforgeError):
    """Time integration exceeded the blow-up guard."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class UnderResolved(CglforgeError):
    """Amplitude field has significant spectral tail; refine it."""


class UnknownFixture(CglforgeError):
    """No built-in model with the requested name."""


class ModelFormatError(CglforgeError):
    """Model document fails schema validation; message names the field."""
