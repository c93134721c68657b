"""Exception types shared across the package.

The CLI maps these onto exit codes: parameter/domain problems exit 1,
numerical failures exit 2.
"""


class DomainError(ValueError):
    """A parameter is outside its admissible domain. Message names the field."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap without meeting its tolerance."""


class SingularDenominatorError(ArithmeticError):
    """A resolvent denominator 1 + i*h_b - 2*lambda^2*cos^2 is (numerically) zero."""


class BranchAmbiguityError(RuntimeError):
    """Two roots coincide at a continuation endpoint; branch identity undecidable."""


class NoInteriorMaximumError(RuntimeError):
    """The attenuation curve has no interior peak on the requested range."""


class CFLError(ValueError):
    """Time step violates the advection or collision stability bound."""


class PositivityError(RuntimeError):
    """A nonlinear step drove a number density N_i = N0*(1+P_i) non-positive."""


class InstabilityError(RuntimeError):
    """A forced run blew past the instability guard (|field| > 1e3 * drive amplitude)."""


class FitError(RuntimeError):
    """Wave fitting failed (zero signal, under-resolved phase, or bad window)."""
