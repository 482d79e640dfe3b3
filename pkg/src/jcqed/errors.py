"""Exception types raised by the simulation library."""


class JCError(ValueError):
    """Base class for every library error.

    ``code`` is a short machine-readable tag used by the CLI error line.
    """

    code = "jc-error"


class TruncationError(JCError):
    code = "truncation-failure"


class NonPhysicalStateError(JCError):
    code = "non-physical-state"


class DegenerateAmplitudeError(JCError):
    code = "degenerate-amplitude"


class PhaseNotSupportedError(JCError):
    """Closed-form path asked to handle a complex amplitude."""

    code = "nonzero-phase"


class OutcomeImpossibleError(JCError):
    code = "outcome-impossible"


class QuadratureConvergenceError(JCError):
    code = "quadrature-non-convergence"


class ConsistencyError(JCError):
    code = "consistency-violation"


class BracketError(JCError):
    """Initialization search could not bracket the target.

    The scanned ``(alpha, polar_angle)`` curve is kept on ``curve`` so the
    caller can report it instead of a point.
    """

    code = "bracket-failure"

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = curve


class SurfacePointError(JCError):
    """Failure at one ``(tau, alpha)`` point of a surface sweep."""

    code = "surface-point-failure"

    def __init__(self, tau, alpha, cause):
        super().__init__(f"tau={tau!r} alpha={alpha!r}: {cause}")
        self.tau = tau
        self.alpha = alpha
        self.cause = cause
