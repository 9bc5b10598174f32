"""Exception hierarchy shared by every module of the package."""


class ResonanceError(Exception):
    """Base class for all errors raised by :mod:`resonance_atlas`."""


class DomainError(ResonanceError, ValueError):
    """A parameter or argument lies outside the domain of the operation."""


class PoleError(ResonanceError):
    """The evaluation point is inside the exclusion disk of a pole."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class CutError(ResonanceError):
    """First-sheet evaluation requested on (or too close to) the cut."""


class StripError(ResonanceError):
    """The deformed contour cannot pass below the point without enclosing a pole."""


class QuadratureError(ResonanceError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ContinuationMismatch(ResonanceError):
    """The two continuation routes disagree beyond tolerance."""


class NoConvergence(ResonanceError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class PoleCapture(NoConvergence):
    """Root iterates were drawn into a pole-exclusion disk."""


class TrackingLost(ResonanceError):
    """Parameter continuation could not advance; the step size underflowed.

    ``param`` is the last parameter value reached and ``partial`` the
    trajectory built up to that point.
    """

    def __init__(self, message, param=None, partial=None):
        super().__init__(message)
        self.param = param
        self.partial = partial


class DegenerateError(ResonanceError):
    """A closed form is singular at the requested parameters."""


class DegenerateRegime(ResonanceError):
    """Two tracked resonances met during a detuning sweep."""
