"""Exception hierarchy shared by the model, dynamics and oracle layers."""

from __future__ import annotations


class XYQuenchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(XYQuenchError, ValueError):
    """An argument lies outside the domain of the operation."""


class GaplessPointError(DomainError):
    """The Bogoliubov angle is undefined because the mode gap has closed."""

    def __init__(self, k: float, field: float, alpha: float, gap: float):
        self.k = k
        self.field = field
        self.alpha = alpha
        self.gap = gap
        super().__init__(
            f"gapless point at k={k!r}, B={field!r}, alpha={alpha!r} (gap={gap:.3e})"
        )


class ResourceError(DomainError):
    """Requested system size exceeds the dense exact-diagonalization cap."""


class IntegrationError(XYQuenchError, RuntimeError):
    """The adaptive integrator could not advance (step-size underflow)."""


class AccuracyError(IntegrationError):
    """Norm drift of an evolved state exceeded the accepted bound."""


class FitError(XYQuenchError, ValueError):
    """Power-law fit requested on a degenerate or out-of-regime sample set."""


class DegeneracyError(XYQuenchError, RuntimeError):
    """The ground level is quasi-degenerate; its Berry phase is ill-posed."""

    def __init__(self, phi: float, gap: float, tol: float):
        self.phi = phi
        self.gap = gap
        self.tol = tol
        super().__init__(
            f"ground gap {gap:.3e} below degeneracy_tol {tol:.3e} at phi={phi:.6f}"
        )


class StepRefinementError(XYQuenchError, RuntimeError):
    """Adjacent loop states have (nearly) vanishing overlap; refine the loop."""
