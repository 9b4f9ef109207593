"""Exception types raised by the solver."""


class SlitGrateError(Exception):
    """Base class for all solver errors."""


class BranchCutError(SlitGrateError):
    """Argument of the analytic square root fell on the excluded ray."""


class RayleighCutoffError(SlitGrateError):
    """Wavenumber sits exactly at a Rayleigh cutoff (some zeta_n = 0)."""


class SeriesTruncationError(SlitGrateError):
    """A lattice or modal series did not meet its tail tolerance.

    Carries the tail estimate that was achieved in ``tail``.
    """

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class QuadratureError(SlitGrateError):
    """Galerkin entries failed the quadrature-doubling convergence guard."""


class IllConditionedError(SlitGrateError):
    """A block system exceeded its conditioning guard."""


class WaveguidePoleError(SlitGrateError):
    """k is too close to a pole of the slit-waveguide kernel (sin k ~ 0)."""


class RootFindError(SlitGrateError):
    """Root refinement failed (no convergence, basin escape, or
    branch ambiguity / resonance overlap in the seeding)."""


class ReductionSingularError(SlitGrateError):
    """The reduced two-by-two system is singular at the requested k."""


class DiagnosticError(SlitGrateError):
    """A diagnostic (eigen-decomposition split, scaling study) is unavailable
    for the requested parameters."""
