"""Exception types raised across the toolkit."""


class MicrodarcyError(Exception):
    """Base class for all toolkit errors."""


# --- mesh ---------------------------------------------------------------

class ObstacleTouchesBoundary(MicrodarcyError):
    """The closed obstacle is not strictly contained in the unit cell."""


class ResolutionTooCoarse(MicrodarcyError):
    """No tetrahedron layer separates the obstacle from the cell boundary."""


class NonIntegerTiling(MicrodarcyError):
    """1/epsilon is not a positive integer, so the unit cube does not tile."""


class MeshConstructionError(MicrodarcyError):
    """Internal mesh invariant violated during construction."""


# --- femcore ------------------------------------------------------------

class IncompatibleConstraints(MicrodarcyError):
    """Constraint set not admissible for the given mesh/family."""


class MeshMismatch(MicrodarcyError):
    """Trial and test spaces do not share a mesh."""


class SolverBreakdown(MicrodarcyError):
    """Linear solve failed to reach the required residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularSystem(MicrodarcyError):
    """Factorization detected an (numerically) singular operator."""


class ZeroDenominator(MicrodarcyError):
    """Rayleigh-quotient denominator vanished (gradient-free field)."""


# --- cell / analysis ----------------------------------------------------

class WellPosednessViolated(MicrodarcyError):
    """Existence/uniqueness condition gamma^2 < Rc(1-N^2)/K^2 fails."""


class InconsistentSolutions(MicrodarcyError):
    """Cell solutions do not share one mesh / parameter set."""


class NonPositiveViscosity(MicrodarcyError):
    """A physical viscosity parameter is not strictly positive."""


class EigSolverFailure(MicrodarcyError):
    """Eigenvalue estimation did not converge."""


class DegenerateMesh(MicrodarcyError):
    """Discrete inf-sup constant collapsed below tolerance."""


# --- darcy / epsweep / cli ----------------------------------------------

class IndefiniteTensor(MicrodarcyError):
    """Symmetric part of the drag tensor is not positive definite."""


class TooFewSamples(MicrodarcyError):
    """Sweep diagnostics require at least two distinct epsilons."""


class ConfigInvalid(MicrodarcyError):
    """Configuration file failed validation."""
