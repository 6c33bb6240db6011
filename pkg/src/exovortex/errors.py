"""Exception hierarchy shared by all modules."""


class ExoVortexError(Exception):
    """Base class for every error raised by this package."""


class CurveError(ExoVortexError, ValueError):
    pass


class NonSimpleCurve(CurveError):
    pass


class NonPositiveRadius(CurveError):
    pass


class MeshError(ExoVortexError, ValueError):
    pass


class OrderingViolated(MeshError):
    pass


class InsufficientSamples(MeshError):
    pass


class NonUniformMesh(MeshError):
    pass


class CoincidentNodesInB(ExoVortexError, ValueError):
    pass


class SingularEvaluation(ExoVortexError, ValueError):
    """A field was evaluated (numerically) on top of one of its singularities."""


class InsideObstacle(ExoVortexError, ValueError):
    pass


class BlobTouchesBoundary(ExoVortexError, ValueError):
    pass


class SolverError(ExoVortexError, RuntimeError):
    pass


class SingularSystem(SolverError):
    pass


class LambdaMeanNearTwoPi(SolverError):
    pass


class NoConvergence(SolverError):
    """Iteration budget exhausted; ``best`` holds the last estimate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BoundaryCollision(SolverError):
    pass


class ErrorAtRoundoff(ExoVortexError, ArithmeticError):
    pass
