"""Exception hierarchy shared by all gleason modules."""


class GleasonError(Exception):
    """Base class for every error raised by this package."""


# geometry
class GradientVanishes(GleasonError):
    pass


class NotOnBoundary(GleasonError):
    pass


class ZeroDirection(GleasonError):
    pass


class CoverFailure(GleasonError):
    pass


class NewtonDivergence(GleasonError):
    pass


# convexity checker
class DegenerateDirection(GleasonError):
    pass


class NoCrossing(GleasonError):
    pass


# polynomials
class DimensionMismatch(GleasonError):
    pass


class NonVanishing(GleasonError):
    pass


class IllConditioned(GleasonError):
    pass


# paths
class NotCollinear(GleasonError):
    pass


class NoSafePath(GleasonError):
    pass


# operators
class CircleExitsDomain(GleasonError):
    pass


class NonConvergent(GleasonError):
    pass


class QuadratureStall(GleasonError):
    pass


class SingularSystem(GleasonError):
    pass


class PointOutsideDomain(GleasonError):
    pass


class MethodInapplicable(GleasonError):
    pass


class PatchSeam(GleasonError):
    pass
