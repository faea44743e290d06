"""Exception hierarchy shared by all gnp_lab modules."""


class GnpLabError(Exception):
    """Base class; the CLI maps these to exit status 2."""


class PreconditionFailed(GnpLabError):
    pass


class VertexSingularity(GnpLabError):
    """Normal requested at a polytope vertex or segment endpoint."""


class NotOnBoundary(GnpLabError):
    pass


class InvalidBody(GnpLabError):
    pass


class DegenerateDomain(GnpLabError):
    pass


class UnknownGallery(GnpLabError):
    pass


class NonPositiveParam(GnpLabError):
    pass


class EmptyBoundary(GnpLabError):
    pass


class NotStarPolar(GnpLabError):
    pass


class NotGraph(GnpLabError):
    pass


class PatchOverlap(GnpLabError):
    pass


class BoundaryNotCovered(GnpLabError):
    pass


class SingularMap(GnpLabError):
    pass


class EmptySet(GnpLabError):
    pass


class ResolutionTooCoarse(GnpLabError):
    pass


class RayNeverExits(GnpLabError):
    pass


class GNPViolated(GnpLabError):
    pass


class InfeasibleBC(GnpLabError):
    pass


class SingularPoint(GnpLabError):
    pass


class SingularPair(GnpLabError):
    pass


class SupportOutsideBall(GnpLabError):
    pass
