"""Exception hierarchy.

Every geometric failure raises a subclass of :class:`GeometryError`; the CLI
maps those to exit code 1. Report-style checks (hyperideal and ellipsoid
hypotheses) never raise, they return violation lists instead.
"""


class GeometryError(ValueError):
    """Base class for all errors raised by polyrigid."""


# hyperbolic core
class NotHyperideal(GeometryError):
    pass


class NotInterior(GeometryError):
    pass


class EdgeMissesBall(GeometryError):
    pass


class DegenerateFace(GeometryError):
    pass


class PlaneMissesBall(GeometryError):
    pass


class PlanesDisjoint(GeometryError):
    pass


# mesh model
class ParseError(GeometryError):
    pass


class NotClosed(GeometryError):
    pass


class NotSphere(GeometryError):
    pass


class SelfIntersecting(GeometryError):
    pass


class InconclusiveIntersection(GeometryError):
    """A triangle pair is too close to touching to decide at tolerance."""


class DegenerateTriangle(GeometryError):
    pass


class NonConvexCell(GeometryError):
    pass


class VolumeMismatch(GeometryError):
    pass


class NotFaceToFace(GeometryError):
    pass


class ForeignVertex(GeometryError):
    pass


class DegenerateSimplex(GeometryError):
    pass


class DegeneratePointSet(GeometryError):
    pass


class BadFactor(GeometryError):
    pass


# simplex geometry
class DegenerateTruncation(GeometryError):
    pass


class QuadratureFailure(GeometryError):
    pass


class OutsidePolytope(GeometryError):
    """Angles violate the strict vertex-sum condition (or lie on its boundary)."""


class NoConvergence(GeometryError):
    pass


# rigidity engine
class DegenerateVertexSet(GeometryError):
    pass


# pogorelov
class NotPositiveHemisphere(GeometryError):
    pass


class NotSkew(GeometryError):
    pass


class StepTooLarge(GeometryError):
    pass


# angle optimisation
class IndexMismatch(GeometryError):
    pass


class EmptyFiber(GeometryError):
    pass


class LeftPolytope(GeometryError):
    pass


class ChartSingular(GeometryError):
    pass


class HypothesisViolated(GeometryError):
    pass
