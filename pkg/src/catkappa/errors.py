"""Exception hierarchy shared by all modules."""


class CatKappaError(Exception):
    """Base class for every error raised by the package."""


class DomainError(CatKappaError, ValueError):
    """Input outside the domain of a kernel (bad curvature, radius, t, ...)."""


class ConstraintError(DomainError):
    """A point does not satisfy its model constraint (sphere / hyperboloid / edge offset)."""


class DimensionError(DomainError):
    """Points or matrices with incompatible dimensions."""


class TriangleInequalityError(DomainError):
    """Side lengths do not form a triangle in the model plane.

    ``side`` names the offending side (``"a"``, ``"b"``, ``"c"``) or
    ``"perimeter"`` when the spherical perimeter bound fails.
    """

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class DegenerateError(DomainError):
    """Zero-length geodesic or coincident points where a direction is required."""


class NonUniqueGeodesicError(DomainError):
    """Antipodal points on a sphere: the geodesic is not unique."""


class SpaceMismatchError(CatKappaError, TypeError):
    """Points (or an isometry) belong to different spaces."""


class NonConvergenceError(CatKappaError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class RadiusGuardError(DomainError):
    """A set exceeds the pi/(2 sqrt(kappa)) radius guard in positive curvature."""


class OrderCertificationError(CatKappaError):
    """An isometry does not have its claimed finite order."""


class NotIsometryError(CatKappaError):
    """A candidate map fails to preserve distances."""


class LadderError(CatKappaError):
    """Comparison-angle ladder is non-monotone on a space claiming CAT(kappa)."""


class GroupError(CatKappaError):
    """Group closure / orbit decomposition inconsistent with the expected structure."""


class ConfigError(CatKappaError, ValueError):
    """Malformed scenario or batch configuration."""
