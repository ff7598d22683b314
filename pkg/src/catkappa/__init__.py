"""Comparison geometry for CAT(kappa) spaces: model kernels, a zoo of
geodesic spaces, circumcenters and Alexandrov angles, finite-order isometry
orbits and regular-polytope angle certificates."""
__version__ = "0.1.0"

from .kernels import backend, use_backend  # noqa: E402
from .model import Curvature, comparison_angle, side_from_angle  # noqa: E402
from .spaces import Cone, Euclidean, Hyperbolic, Product, Sphere, Tree, space_from_config  # noqa: E402
from .analysis import alexandrov_angle, circumcenter, gram_sum  # noqa: E402

__all__ = [
    "__version__", "backend", "use_backend", "Curvature", "comparison_angle", "side_from_angle",
    "Cone", "Euclidean", "Hyperbolic", "Product", "Sphere", "Tree", "space_from_config",
    "alexandrov_angle", "circumcenter", "gram_sum",
]
