"""Constant-curvature model geometry M^k(kappa).

Model points are numpy arrays:

* kappa = 0: Euclidean coordinates;
* kappa > 0: vectors of norm 1/sqrt(kappa) (a round sphere);
* kappa < 0: hyperboloid vectors, time coordinate first, with
  <x, x>_L = -1/|kappa|.

Every length is normalized by sqrt(|kappa|) before reaching the kernels, so
the kernels only ever see curvature -1, 0 or +1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    ConstraintError,
    DimensionError,
    DomainError,
    NonUniqueGeodesicError,
)

KERNEL_TOL = 1e-9
CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class Curvature:
    kappa: float
    scale: float = field(init=False)

    def __post_init__(self):
        k = float(self.kappa)
        if not math.isfinite(k):
            raise DomainError("curvature must be finite")
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "scale", math.sqrt(abs(k)) if k != 0.0 else 1.0)

    @property
    def sign(self) -> int:
        return (self.kappa > 0) - (self.kappa < 0)

    @property
    def diameter(self) -> float:
        """Model diameter: pi/sqrt(kappa) for kappa > 0, infinite otherwise."""
        return math.pi / self.scale if self.kappa > 0 else math.inf

    @property
    def radius_guard(self) -> float:
        """pi/(2 sqrt(kappa)) for kappa > 0 (circumcenter uniqueness bound)."""
        return 0.5 * math.pi / self.scale if self.kappa > 0 else math.inf


def as_curvature(kappa) -> Curvature:
    return kappa if isinstance(kappa, Curvature) else Curvature(kappa)


def lorentz(x, y) -> float:
    return -x[0] * y[0] + float(np.dot(x[1:], y[1:]))


def check_point(kappa, p, tol=CONSTRAINT_TOL) -> np.ndarray:
    """Validate ``p`` against the model constraint; returns it as a float array."""
    k = as_curvature(kappa)
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise DimensionError("model point must be a non-empty vector")
    if k.sign > 0:
        r = 1.0 / k.scale
        if abs(math.sqrt(float(np.dot(p, p))) - r) > tol * r:
            raise ConstraintError("point is not on the sphere of radius %g" % r)
    elif k.sign < 0:
        target = -1.0 / abs(k.kappa)
        if p.size < 2:
            raise DimensionError("hyperboloid points need at least two coordinates")
        if abs(lorentz(p, p) - target) > tol * max(1.0, abs(p[0]) ** 2):
            raise ConstraintError("point is not on the hyperboloid <x,x>_L = %g" % target)
        if p[0] <= 0:
            raise ConstraintError("hyperboloid point must lie on the upper sheet")
    return p


def project(kappa, p) -> np.ndarray:
    """Nearest-point renormalization onto the model constraint."""
    k = as_curvature(kappa)
    p = np.asarray(p, dtype=float)
    if k.sign > 0:
        return p / (k.scale * math.sqrt(float(np.dot(p, p))))
    if k.sign < 0:
        return p / (k.scale * math.sqrt(-lorentz(p, p)))
    return p


def _pair(kappa, p, q):
    k = as_curvature(kappa)
    p = check_point(k, p)
    q = check_point(k, q)
    if p.shape != q.shape:
        raise DimensionError("dimension mismatch: %s vs %s" % (p.shape, q.shape))
    return k, p, q


def model_distance(kappa, p, q) -> float:
    k, p, q = _pair(kappa, p, q)
    s = k.scale
    if k.sign == 0:
        return kernels.model_dist(0, p, q)
    return kernels.model_dist(k.sign, p * s, q * s) / s


def model_geodesic_point(kappa, p, q, t) -> np.ndarray:
    k, p, q = _pair(kappa, p, q)
    if not (0.0 <= t <= 1.0):
        raise DomainError("t=%r outside [0, 1]" % t)
    if k.sign == 0:
        return kernels.model_geodesic(0, p, q, float(t))
    s = k.scale
    if k.sign > 0 and kernels.model_dist(1, p * s, q * s) > math.pi - 1e-12:
        raise NonUniqueGeodesicError("antipodal points have no unique geodesic")
    return kernels.model_geodesic(k.sign, p * s, q * s, float(t)) / s


def side_from_angle(kappa, a, b, gamma) -> float:
    k = as_curvature(kappa)
    if k.sign > 0 and (a > k.diameter or b > k.diameter):
        raise DomainError("sides must not exceed pi/sqrt(kappa)")
    s = k.scale
    return kernels.side_from_angle(k.sign, a * s, b * s, float(gamma)) / s


def comparison_angle(kappa, a, b, c, tol=KERNEL_TOL) -> float:
    """Model angle between sides ``a`` and ``b`` (opposite ``c``)."""
    k = as_curvature(kappa)
    s = k.scale
    return kernels.comparison_angle(k.sign, a * s, b * s, c * s, tol)


def comparison_angles(kappa, a, b, c, tol=KERNEL_TOL) -> np.ndarray:
    k = as_curvature(kappa)
    s = k.scale
    return kernels.comparison_angles(
        k.sign, np.asarray(a, float) * s, np.asarray(b, float) * s, np.asarray(c, float) * s, tol)


def basepoint(kappa, dim=2) -> np.ndarray:
    """Origin / north pole (last coordinate) / hyperboloid vertex (first)."""
    k = as_curvature(kappa)
    if k.sign == 0:
        return np.zeros(dim)
    p = np.zeros(dim + 1)
    if k.sign > 0:
        p[-1] = 1.0 / k.scale
    else:
        p[0] = 1.0 / k.scale
    return p


def exp_from_base(kappa, v) -> np.ndarray:
    """Exponential map at ``basepoint`` of a tangent vector ``v`` (length = distance)."""
    k = as_curvature(kappa)
    v = np.asarray(v, dtype=float)
    if k.sign == 0:
        return v.copy()
    s = k.scale
    n = float(np.linalg.norm(v))
    out = np.zeros(v.size + 1)
    if k.sign > 0:
        out[:-1] = (math.sin(n * s) / (n * s) if n > 0 else 1.0) * v
        out[-1] = math.cos(n * s) / s
    else:
        out[1:] = (math.sinh(n * s) / (n * s) if n > 0 else 1.0) * v
        out[0] = math.cosh(n * s) / s
    return out


# ---------------------------------------------------------------- triangles

@dataclass(frozen=True)
class ComparisonTriangle:
    kappa: Curvature
    a: float  # d(v0, v1)
    b: float  # d(v1, v2)
    c: float  # d(v2, v0)
    alpha: float  # angle at v0
    beta: float  # angle at v1
    gamma: float  # angle at v2
    vertices: tuple

    @property
    def angle_sum(self) -> float:
        return self.alpha + self.beta + self.gamma


def build_comparison_triangle(kappa, d_xy, d_yz, d_zx) -> ComparisonTriangle:
    """Comparison triangle for sides d(x,y), d(y,z), d(z,x).

    Canonical placement: x at the origin / pole, y along the first axis, z
    in the upper half-plane.
    """
    k = as_curvature(kappa)
    alpha = comparison_angle(k, d_xy, d_zx, d_yz)
    beta = comparison_angle(k, d_xy, d_yz, d_zx)
    gamma = comparison_angle(k, d_yz, d_zx, d_xy)
    ca, sa = math.cos(alpha), math.sin(alpha)
    if k.sign == 0:
        v0 = np.zeros(2)
        v1 = np.array([d_xy, 0.0])
        v2 = d_zx * np.array([ca, sa])
    else:
        s = k.scale
        if k.sign > 0:
            co, si = math.cos, math.sin
            v0 = np.array([0.0, 0.0, 1.0])
            v1 = np.array([si(d_xy * s), 0.0, co(d_xy * s)])
            v2 = np.array([si(d_zx * s) * ca, si(d_zx * s) * sa, co(d_zx * s)])
        else:
            co, si = math.cosh, math.sinh
            v0 = np.array([1.0, 0.0, 0.0])
            v1 = np.array([co(d_xy * s), si(d_xy * s), 0.0])
            v2 = np.array([co(d_zx * s), si(d_zx * s) * ca, si(d_zx * s) * sa])
        v0, v1, v2 = v0 / s, v1 / s, v2 / s
    return ComparisonTriangle(k, float(d_xy), float(d_yz), float(d_zx), alpha, beta, gamma, (v0, v1, v2))


# ---------------------------------------------------------------- hemispheres

@dataclass(frozen=True)
class SphericalCurve:
    """Closed polygon on the unit sphere (last vertex joined to the first)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.shape[0] < 2:
            raise DomainError("a closed curve needs at least two vertices")
        for p in v:
            check_point(1.0, p, tol=1e-10)
        object.__setattr__(self, "vertices", v)

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.array([kernels.model_dist(1, v[i], v[(i + 1) % len(v)]) for i in range(len(v))])

    @property
    def length(self) -> float:
        return float(np.sum(self.edge_lengths()))

    def point_at(self, s) -> np.ndarray:
        """Point at arclength ``s`` from vertex 0 (piecewise-geodesic parameterization)."""
        v = self.vertices
        lengths = self.edge_lengths()
        s = float(s) % max(self.length, 1e-300)
        for i, ell in enumerate(lengths):
            if s <= ell or i == len(lengths) - 1:
                if ell == 0.0:
                    return v[i].copy()
                return kernels.model_geodesic(1, v[i], v[(i + 1) % len(v)], min(s / ell, 1.0))
            s -= ell
        return v[0].copy()


def hemisphere_center(curve: SphericalCurve) -> np.ndarray:
    """Center m of an open hemisphere containing a closed curve shorter than 2 pi.

    x = vertex 0 and x' = the point half the length further along split the
    curve into equal halves; m is the midpoint of the geodesic [x, x'].
    """
    if not isinstance(curve, SphericalCurve):
        curve = SphericalCurve(curve)
    length = curve.length
    if length >= 2.0 * math.pi:
        raise DomainError("curve length %.17g >= 2 pi" % length)
    x = curve.vertices[0]
    x2 = curve.point_at(0.5 * length)
    d = kernels.model_dist(1, x, x2)
    if d > math.pi - 1e-12:
        raise NonUniqueGeodesicError("bisection points are numerically antipodal")
    if d == 0.0:
        # each half is a loop at x of length < pi, so it stays within pi/2 of x
        return x.copy()
    return kernels.model_geodesic(1, x, x2, 0.5)


def max_distance_to(kappa, center, points) -> float:
    return max(model_distance(kappa, center, p) for p in points)


def random_spherical_polygon(rng, vertices: int, length: float) -> SphericalCurve:
    """Random closed polygon on the unit sphere with the given total length.

    Vertices are exp_m(lambda v_i) for a random centre m and random tangent
    vectors |v_i| <= pi; lambda is bisected until the length matches.  If
    even lambda = 1 is shorter than requested, that polygon is returned.
    """
    if vertices < 2:
        raise DomainError("a closed polygon needs at least two vertices")
    if not 0.0 < length < 2.0 * math.pi:
        raise DomainError("length must lie in (0, 2 pi)")
    m = rng.normal(size=3)
    m /= np.linalg.norm(m)
    basis = np.linalg.svd(m[None, :])[2][1:]
    dirs = rng.normal(size=(vertices, 2))
    radii = rng.uniform(0.0, math.pi, size=vertices)

    def build(lam):
        pts = []
        for d, r in zip(dirs, radii):
            u = d @ basis
            u /= np.linalg.norm(u)
            pts.append(math.cos(lam * r) * m + math.sin(lam * r) * u)
        return SphericalCurve(np.array(pts))

    curve = build(1.0)
    if curve.length <= length:
        return curve
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if build(mid).length > length:
            hi = mid
        else:
            lo = mid
    return build(lo)
