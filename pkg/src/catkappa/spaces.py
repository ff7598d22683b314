"""Concrete geodesic spaces with known curvature bounds.

Each space works on raw *payloads* (numpy arrays, :class:`TreePoint`,
tuples, :class:`ConePoint`) for speed; :class:`SpacePoint` tags a payload
with its space for the descriptor-checked module-level API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import kernels
from .errors import (
    ConfigError,
    ConstraintError,
    DimensionError,
    DomainError,
    NonUniqueGeodesicError,
    SpaceMismatchError,
)
from .model import Curvature, check_point, comparison_angle, exp_from_base, side_from_angle


class Space:
    """Base class.  Subclasses implement the payload-level methods."""

    kind = "abstract"
    curvature: Curvature

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def geodesic(self, p, q, t):
        raise NotImplementedError

    def validate(self, p):
        return p

    def equal(self, p, q, tol=0.0) -> bool:
        return self.distance(p, q) <= tol

    def basepoint(self):
        raise NotImplementedError

    def sample(self, rng):
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def point_to_json(self, p):
        raise NotImplementedError

    def point_from_json(self, obj):
        raise NotImplementedError

    def point(self, payload) -> "SpacePoint":
        return SpacePoint(self, self.validate(payload))

    def magnitude(self, p) -> float:
        """Scale of a payload's coordinates, used by relative tolerances."""
        return 1.0

    def __eq__(self, other):
        return type(self) is type(other) and self.to_config() == other.to_config()

    def __hash__(self):
        return hash(repr(self.to_config()))

    def __repr__(self):
        return "%s(%r)" % (type(self).__name__, self.to_config())


@dataclass(frozen=True, eq=False)
class SpacePoint:
    space: Space
    payload: object

    def __eq__(self, other):
        return (isinstance(other, SpacePoint) and self.space == other.space
                and self.space.equal(self.payload, other.payload))


def _same_space(p: SpacePoint, q: SpacePoint) -> Space:
    if not (isinstance(p, SpacePoint) and isinstance(q, SpacePoint)):
        raise SpaceMismatchError("expected SpacePoint arguments")
    if p.space != q.space:
        raise SpaceMismatchError("points live in different spaces: %r vs %r" % (p.space, q.space))
    return p.space


def distance(p: SpacePoint, q: SpacePoint) -> float:
    return _same_space(p, q).distance(p.payload, q.payload)


def geodesic_point(p: SpacePoint, q: SpacePoint, t: float) -> SpacePoint:
    space = _same_space(p, q)
    if not (0.0 <= t <= 1.0):
        raise DomainError("t=%r outside [0, 1]" % t)
    return SpacePoint(space, space.geodesic(p.payload, q.payload, t))


# ---------------------------------------------------------------- model spaces

class _ModelSpace(Space):
    sign = 0

    def __init__(self, dim: int):
        if int(dim) < 1:
            raise DomainError("dimension must be >= 1")
        self.dim = int(dim)

    def validate(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.ambient_dim,):
            raise DimensionError("expected a vector of length %d, got shape %s" % (self.ambient_dim, p.shape))
        return check_point(self.curvature, p, tol=1e-10)

    @property
    def ambient_dim(self) -> int:
        return self.dim + (self.sign != 0)

    def _n(self, p):
        return p * self.curvature.scale if self.sign else p

    def distance(self, p, q) -> float:
        s = self.curvature.scale
        return kernels.model_dist(self.sign, self._n(p), self._n(q)) / s

    def geodesic(self, p, q, t):
        s = self.curvature.scale
        return kernels.model_geodesic(self.sign, self._n(p), self._n(q), float(t)) / s

    def basepoint(self):
        from .model import basepoint
        return basepoint(self.curvature, self.dim)

    def exp(self, v):
        """Exponential map at the basepoint."""
        return exp_from_base(self.curvature, v)

    def magnitude(self, p) -> float:
        return max(1.0, float(np.max(np.abs(p))))

    def point_to_json(self, p):
        return [float(x) for x in p]

    def point_from_json(self, obj):
        if isinstance(obj, dict) and "exp" in obj:
            return self.exp(np.asarray(obj["exp"], dtype=float))
        return self.validate(np.asarray(obj, dtype=float))

    def _sample_tangent(self, rng, radius):
        v = rng.normal(size=self.dim)
        v /= np.linalg.norm(v)
        return v * radius * rng.uniform() ** (1.0 / self.dim)


class Euclidean(_ModelSpace):
    kind = "euclidean"
    sign = 0

    def __init__(self, dim: int):
        super().__init__(dim)
        self.curvature = Curvature(0.0)

    def sample(self, rng):
        return self._sample_tangent(rng, 1.0)

    def to_config(self):
        return {"kind": "euclidean", "dim": self.dim}


class Hyperbolic(_ModelSpace):
    """Hyperboloid model of H^dim, curvature -1, time coordinate first."""

    kind = "hyperbolic"
    sign = -1

    def __init__(self, dim: int):
        super().__init__(dim)
        self.curvature = Curvature(-1.0)

    def sample(self, rng):
        return self.exp(self._sample_tangent(rng, 1.0))

    def to_config(self):
        return {"kind": "hyperbolic", "dim": self.dim}


class Sphere(_ModelSpace):
    """Round sphere S^dim of the given radius (curvature 1/radius^2); pole = last axis."""

    kind = "sphere"
    sign = 1

    def __init__(self, dim: int, radius: float = 1.0):
        super().__init__(dim)
        if not radius > 0:
            raise DomainError("sphere radius must be positive")
        self.radius = float(radius)
        self.curvature = Curvature(1.0 / self.radius ** 2)

    def geodesic(self, p, q, t):
        if self.distance(p, q) > math.pi * self.radius * (1.0 - 1e-12):
            raise NonUniqueGeodesicError("antipodal points on the sphere have no unique geodesic")
        return super().geodesic(p, q, t)

    def sample(self, rng):
        return self.exp(self._sample_tangent(rng, 0.25 * math.pi * self.radius))

    def to_config(self):
        return {"kind": "sphere", "dim": self.dim, "radius": self.radius}


# ---------------------------------------------------------------- trees

@dataclass(frozen=True)
class TreePoint:
    """A vertex (``vertex`` set) or an interior edge point (``edge``, ``offset``)."""

    vertex: int | None = None
    edge: int | None = None
    offset: float = 0.0


class Tree(Space):
    """Finite metric tree given as a weighted edge list ``[(u, v, w), ...]``.

    Edge points are measured from the first endpoint ``u``; offsets 0 and w
    are canonicalized to the endpoint vertices.
    """

    kind = "tree"

    def __init__(self, edges):
        edges = [(int(u), int(v), float(w)) for u, v, w in edges]
        if not edges:
            raise ConfigError("a tree needs at least one edge")
        verts = sorted({u for u, _, _ in edges} | {v for _, v, _ in edges})
        if verts != list(range(len(verts))):
            raise ConfigError("tree vertices must be labelled 0..n-1")
        if any(w <= 0 for _, _, w in edges):
            raise ConfigError("tree edge weights must be strictly positive")
        if any(u == v for u, v, _ in edges):
            raise ConfigError("tree edges must join distinct vertices")
        n = len(verts)
        if len(edges) != n - 1:
            raise ConfigError("a tree on %d vertices has %d edges, got %d" % (n, n - 1, len(edges)))
        rows = [u for u, v, _ in edges] + [v for u, v, _ in edges]
        cols = [v for u, v, _ in edges] + [u for u, v, _ in edges]
        vals = [w for _, _, w in edges] * 2
        graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
        ncomp, _ = connected_components(graph, directed=False)
        if ncomp != 1:
            raise ConfigError("tree graph is not connected")
        self.edges = edges
        self.n_vertices = n
        self.vdist, self.pred = shortest_path(graph, directed=False, return_predecessors=True)
        self.edge_index = {}
        for i, (u, v, _) in enumerate(edges):
            self.edge_index[(u, v)] = i
            self.edge_index[(v, u)] = i
        self.curvature = Curvature(0.0)

    @classmethod
    def star(cls, legs: int, length: float = 1.0) -> "Tree":
        """Hub vertex 0 with ``legs`` edges of the given length; leg i is edge i."""
        return cls([(0, i + 1, length) for i in range(legs)])

    # points
    def vertex_point(self, v) -> TreePoint:
        v = int(v)
        if not 0 <= v < self.n_vertices:
            raise ConstraintError("no vertex %d" % v)
        return TreePoint(vertex=v)

    def edge_point(self, e, offset) -> TreePoint:
        e = int(e)
        if not 0 <= e < len(self.edges):
            raise ConstraintError("no edge %d" % e)
        u, v, w = self.edges[e]
        s = float(offset)
        if s < -1e-12 * w or s > w * (1 + 1e-12):
            raise ConstraintError("offset %r outside edge %d of length %r" % (s, e, w))
        if s <= 0.0:
            return TreePoint(vertex=u)
        if s >= w:
            return TreePoint(vertex=v)
        return TreePoint(edge=e, offset=s)

    def validate(self, p):
        if not isinstance(p, TreePoint):
            raise ConstraintError("tree payloads are TreePoint instances")
        if p.vertex is not None:
            return self.vertex_point(p.vertex)
        return self.edge_point(p.edge, p.offset)

    def _ends(self, p):
        if p.vertex is not None:
            return ((p.vertex, 0.0),)
        u, v, w = self.edges[p.edge]
        return ((u, p.offset), (v, w - p.offset))

    def _route(self, p, q):
        best = None
        for a, da in self._ends(p):
            for b, db in self._ends(q):
                total = (da + db) + self.vdist[a, b]  # symmetric in p, q
                if best is None or total < best[0]:
                    best = (total, a, b)
        return best

    def distance(self, p, q) -> float:
        if p.edge is not None and p.edge == q.edge:
            return abs(p.offset - q.offset)
        return float(self._route(p, q)[0])

    def vertex_path(self, a, b):
        path = [b]
        j = b
        while j != a:
            j = int(self.pred[a, j])
            path.append(j)
        path.reverse()
        return path

    def _segments(self, p, q):
        """Oriented edge pieces (edge, s_from, s_to) along the geodesic p -> q."""
        if p.edge is not None and p.edge == q.edge:
            return [(p.edge, p.offset, q.offset)]
        _, a, b = self._route(p, q)
        segs = []
        if p.edge is not None:
            u, v, w = self.edges[p.edge]
            segs.append((p.edge, p.offset, 0.0 if a == u else w))
        path = self.vertex_path(a, b)
        for x, y in zip(path[:-1], path[1:]):
            e = self.edge_index[(x, y)]
            u, v, w = self.edges[e]
            segs.append((e, 0.0, w) if u == x else (e, w, 0.0))
        if q.edge is not None:
            u, v, w = self.edges[q.edge]
            segs.append((q.edge, 0.0 if b == u else w, q.offset))
        return segs

    def geodesic(self, p, q, t):
        if t <= 0.0:
            return p
        if t >= 1.0:
            return q
        remaining = t * self.distance(p, q)
        for e, s0, s1 in self._segments(p, q):
            ell = abs(s1 - s0)
            if remaining <= ell:
                return self.edge_point(e, s0 + math.copysign(remaining, s1 - s0))
            remaining -= ell
        return q

    def equal(self, p, q, tol=0.0):
        return self.distance(p, q) <= tol

    def basepoint(self):
        return TreePoint(vertex=0)

    def sample(self, rng):
        w = np.array([e[2] for e in self.edges])
        e = int(rng.choice(len(w), p=w / w.sum()))
        return self.edge_point(e, rng.uniform(0.0, w[e]))

    def magnitude(self, p):
        return max(1.0, max(w for _, _, w in self.edges))

    def to_config(self):
        return {"kind": "tree", "edges": [[u, v, w] for u, v, w in self.edges]}

    def point_to_json(self, p):
        if p.vertex is not None:
            return {"vertex": p.vertex}
        return {"edge": p.edge, "offset": p.offset}

    def point_from_json(self, obj):
        if not isinstance(obj, dict):
            raise ConfigError("tree points are {'vertex': v} or {'edge': e, 'offset': s}")
        if "vertex" in obj:
            return self.vertex_point(obj["vertex"])
        return self.edge_point(obj["edge"], obj["offset"])


# ---------------------------------------------------------------- products

class Product(Space):
    """l2 product of finitely many spaces of curvature <= 0 (a CAT(0) space)."""

    kind = "product"

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ConfigError("a product needs at least one factor")
        for f in factors:
            if f.curvature.kappa > 0:
                raise ConfigError("product factors must have curvature <= 0")
        self.factors = factors
        self.curvature = Curvature(0.0)

    def validate(self, p):
        p = tuple(p)
        if len(p) != len(self.factors):
            raise DimensionError("product point needs %d components" % len(self.factors))
        return tuple(f.validate(x) for f, x in zip(self.factors, p))

    def component_distances(self, p, q):
        return [f.distance(a, b) for f, a, b in zip(self.factors, p, q)]

    def distance(self, p, q) -> float:
        return math.sqrt(sum(d * d for d in self.component_distances(p, q)))

    def geodesic(self, p, q, t):
        return tuple(f.geodesic(a, b, t) for f, a, b in zip(self.factors, p, q))

    def basepoint(self):
        return tuple(f.basepoint() for f in self.factors)

    def sample(self, rng):
        return tuple(f.sample(rng) for f in self.factors)

    def magnitude(self, p):
        return max(f.magnitude(x) for f, x in zip(self.factors, p))

    def to_config(self):
        return {"kind": "product", "factors": [f.to_config() for f in self.factors]}

    def point_to_json(self, p):
        return [f.point_to_json(x) for f, x in zip(self.factors, p)]

    def point_from_json(self, obj):
        if len(obj) != len(self.factors):
            raise ConfigError("product point needs %d components" % len(self.factors))
        return tuple(f.point_from_json(x) for f, x in zip(self.factors, obj))


# ---------------------------------------------------------------- cones

@dataclass(frozen=True, eq=False)
class ConePoint:
    """(radius, base point); every radius-0 point is the apex."""

    r: float
    base: object = None

    def __eq__(self, other):
        if not isinstance(other, ConePoint):
            return NotImplemented
        if self.r == 0.0 and other.r == 0.0:
            return True
        if self.r != other.r:
            return False
        a, b = self.base, other.base
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            return bool(np.array_equal(a, b))
        return a == b

    def __hash__(self):
        return hash(0.0) if self.r == 0.0 else hash((self.r, repr(self.base)))


def cone_formula(s, t, theta) -> float:
    """Euclidean cone metric sqrt(s^2 + t^2 - 2 s t cos(min(pi, theta)))."""
    if s < 0 or t < 0:
        raise DomainError("cone radii must be nonnegative")
    th = min(math.pi, theta)
    # s^2 + t^2 - 2st cos th = (s - t)^2 + 4 s t sin^2(th/2)
    h = math.sin(0.5 * th)
    return math.sqrt((s - t) ** 2 + 4.0 * s * t * h * h)


class Cone(Space):
    """Euclidean cone C_0(Y) over a CAT(1) base ``Y``; CAT(0)."""

    kind = "cone"

    def __init__(self, base: Space):
        if base.curvature.kappa > 1.0 + 1e-12:
            raise ConfigError("cone base must be CAT(1) (curvature bound <= 1)")
        self.base = base
        self.curvature = Curvature(0.0)

    def apex(self):
        return ConePoint(0.0, None)

    def validate(self, p):
        if not isinstance(p, ConePoint):
            raise ConstraintError("cone payloads are ConePoint instances")
        if p.r < 0:
            raise ConstraintError("negative cone radius")
        if p.r == 0.0:
            return ConePoint(0.0, None)
        return ConePoint(float(p.r), self.base.validate(p.base))

    def base_angle(self, p, q) -> float:
        return min(math.pi, self.base.distance(p.base, q.base))

    def distance(self, p, q) -> float:
        if p.r == 0.0 or q.r == 0.0:
            return abs(p.r - q.r)
        return cone_formula(p.r, q.r, self.base.distance(p.base, q.base))

    def geodesic(self, p, q, t):
        s, u = p.r, q.r
        if t <= 0.0:
            return p
        if t >= 1.0:
            return q
        if s == 0.0:
            return ConePoint(t * u, q.base)
        if u == 0.0:
            return ConePoint((1.0 - t) * s, p.base)
        theta = self.base.distance(p.base, q.base)
        if theta >= math.pi:
            ell = t * (s + u)
            if ell < s:
                return ConePoint(s - ell, p.base)
            if ell == s:
                return ConePoint(0.0, None)
            return ConePoint(ell - s, q.base)
        # develop the two rays into the plane: p at angle 0, q at angle theta
        x = (1.0 - t) * s + t * u * math.cos(theta)
        y = t * u * math.sin(theta)
        r = math.hypot(x, y)
        if r == 0.0:
            return ConePoint(0.0, None)
        phi = math.atan2(y, x)
        frac = min(max(phi / theta, 0.0), 1.0) if theta > 0 else 0.0
        return ConePoint(r, self.base.geodesic(p.base, q.base, frac))

    def scalar_product(self, p, q) -> float:
        """<p, q> = |p| |q| cos(angle at the apex)."""
        if p.r == 0.0 or q.r == 0.0:
            return 0.0
        return p.r * q.r * math.cos(self.base_angle(p, q))

    def equal(self, p, q, tol=0.0):
        return self.distance(p, q) <= tol

    def basepoint(self):
        return self.apex()

    def sample(self, rng):
        return ConePoint(float(rng.uniform(0.0, 1.0)), self.base.sample(rng))

    def magnitude(self, p):
        return max(1.0, p.r)

    def to_config(self):
        return {"kind": "cone", "base": self.base.to_config()}

    def point_to_json(self, p):
        if p.r == 0.0:
            return {"r": 0.0}
        return {"r": p.r, "base": self.base.point_to_json(p.base)}

    def point_from_json(self, obj):
        r = float(obj["r"])
        if r == 0.0:
            return ConePoint(0.0, None)
        return self.validate(ConePoint(r, self.base.point_from_json(obj["base"])))


def cone_distance(base: Space, p, q) -> float:
    """Cone metric over ``base`` for payloads ``(s, xi)``/``(t, eta)`` (tuples or ConePoints)."""
    s, xi = (p.r, p.base) if isinstance(p, ConePoint) else p
    t, eta = (q.r, q.base) if isinstance(q, ConePoint) else q
    if s < 0 or t < 0:
        raise DomainError("cone radii must be nonnegative")
    if s == 0.0 or t == 0.0:
        return abs(s - t)
    return cone_formula(s, t, base.distance(xi, eta))


# ---------------------------------------------------------------- config

def space_from_config(cfg) -> Space:
    if isinstance(cfg, Space):
        return cfg
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("space descriptors are objects with a 'kind' key")
    kind = cfg["kind"]
    try:
        if kind == "euclidean":
            return Euclidean(cfg["dim"])
        if kind == "hyperbolic":
            return Hyperbolic(cfg["dim"])
        if kind == "sphere":
            return Sphere(cfg["dim"], cfg.get("radius", 1.0))
        if kind == "tree":
            if "star" in cfg:
                return Tree.star(cfg["star"], cfg.get("length", 1.0))
            return Tree(cfg["edges"])
        if kind == "product":
            return Product([space_from_config(f) for f in cfg["factors"]])
        if kind == "cone":
            return Cone(space_from_config(cfg["base"]))
    except KeyError as exc:
        raise ConfigError("space descriptor %r missing key %s" % (kind, exc)) from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("bad %s descriptor: %s" % (kind, exc)) from None
    raise ConfigError("unknown space kind %r" % kind)


# ---------------------------------------------------------------- certificates

@dataclass
class CurvatureCertificate:
    space: dict
    kappa: float
    samples: int
    checked: int
    worst_slack: float
    failures: int
    passed: bool


def curvature_certificate(space: Space, samples: int = 1000, seed: int = 0, tol: float = 1e-9):
    """Random CAT(kappa) triangle checks: d(m, z) <= d(m_bar, z_bar) for m on [p, q].

    The comparison distance is computed in M^2(kappa) with kappa the
    space's declared curvature bound.
    """
    rng = np.random.default_rng(seed)
    k = space.curvature
    worst = math.inf
    failures = 0
    checked = 0
    for _ in range(samples):
        p, q, z = space.sample(rng), space.sample(rng), space.sample(rng)
        t = float(rng.uniform())
        a = space.distance(p, q)
        b = space.distance(q, z)
        c = space.distance(z, p)
        if a <= 1e-12 or c <= 1e-12:
            continue
        m = space.geodesic(p, q, t)
        real = space.distance(m, z)
        angle = comparison_angle(k, a, c, b, tol=1e-7)
        model = side_from_angle(k, t * a, c, angle)
        slack = model - real
        checked += 1
        worst = min(worst, slack)
        if slack < -tol * max(1.0, a + b + c):
            failures += 1
    if worst == math.inf:
        worst = 0.0
    return CurvatureCertificate(space.to_config(), k.kappa, samples, checked, worst, failures, failures == 0)
