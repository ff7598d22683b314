"""Finite-order isometries of the zoo spaces, their orbits and the orbit-angle
verification engines (rotation lower bound, chord inequality, equality case)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag
from scipy.stats import special_ortho_group

from .analysis import (
    AngleEstimate,
    alexandrov_angle,
    circumcenter,
    flat_ngon_check,
)
from .errors import (
    ConfigError,
    DomainError,
    NotIsometryError,
    OrderCertificationError,
    SpaceMismatchError,
)
from .spaces import Cone, ConePoint, Euclidean, Hyperbolic, Product, Space, Sphere, Tree, TreePoint, cone_formula

ORDER_TOL = 1e-10
FIXED_TOL = 1e-12
EQUALITY_BAND = (1e-6, 1e-4)
CENTER_DRIFT_TOL = 1e-8


class Isometry:
    """An isometry of ``space`` with a claimed finite order."""

    kind = "isometry"

    def __init__(self, space: Space, order: int):
        order = int(order)
        if order < 1:
            raise DomainError("order must be a positive integer")
        self.space = space
        self.order = order
        self._certified = False

    def _map(self, p):
        raise NotImplementedError

    def apply(self, p):
        return self._map(self.space.validate(p))

    __call__ = apply

    def power(self, p, m: int):
        """g^m p; m is reduced mod the order once the order is certified."""
        m = int(m) % self.order if self._certified else int(m)
        p = self.space.validate(p)
        for _ in range(m):
            p = self._map(p)
        return p

    def to_config(self) -> dict:
        raise NotImplementedError

    def certify(self, samples: int = 32, seed: int = 0, tol: float = ORDER_TOL):
        """Probe ``samples`` random points: g^n = id and no smaller power is the identity."""
        rng = np.random.default_rng(seed)
        space = self.space
        pts = [space.sample(rng) for _ in range(samples)]
        for p, q in zip(pts[::2], pts[1::2]):
            d0 = space.distance(p, q)
            d1 = space.distance(self._map(p), self._map(q))
            if abs(d1 - d0) > tol * max(1.0, d0):
                raise NotIsometryError("map changes a distance %.17g -> %.17g" % (d0, d1))
        n = self.order
        moved = [False] * n
        for p in pts:
            scale = max(1.0, space.magnitude(p))
            img = p
            for m in range(1, n + 1):
                img = self._map(img)
                d = space.distance(img, p)
                if m < n and d > tol * scale:
                    moved[m] = True
                if m == n and d > tol * scale:
                    raise OrderCertificationError("g^%d moves a probe point by %.3g" % (n, d))
        low = [m for m in range(1, n) if not moved[m]]
        if low:
            raise OrderCertificationError("g^%d fixes every probe point; claimed order %d is not minimal" % (low[0], n))
        self._certified = True
        return self


class MatrixIsometry(Isometry):
    """Linear action p -> M p on a model space's ambient coordinates."""

    def __init__(self, space, matrix, order):
        super().__init__(space, order)
        M = np.asarray(matrix, dtype=float)
        dim = space.ambient_dim
        if M.shape != (dim, dim):
            raise NotIsometryError("matrix shape %s does not act on %d coordinates" % (M.shape, dim))
        self.matrix = M
        self._check()

    def _check(self):
        M = self.matrix
        if np.max(np.abs(M.T @ M - np.eye(len(M)))) > 1e-10:
            raise NotIsometryError("matrix is not orthogonal")

    def _map(self, p):
        return self.matrix @ p

    def to_config(self):
        return {"kind": self.kind, "matrix": self.matrix.tolist(), "order": self.order}


class OrthogonalMap(MatrixIsometry):
    kind = "orthogonal"

    def __init__(self, space: Euclidean, matrix, order):
        if not isinstance(space, Euclidean):
            raise SpaceMismatchError("orthogonal maps act on Euclidean spaces")
        super().__init__(space, matrix, order)


class SphereRotation(MatrixIsometry):
    kind = "sphere-rotation"

    def __init__(self, space: Sphere, matrix, order):
        if not isinstance(space, Sphere):
            raise SpaceMismatchError("sphere rotations act on spheres")
        super().__init__(space, matrix, order)


class LorentzMap(MatrixIsometry):
    kind = "lorentz"

    def __init__(self, space: Hyperbolic, matrix, order):
        if not isinstance(space, Hyperbolic):
            raise SpaceMismatchError("Lorentz maps act on hyperbolic spaces")
        super().__init__(space, matrix, order)

    def _check(self):
        L = self.matrix
        J = np.diag([-1.0] + [1.0] * (len(L) - 1))
        if np.max(np.abs(L.T @ J @ L - J)) > 1e-10 * max(1.0, np.max(np.abs(L)) ** 2):
            raise NotIsometryError("matrix does not preserve the Lorentz form")
        if L[0, 0] <= 0:
            raise NotIsometryError("matrix is not orthochronous")


class TreeAutomorphism(Isometry):
    """Vertex permutation ``perm[v]`` mapping edges onto edges of equal weight."""

    kind = "tree-automorphism"

    def __init__(self, tree: Tree, perm, order):
        if not isinstance(tree, Tree):
            raise SpaceMismatchError("tree automorphisms act on trees")
        super().__init__(tree, order)
        perm = [int(v) for v in perm]
        if sorted(perm) != list(range(tree.n_vertices)):
            raise NotIsometryError("not a permutation of the tree's vertices")
        self.perm = perm
        self._edge_map = []
        for u, v, w in tree.edges:
            pu, pv = perm[u], perm[v]
            e2 = tree.edge_index.get((pu, pv))
            if e2 is None or abs(tree.edges[e2][2] - w) > 1e-12 * w:
                raise NotIsometryError("edge (%d,%d) is not mapped onto an edge of equal weight" % (u, v))
            self._edge_map.append((e2, tree.edges[e2][0] == pu))

    def _map(self, p: TreePoint):
        if p.vertex is not None:
            return TreePoint(vertex=self.perm[p.vertex])
        e2, same = self._edge_map[p.edge]
        w = self.space.edges[e2][2]
        return TreePoint(edge=e2, offset=p.offset if same else w - p.offset)

    def to_config(self):
        return {"kind": self.kind, "perm": list(self.perm), "order": self.order}


class ProductIsometry(Isometry):
    kind = "product"

    def __init__(self, space: Product, maps, order):
        if not isinstance(space, Product):
            raise SpaceMismatchError("product maps act on product spaces")
        maps = list(maps)
        if len(maps) != len(space.factors):
            raise NotIsometryError("need one component map per factor")
        for f, g in zip(space.factors, maps):
            if g.space != f:
                raise SpaceMismatchError("component map acts on the wrong factor")
        super().__init__(space, order)
        self.maps = maps

    def _map(self, p):
        return tuple(g._map(x) for g, x in zip(self.maps, p))

    def to_config(self):
        return {"kind": self.kind, "maps": [g.to_config() for g in self.maps], "order": self.order}


class ConeIsometry(Isometry):
    """(r, xi) -> (r, h xi) for a base isometry h."""

    kind = "cone"

    def __init__(self, space: Cone, base_map: Isometry, order):
        if not isinstance(space, Cone):
            raise SpaceMismatchError("cone maps act on cones")
        if base_map.space != space.base:
            raise SpaceMismatchError("base map acts on the wrong space")
        super().__init__(space, order)
        self.base_map = base_map

    def _map(self, p: ConePoint):
        if p.r == 0.0:
            return p
        return ConePoint(p.r, self.base_map._map(p.base))

    def to_config(self):
        return {"kind": self.kind, "base": self.base_map.to_config(), "order": self.order}


# ---------------------------------------------------------------- constructors

def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def planar_rotation(n: int, m: int = 1) -> OrthogonalMap:
    """Rotation of E^2 by 2 pi m / n (order n / gcd(m, n))."""
    return OrthogonalMap(Euclidean(2), rotation_matrix(2 * math.pi * m / n), n // math.gcd(m, n))


def hyperbolic_rotation(n: int, m: int = 1, dim: int = 2) -> LorentzMap:
    """Rotation by 2 pi m / n about the hyperboloid vertex, acting on the first two spatial axes."""
    M = np.eye(dim)
    M[:2, :2] = rotation_matrix(2 * math.pi * m / n)
    return LorentzMap(Hyperbolic(dim), block_diag(1.0, M), n // math.gcd(m, n))


def star_cycle(legs: int, length: float = 1.0, shift: int = 1) -> TreeAutomorphism:
    """Cyclic shift of the legs of a star tree."""
    tree = Tree.star(legs, length)
    perm = [0] + [1 + (i + shift) % legs for i in range(legs)]
    return TreeAutomorphism(tree, perm, legs // math.gcd(shift, legs))


def random_finite_order_orthogonal(k: int, n: int, rng) -> np.ndarray:
    """Q diag(rotation blocks of angles 2 pi a_j / n, +-1) Q^T of exact order n."""
    if n < 2:
        raise DomainError("order must be >= 2")
    if n > 2 and k < 2:
        raise DomainError("order >= 3 needs dimension >= 2")
    blocks = []
    dims = 0
    if n == 2:
        blocks.append(np.array([[-1.0]]))
        dims = 1
    else:
        a = int(rng.choice([a for a in range(1, n) if math.gcd(a, n) == 1]))
        blocks.append(rotation_matrix(2 * math.pi * a / n))
        dims = 2
    while k - dims >= 2 and rng.random() < 0.7:
        blocks.append(rotation_matrix(2 * math.pi * int(rng.integers(0, n)) / n))
        dims += 2
    while dims < k:
        blocks.append(np.array([[-1.0 if (n % 2 == 0 and rng.random() < 0.5) else 1.0]]))
        dims += 1
    D = block_diag(*blocks)
    Q = special_ortho_group.rvs(k, random_state=rng) if k > 1 else np.eye(1)
    return Q @ D @ Q.T


def isometry_from_config(space: Space, cfg: dict) -> Isometry:
    """Build and certify an isometry from its configuration object."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("isometry config needs a 'kind'")
    kind = cfg["kind"]
    try:
        if kind in ("orthogonal", "lorentz", "sphere-rotation"):
            M = np.array(cfg["matrix"], dtype=float)
            order = int(cfg["order"])
            cls = {"orthogonal": OrthogonalMap, "lorentz": LorentzMap, "sphere-rotation": SphereRotation}[kind]
            g = cls(space, M, order)
        elif kind == "rotation":
            n = int(cfg["n"])
            m = int(cfg.get("m", 1))
            theta = 2 * math.pi * m / n
            if isinstance(space, Euclidean):
                M = np.eye(space.dim)
                M[:2, :2] = rotation_matrix(theta)
                g = OrthogonalMap(space, M, n // math.gcd(m, n))
            elif isinstance(space, Hyperbolic):
                M = np.eye(space.dim)
                M[:2, :2] = rotation_matrix(theta)
                g = LorentzMap(space, block_diag(1.0, M), n // math.gcd(m, n))
            elif isinstance(space, Sphere):
                M = np.eye(space.dim + 1)
                M[:2, :2] = rotation_matrix(theta)
                g = SphereRotation(space, M, n // math.gcd(m, n))
            else:
                raise ConfigError("'rotation' needs a Euclidean, hyperbolic or spherical space")
        elif kind == "tree-automorphism":
            g = TreeAutomorphism(space, cfg["perm"], int(cfg["order"]))
        elif kind == "product":
            if not isinstance(space, Product):
                raise ConfigError("product isometry on a non-product space")
            maps = [isometry_from_config(f, c) for f, c in zip(space.factors, cfg["maps"])]
            g = ProductIsometry(space, maps, int(cfg["order"]))
        elif kind == "cone":
            if not isinstance(space, Cone):
                raise ConfigError("cone isometry on a non-cone space")
            g = ConeIsometry(space, isometry_from_config(space.base, cfg["base"]), int(cfg["order"]))
        else:
            raise ConfigError("unknown isometry kind %r" % kind)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, NotIsometryError, DomainError)):
            raise
        raise ConfigError("malformed isometry config: %s" % exc) from exc
    if g.order < 2:
        raise ConfigError("isometry order must be at least 2 (got %d)" % g.order)
    return g.certify(seed=int(cfg.get("certify_seed", 0)))


# ---------------------------------------------------------------- orbits

def orbit(g: Isometry, x) -> list:
    """[x, gx, ..., g^{n-1} x] for the certified order n."""
    if not g._certified:
        g.certify()
    x = g.space.validate(x)
    pts = [x]
    for _ in range(g.order - 1):
        pts.append(g._map(pts[-1]))
    return pts


def is_fixed(g: Isometry, x) -> bool:
    space = g.space
    return space.distance(x, g.apply(x)) < FIXED_TOL * max(1.0, space.magnitude(x))


def classify_equality(slack: float, band=EQUALITY_BAND) -> str:
    if slack < band[0]:
        return "equality"
    if slack > band[1]:
        return "strict"
    return "inconclusive"


@dataclass
class OrbitReport:
    n: int
    points: list
    center: object = None
    radius: float = math.nan
    angle: AngleEstimate | None = None
    bound: float = math.nan
    slack: float = math.nan
    baseline: float = math.nan
    baseline_slack: float = math.nan
    chord_ratio: float = math.nan
    chord_bound: float = math.nan
    chord_slack: float = math.nan
    equality: str = "n/a"
    flat: object = None
    degenerate: bool = False
    center_drift: float = math.nan
    verdict: str = "pass"
    notes: list = field(default_factory=list)

    @property
    def measured(self) -> float:
        return self.angle.value if self.angle is not None else math.nan


def _verdict(slack, tol, bias=0.0):
    if slack >= -tol:
        return "pass"
    if slack >= -tol - bias:
        return "inconclusive"
    return "fail"


def _orbit_center(space, pts):
    res = circumcenter(space, pts, symmetric=True)
    return res.center, res.radius


def verify_rotation_bound(space: Space, g: Isometry, x, tol: float = 1e-6, schedule=None) -> OrbitReport:
    """Angle at the orbit circumcenter between x and gx against 2 pi / n."""
    if g.space != space:
        raise SpaceMismatchError("isometry acts on a different space")
    pts = orbit(g, x)
    n = g.order
    rep = OrbitReport(n=n, points=pts, bound=2 * math.pi / n, baseline=1.0 / n)
    if is_fixed(g, pts[0]):
        rep.degenerate = True
        rep.verdict = "vacuous"
        rep.notes.append("x is fixed by g; the orbit is a single point")
        return rep
    c, r = _orbit_center(space, pts)
    rep.center, rep.radius = c, r
    rep.center_drift = space.distance(c, g.apply(c))
    rep.angle = alexandrov_angle(space, c, pts[0], pts[1], schedule)
    a = rep.angle.value
    rep.baseline_slack = a - rep.baseline
    if n == 2:
        rep.verdict = "trivial"
        rep.notes.append("order 2: the bound is trivial, angle reported only")
        return rep
    rep.slack = a - rep.bound
    rep.equality = classify_equality(rep.slack)
    rep.verdict = _verdict(rep.slack, tol, rep.angle.upper_bias_bound)
    if rep.center_drift > CENTER_DRIFT_TOL * max(1.0, r):
        rep.verdict = "fail"
        rep.notes.append("circumcenter moved by %.3g under g" % rep.center_drift)
    if rep.baseline_slack <= 0:
        rep.verdict = "fail"
        rep.notes.append("angle does not exceed the 1/n baseline")
    return rep


def verify_chord_inequality(space: Space, g: Isometry, x, tol: float = 1e-6) -> OrbitReport:
    """d(g^2 x, x) <= 2 cos(pi/n) d(gx, x), with flatness on equality."""
    if space.curvature.kappa > 0:
        raise DomainError("the chord inequality needs a CAT(0) space")
    n = g.order
    if n < 4:
        raise DomainError("chord inequality needs n >= 4 (n = 3 orbits are equilateral)")
    pts = orbit(g, x)
    rep = OrbitReport(n=n, points=pts, chord_bound=2 * math.cos(math.pi / n))
    if is_fixed(g, pts[0]):
        rep.degenerate = True
        rep.verdict = "vacuous"
        return rep
    d1 = space.distance(pts[0], pts[1])
    d2 = space.distance(pts[0], pts[2])
    rep.chord_ratio = d2 / d1
    rep.chord_slack = rep.chord_bound * d1 - d2
    rel = rep.chord_slack / d1
    rep.equality = classify_equality(rel)
    c, r = _orbit_center(space, pts)
    rep.center, rep.radius = c, r
    rep.flat = flat_ngon_check(space, pts, c, tol=tol)
    rep.verdict = _verdict(rel, tol)
    if rep.equality == "equality" and not rep.flat.flat:
        rep.verdict = "fail"
        rep.notes.append("chord equality without a flat regular n-gon")
    return rep


@dataclass
class CircleSignature:
    applicable: bool
    distances: np.ndarray | None = None
    expected: np.ndarray | None = None
    max_deviation: float = math.nan
    passed: bool = False
    reason: str = ""


def circle_signature(n: int) -> np.ndarray:
    i = np.arange(1, n)
    return np.minimum(2 * np.pi * i / n, 2 * np.pi - 2 * np.pi * i / n)


def equality_case_probe(space: Space, g: Isometry, x, report: OrbitReport | None = None,
                        tol: float = 1e-5, schedule=None) -> CircleSignature:
    """Direction distances angle_c(x, g^i x) against the length-2pi circle signature."""
    rep = report or verify_rotation_bound(space, g, x, schedule=schedule)
    if rep.degenerate or rep.angle is None or not abs(rep.slack) < EQUALITY_BAND[0]:
        return CircleSignature(False, reason="rotation bound is not attained (slack %.3g)" % rep.slack)
    c = rep.center
    pts = rep.points
    d = np.array([alexandrov_angle(space, c, pts[0], pts[i], schedule).value for i in range(1, rep.n)])
    exp = circle_signature(rep.n)
    dev = float(np.max(np.abs(d - exp)))
    return CircleSignature(True, d, exp, dev, dev <= tol)


@dataclass
class TangentFlatReport:
    passed: bool
    signature_deviation: float
    cone_deviation: float
    cone_distances: np.ndarray
    planar_distances: np.ndarray
    reason: str = ""


def tangent_flat_check(distances, n: int, tol: float = 1e-6, signature_tol: float = 1e-5) -> TangentFlatReport:
    """Cone over the sampled direction circle against the planar rotation orbit.

    ``distances`` is either the n-1 signature d(chi, g^i chi) or a full n x n
    matrix of direction distances.
    """
    D = np.asarray(distances, dtype=float)
    if D.ndim == 1:
        if D.size != n - 1:
            raise DomainError("a signature for order %d has %d entries" % (n, n - 1))
        sig = np.concatenate([[0.0], D])
        D = np.array([[sig[(j - i) % n] for j in range(n)] for i in range(n)])
    if D.shape != (n, n):
        raise DomainError("direction matrix must be %d x %d" % (n, n))
    expected = np.concatenate([[0.0], circle_signature(n)])
    E = np.array([[expected[(j - i) % n] for j in range(n)] for i in range(n)])
    sig_dev = float(np.max(np.abs(D - E)))
    cone = np.array([[cone_formula(1.0, 1.0, D[i, j]) for j in range(n)] for i in range(n)])
    idx = np.arange(n)
    planar = 2.0 * np.abs(np.sin(np.pi * (idx[None, :] - idx[:, None]) / n))
    cone_dev = float(np.max(np.abs(cone - planar)))
    ok = sig_dev <= signature_tol and cone_dev <= tol
    reason = "" if ok else ("signature mismatch" if sig_dev > signature_tol else "cone distances off the planar model")
    return TangentFlatReport(ok, sig_dev, cone_dev, cone, planar, reason)


def fixed_point_projection(g: Isometry, x):
    """Nearest fixed point of the cyclic group <g> to ``x`` (circumcenter of its orbit)."""
    pts = orbit(g, x)
    if is_fixed(g, pts[0]):
        return pts[0]
    return _orbit_center(g.space, pts)[0]


__all__ = [
    "Isometry", "OrthogonalMap", "SphereRotation", "LorentzMap", "TreeAutomorphism",
    "ProductIsometry", "ConeIsometry", "planar_rotation", "hyperbolic_rotation", "star_cycle",
    "random_finite_order_orthogonal", "isometry_from_config", "orbit", "is_fixed",
    "classify_equality", "OrbitReport", "verify_rotation_bound", "verify_chord_inequality",
    "CircleSignature", "circle_signature", "equality_case_probe", "TangentFlatReport",
    "tangent_flat_check", "fixed_point_projection", "rotation_matrix",
]
