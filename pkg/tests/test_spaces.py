import math

import numpy as np
import pytest

from catkappa.errors import ConfigError, NonUniqueGeodesicError, SpaceMismatchError
from catkappa.spaces import (
    Cone,
    ConePoint,
    Euclidean,
    Hyperbolic,
    Product,
    Sphere,
    Tree,
    TreePoint,
    cone_distance,
    curvature_certificate,
    distance,
    geodesic_point,
    space_from_config,
)

TRIPOD = {"kind": "tree", "edges": [[0, 1, 1.0], [0, 2, 1.0], [0, 3, 1.0]]}


def zoo():
    """One instance of every space kind."""
    return {
        "euclidean": Euclidean(3),
        "hyperbolic": Hyperbolic(2),
        "sphere": Sphere(2),
        "tree": Tree([(0, 1, 1.0), (1, 2, 0.5), (1, 3, 2.0), (0, 4, 1.5), (4, 5, 0.3)]),
        "product": Product([Euclidean(2), Tree.star(3), Hyperbolic(2)]),
        "cone": Cone(Sphere(1, 1.5)),
    }


ZOO = zoo()


def circle_point(theta, radius=1.0):
    return radius * np.array([math.cos(theta), math.sin(theta)])


# ---------------------------------------------------------------- distances

def test_distance_examples():
    tri = space_from_config(TRIPOD)
    a, b = tri.point(TreePoint(vertex=1)), tri.point(TreePoint(vertex=2))
    assert distance(a, b) == 2.0
    E1 = Euclidean(1)
    prod = Product([E1, E1])
    assert prod.distance((np.array([0.0]), np.array([0.0])), (np.array([3.0]), np.array([4.0]))) == 5.0
    H = Hyperbolic(2)
    p = np.array([1.0, 0.0, 0.0])
    q = np.array([math.cosh(1.0), math.sinh(1.0), 0.0])
    assert H.distance(p, q) == pytest.approx(math.acosh(-(-p[0] * q[0] + p[1:] @ q[1:])), abs=1e-14)
    assert H.distance(p, q) == pytest.approx(1.0, abs=1e-14)


def test_cone_distance_examples():
    circle = Sphere(1)
    assert cone_distance(circle, (0.0, None), (1.0, circle_point(0.3))) == 1.0
    d = cone_distance(circle, (1.0, circle_point(0.0)), (1.0, circle_point(math.pi / 2)))
    assert d == pytest.approx(math.sqrt(2), abs=1e-15)
    two_points = Tree([(0, 1, math.pi)])
    d = cone_distance(two_points, (1.0, TreePoint(vertex=0)), (2.0, TreePoint(vertex=1)))
    assert d == pytest.approx(3.0, abs=1e-15)
    with pytest.raises(ValueError):
        cone_distance(circle, (-1.0, circle_point(0)), (1.0, circle_point(0)))


def test_space_mismatch():
    a = Euclidean(2).point(np.zeros(2))
    b = Euclidean(3).point(np.zeros(3))
    with pytest.raises(SpaceMismatchError):
        distance(a, b)


# ---------------------------------------------------------------- geodesics

def test_geodesic_examples():
    tri = space_from_config(TRIPOD)
    m = geodesic_point(tri.point(TreePoint(vertex=1)), tri.point(TreePoint(vertex=2)), 0.5)
    assert m.payload == TreePoint(vertex=0)
    E = Euclidean(3)
    m = geodesic_point(E.point(np.zeros(3)), E.point(np.full(3, 2.0)), 0.25)
    assert np.allclose(m.payload, 0.5, atol=1e-15)


def test_cone_geodesic_through_apex():
    cone = Cone(Sphere(1, 1.5))  # base circle of circumference 3 pi
    # base points at circle distance 3 pi / 2 > pi
    p = ConePoint(1.0, circle_point(0.0, 1.5))
    q = ConePoint(1.0, circle_point(math.pi, 1.5))
    assert cone.base.distance(p.base, q.base) == pytest.approx(1.5 * math.pi)
    m = cone.geodesic(p, q, 0.5)
    assert m == cone.apex()
    d = cone.distance(p, q)
    assert d == pytest.approx(2.0)
    assert cone.distance(p, m) == pytest.approx(0.5 * d, abs=1e-12)
    assert cone.distance(m, q) == pytest.approx(0.5 * d, abs=1e-12)


def test_sphere_antipodes_rejected():
    S = Sphere(2)
    with pytest.raises(NonUniqueGeodesicError):
        S.geodesic(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]), 0.5)


@pytest.mark.parametrize("kind", sorted(ZOO))
def test_geodesic_postconditions_1000(kind):
    space = ZOO[kind]
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p, q = space.sample(rng), space.sample(rng)
        t = float(rng.uniform())
        d = space.distance(p, q)
        m = space.geodesic(p, q, t)
        space.validate(m)
        assert space.distance(p, m) == pytest.approx(t * d, abs=1e-10)
        assert space.distance(m, q) == pytest.approx((1 - t) * d, abs=1e-10)


# ---------------------------------------------------------------- invariants

@pytest.mark.parametrize("kind", sorted(ZOO))
def test_metric_axioms(kind):
    space = ZOO[kind]
    rng = np.random.default_rng(2)
    for _ in range(300):
        p, q, r = (space.sample(rng) for _ in range(3))
        assert space.distance(p, p) == 0.0
        assert space.distance(p, q) == space.distance(q, p)
        assert space.distance(p, r) <= space.distance(p, q) + space.distance(q, r) + 1e-12


def test_product_distance_consistency():
    space = ZOO["product"]
    rng = np.random.default_rng(3)
    for _ in range(200):
        p, q = space.sample(rng), space.sample(rng)
        parts = [f.distance(a, b) for f, a, b in zip(space.factors, p, q)]
        assert space.distance(p, q) == math.sqrt(sum(d * d for d in parts))


def test_cone_over_full_circle_is_the_plane():
    cone = Cone(Sphere(1))
    rng = np.random.default_rng(4)
    for _ in range(1000):
        (r1, r2), (t1, t2) = rng.uniform(0, 3, 2), rng.uniform(-math.pi, math.pi, 2)
        p, q = ConePoint(r1, circle_point(t1)), ConePoint(r2, circle_point(t2))
        planar = np.hypot(r1 * math.cos(t1) - r2 * math.cos(t2), r1 * math.sin(t1) - r2 * math.sin(t2))
        assert cone.distance(p, q) == pytest.approx(planar, abs=1e-12)


def test_cone_apex_equality():
    cone = Cone(Sphere(1))
    assert ConePoint(0.0, circle_point(0.1)) == ConePoint(0.0, circle_point(2.0))
    assert cone.validate(ConePoint(0.0, circle_point(1.0))) == cone.apex()
    assert ConePoint(1.0, circle_point(0.1)) != ConePoint(1.0, circle_point(0.2))


def test_tree_additivity_across_directions():
    tree = Tree.star(4, 2.0)
    rng = np.random.default_rng(5)
    for _ in range(200):
        i, j = rng.choice(4, 2, replace=False)
        t, s = rng.uniform(0.01, 2.0, 2)
        x, y = tree.edge_point(i, t), tree.edge_point(j, s)
        assert tree.distance(x, y) == t + s


def test_tree_validation():
    with pytest.raises(ConfigError):
        Tree([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    with pytest.raises(ConfigError):
        Tree([(0, 1, 0.0)])
    with pytest.raises(ConfigError):
        Tree([(0, 1, 1.0), (2, 3, 1.0), (0, 3, 1.0), (1, 4, 1.0), (5, 6, 1.0)])
    tree = Tree.star(3)
    assert tree.edge_point(0, 0.0) == TreePoint(vertex=0)
    assert tree.edge_point(0, 1.0) == TreePoint(vertex=1)


def test_config_round_trip():
    for space in ZOO.values():
        again = space_from_config(space.to_config())
        assert again == space
        rng = np.random.default_rng(6)
        p = space.sample(rng)
        q = again.point_from_json(space.point_to_json(p))
        assert space.distance(p, q) <= 1e-15


def test_config_errors():
    with pytest.raises(ConfigError):
        space_from_config({"kind": "torus"})
    with pytest.raises(ConfigError):
        space_from_config({"kind": "euclidean"})
    with pytest.raises(ConfigError):
        space_from_config({"kind": "product", "factors": [{"kind": "sphere", "dim": 2}]})
    with pytest.raises(ConfigError):
        space_from_config({"kind": "cone", "base": {"kind": "sphere", "dim": 1, "radius": 0.5}})


def test_curvature_bounds():
    assert ZOO["euclidean"].curvature.kappa == 0.0
    assert ZOO["hyperbolic"].curvature.kappa == -1.0
    assert Sphere(2, 2.0).curvature.kappa == 0.25
    for kind in ("tree", "product", "cone"):
        assert ZOO[kind].curvature.kappa == 0.0


# ---------------------------------------------------------------- certificates

def test_certificate_plane_is_equality():
    cert = curvature_certificate(Euclidean(2), samples=1000, seed=0)
    assert cert.passed and cert.worst_slack >= -1e-12


def test_certificate_tripod_against_four_point_oracle():
    tri = space_from_config(TRIPOD)
    assert curvature_certificate(tri, samples=1000, seed=0).passed
    # independent oracle: trees satisfy the four-point condition
    rng = np.random.default_rng(9)
    d = tri.distance
    for _ in range(500):
        x, y, z, w = (tri.sample(rng) for _ in range(4))
        s = sorted([d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)])
        assert s[2] - s[1] <= 1e-12


@pytest.mark.parametrize("kind", sorted(ZOO))
def test_certificates_pass(kind):
    cert = curvature_certificate(ZOO[kind], samples=400, seed=1)
    assert cert.passed, cert
    assert cert.checked > 0
