import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import block_diag

from catkappa import model
from catkappa.errors import (
    ConfigError,
    DomainError,
    NotIsometryError,
    OrderCertificationError,
    SpaceMismatchError,
)
from catkappa.isometries import (
    ConeIsometry,
    LorentzMap,
    OrthogonalMap,
    ProductIsometry,
    SphereRotation,
    TreeAutomorphism,
    circle_signature,
    classify_equality,
    equality_case_probe,
    fixed_point_projection,
    hyperbolic_rotation,
    is_fixed,
    isometry_from_config,
    orbit,
    planar_rotation,
    random_finite_order_orthogonal,
    rotation_matrix,
    star_cycle,
    tangent_flat_check,
    verify_chord_inequality,
    verify_rotation_bound,
)
from catkappa.spaces import Cone, ConePoint, Euclidean, Hyperbolic, Product, Sphere, Tree, TreePoint
from oracles import dot_product_angle

H2 = Hyperbolic(2)
X_H2 = np.array([math.cosh(1.0), math.sinh(1.0), 0.0])


def r4_two_block():
    M = block_diag(rotation_matrix(2 * math.pi / 5), rotation_matrix(4 * math.pi / 5))
    return OrthogonalMap(Euclidean(4), M, 5).certify(), np.array([1.0, 0, 1, 0]) / math.sqrt(2)


# ---------------------------------------------------------------- apply / orbit

def test_apply_examples():
    g = planar_rotation(5).certify()
    assert np.allclose(g.power(np.array([1.0, 0.0]), 5), [1, 0], atol=1e-15)
    tri = star_cycle(3).certify()
    p = tri.space.edge_point(0, 0.4)
    assert tri.apply(p) == TreePoint(edge=1, offset=0.4)
    h = hyperbolic_rotation(7).certify()
    x = H2.sample(np.random.default_rng(0))
    o = H2.basepoint()
    assert H2.distance(o, h.apply(x)) == pytest.approx(H2.distance(o, x), abs=1e-12)


def test_orbit_examples():
    pts = orbit(planar_rotation(4), np.array([1.0, 0.0]))
    assert len(pts) == 4
    assert np.allclose(pts, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    g = planar_rotation(6).certify()
    fixed = orbit(g, np.zeros(2))
    assert len(fixed) == 6 and is_fixed(g, np.zeros(2))
    rep = verify_rotation_bound(g.space, g, np.zeros(2))
    assert rep.degenerate and rep.verdict == "vacuous"
    g, x = r4_two_block()
    pts = orbit(g, x)
    assert len(pts) == 5
    assert np.allclose([np.linalg.norm(p) for p in pts], 1.0, atol=1e-15)
    assert min(np.linalg.norm(pts[i] - pts[j]) for i in range(5) for j in range(i)) > 0.5


# ---------------------------------------------------------------- certification

def test_order_certification():
    E2 = Euclidean(2)
    R = rotation_matrix(2 * math.pi / 5)
    OrthogonalMap(E2, R, 5).certify()
    with pytest.raises(OrderCertificationError):
        OrthogonalMap(E2, R, 3).certify()  # g^3 != id
    with pytest.raises(OrderCertificationError):
        OrthogonalMap(E2, R, 10).certify()  # g^5 = id, so 10 is not minimal
    with pytest.raises(NotIsometryError):
        OrthogonalMap(E2, [[2.0, 0], [0, 1.0]], 2)
    with pytest.raises(NotIsometryError):
        LorentzMap(H2, -np.eye(3), 2)
    with pytest.raises(NotIsometryError):
        TreeAutomorphism(Tree([(0, 1, 1.0), (0, 2, 2.0)]), [0, 2, 1], 2)
    with pytest.raises(SpaceMismatchError):
        OrthogonalMap(H2, np.eye(3), 1)


def test_isometry_from_config():
    g = isometry_from_config(Euclidean(3), {"kind": "rotation", "n": 6})
    assert g.order == 6
    g = isometry_from_config(Euclidean(2), {"kind": "rotation", "n": 6, "m": 2})
    assert g.order == 3
    tri = Tree.star(3)
    g = isometry_from_config(tri, {"kind": "tree-automorphism", "perm": [0, 2, 3, 1], "order": 3})
    again = isometry_from_config(tri, g.to_config())
    assert again.perm == g.perm
    prod = Product([Euclidean(2), tri])
    cfg = {"kind": "product", "order": 3,
           "maps": [{"kind": "rotation", "n": 3}, {"kind": "tree-automorphism", "perm": [0, 2, 3, 1], "order": 3}]}
    assert isometry_from_config(prod, cfg).order == 3
    cone = Cone(Sphere(1))
    cfg = {"kind": "cone", "order": 4, "base": {"kind": "rotation", "n": 4}}
    assert isometry_from_config(cone, cfg).order == 4
    with pytest.raises(ConfigError):
        isometry_from_config(Euclidean(2), {"kind": "reflection"})
    with pytest.raises(ConfigError):
        isometry_from_config(tri, {"kind": "rotation", "n": 3})
    with pytest.raises(NotIsometryError):
        isometry_from_config(Euclidean(2), {"kind": "orthogonal", "matrix": [[1, 1], [0, 1]], "order": 2})


def test_random_finite_order_orthogonal_is_exact():
    rng = np.random.default_rng(1)
    for _ in range(100):
        k, n = int(rng.integers(2, 7)), int(rng.integers(2, 13))
        M = random_finite_order_orthogonal(k, n, rng)
        assert np.allclose(M.T @ M, np.eye(k), atol=1e-12)
        assert np.allclose(np.linalg.matrix_power(M, n), np.eye(k), atol=1e-10)
        for m in range(1, n):
            assert not np.allclose(np.linalg.matrix_power(M, m), np.eye(k), atol=1e-8)


# ---------------------------------------------------------------- rotation bound

def test_rotation_bound_examples():
    g = planar_rotation(5).certify()
    rep = verify_rotation_bound(g.space, g, np.array([1.0, 0.0]))
    assert rep.verdict == "pass" and abs(rep.slack) < 1e-12 and rep.equality == "equality"
    g, x = r4_two_block()
    rep = verify_rotation_bound(g.space, g, x)
    assert np.allclose(rep.center, 0, atol=1e-15)
    assert rep.measured == pytest.approx(math.acos(-0.25), abs=1e-9)
    assert rep.measured == pytest.approx(1.8234765819369751, abs=1e-9)
    assert rep.slack > 0.5 and rep.equality == "strict"
    g = star_cycle(3).certify()
    rep = verify_rotation_bound(g.space, g, TreePoint(vertex=1))
    assert rep.center == TreePoint(vertex=0)
    assert rep.measured == pytest.approx(math.pi, abs=1e-12)


@pytest.mark.parametrize("n", range(3, 13))
def test_symmetric_spaces_attain_equality(n):
    for space, g, x in ((Euclidean(2), planar_rotation(n), np.array([1.0, 0.0])),
                        (H2, hyperbolic_rotation(n), X_H2)):
        g.certify()
        rep = verify_rotation_bound(space, g, x)
        assert rep.measured == pytest.approx(2 * math.pi / n, abs=1e-6)
        assert rep.center_drift < 1e-8
        assert rep.baseline_slack > 0


def test_sphere_rotation_inside_guard():
    S = Sphere(2)
    M = np.eye(3)
    M[:2, :2] = rotation_matrix(2 * math.pi / 5)
    g = SphereRotation(S, M, 5).certify()
    x = model.exp_from_base(1.0, [0.8, 0.0])
    rep = verify_rotation_bound(S, g, x)
    assert rep.measured == pytest.approx(2 * math.pi / 5, abs=1e-6)
    assert rep.radius == pytest.approx(0.8, abs=1e-12)


def test_product_and_cone_rotations():
    tri = Tree.star(3)
    prod = Product([Euclidean(2), tri])
    g = ProductIsometry(prod, [planar_rotation(3).certify(), star_cycle(3).certify()], 3).certify()
    x = (np.array([1.0, 0.0]), TreePoint(vertex=1))
    rep = verify_rotation_bound(prod, g, x)
    # tangent-cone formula: cos = (s^2 cos(2pi/3) + t^2 cos(pi)) / (s^2 + t^2) with s = t = 1
    assert rep.measured == pytest.approx(math.acos((math.cos(2 * math.pi / 3) - 1) / 2), abs=1e-6)
    assert rep.slack > 0
    cone = Cone(Sphere(1, 1.5))
    base = Sphere(1, 1.5)
    h = SphereRotation(base, rotation_matrix(2 * math.pi / 5), 5).certify()
    g = ConeIsometry(cone, h, 5).certify()
    rep = verify_rotation_bound(cone, g, ConePoint(1.0, np.array([1.5, 0.0])))
    # base points 1.5 * 2 pi / 5 apart on the circle -> angle at the apex min(pi, 3 pi / 5)
    assert rep.center == cone.apex()
    assert rep.measured == pytest.approx(0.6 * math.pi, abs=1e-6)
    assert rep.slack == pytest.approx(0.2 * math.pi, abs=1e-6)


def test_random_zoo_isometries_respect_the_bound():
    rng = np.random.default_rng(3)
    cases = []
    for _ in range(10):
        n = int(rng.integers(3, 10))
        cases.append((H2, hyperbolic_rotation(n, int(rng.integers(1, n))), H2.sample(rng)))
        legs = int(rng.integers(3, 7))
        g = star_cycle(legs, 1.0, int(rng.integers(1, legs)))
        cases.append((g.space, g, g.space.sample(rng)))
    for space, g, x in cases:
        g.certify()
        if is_fixed(g, x):
            continue
        rep = verify_rotation_bound(space, g, x)
        if rep.verdict == "trivial":
            continue
        assert rep.measured + rep.angle.upper_bias_bound >= 2 * math.pi / g.order - 1e-6
        assert rep.measured > 1.0 / g.order
        assert rep.center_drift < 1e-8


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_random_orthogonal_bound_property(seed):
    rng = np.random.default_rng(seed)
    k, n = int(rng.integers(2, 7)), int(rng.integers(3, 13))
    M = random_finite_order_orthogonal(k, n, rng)
    g = OrthogonalMap(Euclidean(k), M, n).certify()
    x = rng.normal(size=k)
    rep = verify_rotation_bound(g.space, g, x)
    assert rep.measured >= 2 * math.pi / n - 1e-6
    assert rep.measured > 1.0 / n
    assert rep.measured == pytest.approx(dot_product_angle(M, x, n), abs=1e-8)


def test_equality_classification_band():
    assert classify_equality(1e-8) == "equality"
    assert classify_equality(1e-5) == "inconclusive"
    assert classify_equality(1e-3) == "strict"


# ---------------------------------------------------------------- chord inequality

def test_chord_inequality_examples():
    g = planar_rotation(4).certify()
    rep = verify_chord_inequality(g.space, g, np.array([1.0, 0.0]))
    assert rep.chord_ratio == pytest.approx(math.sqrt(2), abs=1e-12)
    assert rep.equality == "equality" and rep.flat.flat and rep.verdict == "pass"
    g = planar_rotation(5).certify()
    rep = verify_chord_inequality(g.space, g, np.array([1.0, 0.0]))
    assert rep.chord_ratio == pytest.approx(1.6180339887, abs=1e-10)
    assert rep.chord_ratio == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)
    g = hyperbolic_rotation(5).certify()
    rep = verify_chord_inequality(H2, g, X_H2)
    # hyperbolic law of cosines oracle for the chords at circumradius 1
    d1 = math.acosh(math.cosh(1) ** 2 - math.sinh(1) ** 2 * math.cos(2 * math.pi / 5))
    d2 = math.acosh(math.cosh(1) ** 2 - math.sinh(1) ** 2 * math.cos(4 * math.pi / 5))
    assert rep.chord_ratio == pytest.approx(d2 / d1, abs=1e-12)
    assert rep.chord_ratio < 2 * math.cos(math.pi / 5) and rep.equality == "strict"
    assert not rep.flat.flat and rep.verdict == "pass"


def test_chord_inequality_rejections():
    g = planar_rotation(3).certify()
    with pytest.raises(DomainError):
        verify_chord_inequality(g.space, g, np.array([1.0, 0.0]))
    S = Sphere(2)
    M = np.eye(3)
    M[:2, :2] = rotation_matrix(2 * math.pi / 5)
    g = SphereRotation(S, M, 5).certify()
    with pytest.raises(DomainError):
        verify_chord_inequality(S, g, model.exp_from_base(1.0, [0.5, 0.0]))


@pytest.mark.parametrize("n", range(4, 13))
def test_flat_orbits_give_exact_chord_ratio(n):
    g = planar_rotation(n).certify()
    rep = verify_chord_inequality(g.space, g, np.array([2.0, 0.5]))
    assert rep.chord_ratio == pytest.approx(2 * math.cos(math.pi / n), abs=1e-9)
    assert rep.flat.flat
    g = hyperbolic_rotation(n).certify()
    rep = verify_chord_inequality(H2, g, X_H2)
    assert rep.chord_ratio < 2 * math.cos(math.pi / n)
    assert not rep.flat.flat


def test_chord_inequality_on_trees():
    g = star_cycle(5).certify()
    rep = verify_chord_inequality(g.space, g, g.space.edge_point(0, 0.5))
    assert rep.chord_ratio == pytest.approx(1.0) and rep.chord_slack > 0


# ---------------------------------------------------------------- equality case

def test_equality_probe_examples():
    g = planar_rotation(6).certify()
    sig = equality_case_probe(g.space, g, np.array([1.0, 0.0]))
    assert sig.applicable and sig.passed
    assert np.allclose(sig.distances, [math.pi / 3, 2 * math.pi / 3, math.pi, 2 * math.pi / 3, math.pi / 3],
                       atol=1e-7)
    g = hyperbolic_rotation(5).certify()
    sig = equality_case_probe(H2, g, X_H2)
    assert sig.passed
    assert np.allclose(sig.distances, [2 * math.pi / 5, 4 * math.pi / 5, 4 * math.pi / 5, 2 * math.pi / 5],
                       atol=1e-5)
    g, x = r4_two_block()
    sig = equality_case_probe(g.space, g, x)
    assert not sig.applicable and "not attained" in sig.reason


def test_tangent_flat_examples():
    assert tangent_flat_check(circle_signature(6), 6).passed
    g = hyperbolic_rotation(5).certify()
    sig = equality_case_probe(H2, g, X_H2)
    rep = tangent_flat_check(sig.distances, 5)
    assert rep.passed and rep.cone_deviation < 1e-6
    assert np.allclose(rep.cone_distances[0, 1], 2 * math.sin(math.pi / 5), atol=1e-6)
    bad = circle_signature(6).copy()
    bad[2] += 0.1
    rep = tangent_flat_check(bad, 6)
    assert not rep.passed and rep.reason == "signature mismatch"
    with pytest.raises(DomainError):
        tangent_flat_check([1.0, 2.0], 6)


def test_equality_transfer():
    """Whenever the bound is attained the circle signature passes."""
    for n in range(3, 13):
        for space, g, x in ((Euclidean(2), planar_rotation(n), np.array([0.3, -1.2])),
                            (H2, hyperbolic_rotation(n), X_H2)):
            g.certify()
            rep = verify_rotation_bound(space, g, x)
            if abs(rep.slack) < 1e-6:
                sig = equality_case_probe(space, g, x, rep)
                assert sig.passed and tangent_flat_check(sig.distances, n).passed


def test_fixed_point_projection():
    g = planar_rotation(5).certify()
    assert np.allclose(fixed_point_projection(g, np.array([3.0, 1.0])), 0, atol=1e-15)
    g = hyperbolic_rotation(4).certify()
    assert H2.distance(fixed_point_projection(g, X_H2), H2.basepoint()) < 1e-12
