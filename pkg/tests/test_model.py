import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from catkappa import kernels, model
from catkappa.errors import (
    ConstraintError,
    DomainError,
    NonUniqueGeodesicError,
    TriangleInequalityError,
)
from catkappa.model import (
    SphericalCurve,
    build_comparison_triangle,
    comparison_angle,
    hemisphere_center,
    model_distance,
    model_geodesic_point,
    random_spherical_polygon,
    side_from_angle,
)
from oracles import random_valid_sides

KAPPAS = (-1.0, 0.0, 1.0)


def colatitude_point(theta, phi=0.0):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


# ---------------------------------------------------------------- distances

def test_distance_examples(backend):
    assert model_distance(0, [0, 0], [3, 4]) == pytest.approx(5.0, abs=1e-15)
    assert model_distance(1, [0, 0, 1], [1, 0, 0]) == pytest.approx(math.pi / 2, abs=1e-15)
    p = np.array([1.0, 0.0, 0.0])
    q = np.array([math.cosh(1.0), math.sinh(1.0), 0.0])
    assert model.lorentz(p, q) == pytest.approx(-math.cosh(1.0))
    assert model_distance(-1, p, q) == pytest.approx(1.0, abs=1e-14)


def test_hyperbolic_distance_matches_arccosh_oracle(backend, rng):
    import mpmath
    mpmath.mp.dps = 40
    H = model.Curvature(-1.0)
    for _ in range(50):
        v, w = rng.normal(size=2), rng.normal(size=2)
        p, q = model.exp_from_base(H, v), model.exp_from_base(H, w)
        P = [mpmath.mpf(float(t)) for t in p]
        Q = [mpmath.mpf(float(t)) for t in q]
        ip = -P[0] * Q[0] + P[1] * Q[1] + P[2] * Q[2]
        exact = float(mpmath.acosh(-ip))
        assert model_distance(H, p, q) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_tiny_distances_are_accurate(backend):
    eps = 1e-9
    p = colatitude_point(0.7)
    q = colatitude_point(0.7 + eps)
    assert model_distance(1, p, q) == pytest.approx(eps, rel=1e-6)
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([math.cosh(eps), math.sinh(eps), 0.0])
    assert model_distance(-1, a, b) == pytest.approx(eps, rel=1e-6)


def test_non_unit_curvature_scales():
    # sphere of radius 2 has curvature 1/4
    p = np.array([0.0, 0.0, 2.0])
    q = np.array([2.0, 0.0, 0.0])
    assert model_distance(0.25, p, q) == pytest.approx(math.pi, abs=1e-14)
    assert side_from_angle(4.0, math.pi / 4, math.pi / 4, math.pi / 2) == pytest.approx(math.pi / 4, abs=1e-14)


def test_constraint_violations():
    with pytest.raises(ConstraintError):
        model_distance(1, [0, 0, 1.1], [1, 0, 0])
    with pytest.raises(ConstraintError):
        model_distance(-1, [-1, 0, 0], [1, 0, 0])
    with pytest.raises(DomainError):
        model_distance(0, [0, 0], [0, 0, 0])


# ---------------------------------------------------------------- geodesics

def test_geodesic_examples(backend):
    assert np.allclose(model_geodesic_point(0, [0, 0], [2, 0], 0.5), [1, 0], atol=1e-15)
    m = model_geodesic_point(1, [0, 0, 1], colatitude_point(math.pi / 2), 0.5)
    assert np.allclose(m, colatitude_point(math.pi / 4), atol=1e-14)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_geodesic_postconditions(backend, rng, kappa):
    k = model.Curvature(kappa)
    for _ in range(200):
        p = model.exp_from_base(k, rng.normal(size=2))
        q = model.exp_from_base(k, rng.normal(size=2))
        t = float(rng.uniform())
        d = model_distance(k, p, q)
        m = model_geodesic_point(k, p, q, t)
        assert model_distance(k, p, m) == pytest.approx(t * d, abs=1e-10)
        assert model_distance(k, m, q) == pytest.approx((1 - t) * d, abs=1e-10)


def test_geodesic_errors():
    with pytest.raises(NonUniqueGeodesicError):
        model_geodesic_point(1, [0, 0, 1], [0, 0, -1], 0.5)
    with pytest.raises(DomainError):
        model_geodesic_point(0, [0, 0], [1, 0], 1.5)


# ---------------------------------------------------------------- law of cosines

def test_side_from_angle_examples(backend):
    assert side_from_angle(0, 3, 4, math.pi / 2) == pytest.approx(5.0, abs=1e-14)
    assert side_from_angle(1, math.pi / 2, math.pi / 2, math.pi / 2) == pytest.approx(math.pi / 2, abs=1e-14)
    assert side_from_angle(-1, 1, 1, math.pi) == pytest.approx(2.0, abs=1e-14)


def test_comparison_angle_examples(backend):
    assert comparison_angle(0, 3, 4, 5) == pytest.approx(math.pi / 2, abs=1e-14)
    assert comparison_angle(0, 1, 1, 1) == pytest.approx(math.pi / 3, abs=1e-14)
    h = math.pi / 2
    assert comparison_angle(1, h, h, h) == pytest.approx(math.pi / 2, abs=1e-14)


def test_comparison_angle_errors(backend):
    with pytest.raises(TriangleInequalityError, match="c"):
        comparison_angle(0, 1, 1, 3)
    with pytest.raises(DomainError):
        comparison_angle(0, 0.0, 1, 1)
    with pytest.raises(DomainError):
        comparison_angle(1, 3, 3, 1)  # perimeter >= 2 pi
    with pytest.raises(DomainError):
        side_from_angle(0, 1, 1, 4.0)
    with pytest.raises(DomainError):
        side_from_angle(1, 4.0, 1.0, 1.0)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_round_trip_1000(backend, kappa):
    rng = np.random.default_rng(100 + int(kappa))
    worst = 0.0
    for _ in range(1000):
        a, b, g, c = random_valid_sides(rng, kappa)
        worst = max(worst, abs(comparison_angle(kappa, a, b, c) - g))
    assert worst <= 1e-9


def round_trip_condition(a, b, c, g):
    """Angle error caused by one rounding of c: eps * c * dgamma/dc (planar estimate)."""
    return 2.3e-16 * c * c / (a * b * max(math.sin(g), 1e-300))


@given(a=st.floats(1e-3, 3.0), b=st.floats(1e-3, 3.0), g=st.floats(0.0, math.pi),
       kappa=st.sampled_from(KAPPAS))
def test_round_trip_property(a, b, g, kappa):
    if kappa > 0:
        a, b = min(a, math.pi), min(b, math.pi)
    c = side_from_angle(kappa, a, b, g)
    if kappa > 0 and a + b + c >= 2 * math.pi - 1e-9:
        return
    err = abs(comparison_angle(kappa, a, b, c) - g)
    if round_trip_condition(a, b, c, g) <= 1e-11:
        assert err <= 1e-9
    else:
        # near 0 and pi the inverse has square-root sensitivity to the rounding of c
        assert err <= 1e-9 + 4.0 * math.sqrt(2.3e-16 * (a + b + c)) / min(a, b)


@given(a=st.floats(1e-3, 2.0), b=st.floats(1e-3, 2.0), g1=st.floats(0.0, math.pi), g2=st.floats(0.0, math.pi),
       kappa=st.sampled_from(KAPPAS))
def test_side_monotone_in_angle(a, b, g1, g2, kappa):
    lo, hi = sorted((g1, g2))
    assert side_from_angle(kappa, a, b, lo) <= side_from_angle(kappa, a, b, hi) + 1e-12


def test_curvature_monotonicity_1000(backend):
    rng = np.random.default_rng(7)
    done = 0
    while done < 1000:
        a, b = rng.uniform(0.01, 1.5, 2)
        c = rng.uniform(abs(a - b), a + b)
        if a + b + c >= 2 * math.pi or c <= abs(a - b) or c >= a + b:
            continue
        angles = [comparison_angle(k, a, b, c) for k in KAPPAS]
        assert angles[0] <= angles[1] + 1e-9
        assert angles[1] <= angles[2] + 1e-9
        done += 1


@given(a=st.floats(0.01, 5.0), b=st.floats(0.01, 5.0), g=st.floats(0.0, math.pi), lam=st.floats(0.01, 100.0))
def test_euclidean_scaling(a, b, g, lam):
    c = side_from_angle(0, a, b, g)
    assert side_from_angle(0, lam * a, lam * b, g) == pytest.approx(lam * c, rel=1e-12, abs=1e-300)
    if c > 0 and round_trip_condition(a, b, c, g) <= 1e-11:
        assert comparison_angle(0, lam * a, lam * b, lam * c) == pytest.approx(comparison_angle(0, a, b, c), abs=1e-9)


def test_backends_agree(rng):
    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    for _ in range(500):
        sign = int(rng.integers(-1, 2))
        a, b = rng.uniform(0.01, 1.5, 2)
        g = rng.uniform(0, math.pi)
        vals = []
        for name in ("cython", "python"):
            prev = kernels.use_backend(name)
            c = kernels.side_from_angle(sign, a, b, g)
            vals.append((c, kernels.comparison_angle(sign, a, b, c)))
            kernels.use_backend(prev)
        assert vals[0] == pytest.approx(vals[1], rel=1e-13, abs=1e-15)


def test_vectorized_comparison_angles(backend, rng):
    a, b = rng.uniform(0.1, 1.0, (2, 50))
    g = rng.uniform(0, math.pi, 50)
    c = np.array([side_from_angle(-1, x, y, z) for x, y, z in zip(a, b, g)])
    assert np.allclose(model.comparison_angles(-1, a, b, c), g, atol=1e-9)


# ---------------------------------------------------------------- comparison triangles

def test_comparison_triangle_examples():
    t = build_comparison_triangle(0, 1, math.sqrt(2), 1)
    assert (t.alpha, t.beta, t.gamma) == pytest.approx((math.pi / 2, math.pi / 4, math.pi / 4), abs=1e-14)
    t = build_comparison_triangle(0, 2, 2, 2)
    assert (t.alpha, t.beta, t.gamma) == pytest.approx((math.pi / 3,) * 3, abs=1e-14)


def test_spherical_excess_matches_lhuilier():
    a, b, c = 0.3, 0.4, 0.5
    t = build_comparison_triangle(1, a, b, c)
    s = (a + b + c) / 2
    tan_e4 = math.tan(s / 2) * math.tan((s - a) / 2) * math.tan((s - b) / 2) * math.tan((s - c) / 2)
    excess = 4 * math.atan(math.sqrt(tan_e4))
    assert t.angle_sum > math.pi
    assert t.angle_sum - math.pi == pytest.approx(excess, abs=1e-12)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_comparison_triangle_placement(kappa):
    t = build_comparison_triangle(kappa, 0.7, 0.9, 0.5)
    v0, v1, v2 = t.vertices
    assert model_distance(kappa, v0, v1) == pytest.approx(0.7, abs=1e-12)
    assert model_distance(kappa, v1, v2) == pytest.approx(0.9, abs=1e-12)
    assert model_distance(kappa, v2, v0) == pytest.approx(0.5, abs=1e-12)
    assert np.array_equal(v0, model.basepoint(kappa)) or np.allclose(v0, model.basepoint(kappa))
    again = build_comparison_triangle(kappa, 0.7, 0.9, 0.5)
    for p, q in zip(t.vertices, again.vertices):
        assert np.array_equal(p, q)


# ---------------------------------------------------------------- hemisphere center

def test_hemisphere_circle_example():
    theta = math.pi / 3
    curve = SphericalCurve([colatitude_point(theta, 2 * math.pi * i / 64) for i in range(64)])
    m = hemisphere_center(curve)
    assert np.allclose(m, [0, 0, 1], atol=1e-12)
    worst = max(model_distance(1, m, v) for v in curve.vertices)
    assert worst == pytest.approx(theta, abs=1e-12)


def test_hemisphere_doubled_segment():
    L = 2.0
    a = colatitude_point(0.5)
    b = colatitude_point(0.5 + L)
    m = hemisphere_center(SphericalCurve([a, b]))
    assert np.allclose(m, colatitude_point(0.5 + L / 2), atol=1e-12)
    assert max(model_distance(1, m, v) for v in (a, b)) == pytest.approx(L / 2, abs=1e-12)


def test_hemisphere_random_polygon_against_grid_oracle():
    rng = np.random.default_rng(58)
    curve = random_spherical_polygon(rng, 8, 5.8)
    assert curve.length == pytest.approx(5.8, abs=1e-9)
    m = hemisphere_center(curve)
    assert max(model_distance(1, m, v) for v in curve.vertices) < math.pi / 2
    # independent oracle: the minimax spherical center found by grid search
    th, ph = np.meshgrid(np.linspace(0, math.pi, 181), np.linspace(0, 2 * math.pi, 361))
    G = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1).reshape(-1, 3)
    worst_grid = np.max(np.arccos(np.clip(G @ curve.vertices.T, -1, 1)), axis=1).min()
    assert worst_grid < math.pi / 2


def test_hemisphere_errors():
    ring = [colatitude_point(math.pi / 2, 2 * math.pi * i / 8) for i in range(8)]
    with pytest.raises(DomainError):
        hemisphere_center(SphericalCurve(ring))  # the equator has length 2 pi
    with pytest.raises(DomainError):
        SphericalCurve([[0, 0, 1]])


@given(seed=st.integers(0, 2 ** 32 - 1), vertices=st.integers(2, 12), length=st.floats(0.1, 2 * math.pi - 0.05))
def test_hemisphere_containment_property(seed, vertices, length):
    curve = random_spherical_polygon(np.random.default_rng(seed), vertices, length)
    m = hemisphere_center(curve)
    assert max(model_distance(1, m, v) for v in curve.vertices) < math.pi / 2
