"""Circumcenters, Alexandrov angles, tangent-cone scalar products and the
small metric inequalities used by the polytope certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    DegenerateError,
    DomainError,
    LadderError,
    NonConvergenceError,
    RadiusGuardError,
)
from .model import comparison_angle, lorentz
from .spaces import Cone, ConePoint, Euclidean, Hyperbolic, Product, Space, Sphere, Tree

VERIFY_TOL = 1e-6
KERNEL_TOL = 1e-9
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------- circumcenters

@dataclass
class CircumcenterResult:
    center: object
    radius: float
    iterations: int
    residual: float
    uniqueness_guard: bool
    method: str = "iterative"
    converged: bool = True


def max_distance(space: Space, center, points):
    """(max distance, smallest index attaining it)."""
    best, idx = -1.0, 0
    for i, x in enumerate(points):
        d = space.distance(center, x)
        if d > best:
            best, idx = d, i
    return best, idx


def _normalized(space, points):
    s = space.curvature.scale
    arr = np.array([np.asarray(p, dtype=float) for p in points])
    return arr * s if space.sign else arr, s


def _ball_through(sign, R):
    """Smallest model ball with every point of ``R`` on its boundary."""
    if not R:
        return None, -1.0
    X = np.array(R)
    if len(R) == 1:
        return X[0].copy(), 0.0
    if sign == 0:
        x0 = X[0]
        V = X[1:] - x0
        A = 2.0 * V @ V.T
        b = np.einsum("ij,ij->i", V, V)
        lam = np.linalg.lstsq(A, b, rcond=None)[0]
        c = x0 + lam @ V
        return c, max(math.sqrt(float(np.dot(c - x, c - x))) for x in X)
    if sign > 0:
        G = X @ X.T
        mu = np.linalg.lstsq(G, np.ones(len(R)), rcond=None)[0]
        c = mu @ X
        n = math.sqrt(float(np.dot(c, c)))
        if n == 0.0:
            raise RadiusGuardError("points are not contained in an open hemisphere")
        c = c / n
    else:
        J = np.ones(X.shape[1])
        J[0] = -1.0
        G = (X * J) @ X.T
        mu = np.linalg.lstsq(G, -np.ones(len(R)), rcond=None)[0]
        c = mu @ X
        q = -lorentz(c, c)
        if q <= 0:
            raise DomainError("degenerate hyperbolic support set")
        c = c / math.sqrt(q)
        if c[0] < 0:
            c = -c
    return c, max(kernels.model_dist(sign, c, x) for x in X)


def _welzl(sign, P, dim):
    """Move-free Welzl recursion; exact smallest enclosing model ball."""
    limit = dim + 1

    def contains(ball, p):
        c, r = ball
        if c is None:
            return False
        return kernels.model_dist(sign, c, p) <= r * (1.0 + 1e-12) + 1e-14

    def mb(n, R):
        ball = _ball_through(sign, R)
        if len(R) == limit:
            return ball
        for i in range(n):
            if not contains(ball, P[i]):
                ball = mb(i, R + [P[i]])
        return ball

    return mb(len(P), [])


def _symmetric_center(space, points):
    """Circumcenter of a single orbit of an isometry group with a fixed point.

    The circumcenter is the fixed point nearest to any orbit point; in the
    model spaces that is the (renormalized) orbit mean.
    """
    if isinstance(space, Euclidean):
        return np.mean(np.array(points, dtype=float), axis=0)
    if isinstance(space, (Hyperbolic, Sphere)):
        m = np.mean(np.array(points, dtype=float), axis=0)
        if isinstance(space, Sphere):
            n = float(np.linalg.norm(m))
            if n < 1e-12 * space.radius:
                raise RadiusGuardError("orbit mean vanishes; no fixed point within pi/2")
            return m * (space.radius / n)
        q = -lorentz(m, m)
        return m / math.sqrt(q)
    if isinstance(space, Tree):
        return _tree_center(space, points)[0]
    if isinstance(space, Product):
        comps = [_symmetric_center(f, [p[i] for p in points]) for i, f in enumerate(space.factors)]
        return tuple(comps)
    if isinstance(space, Cone):
        if any(p.r == 0.0 for p in points):
            return space.apex()
        s = points[0].r
        base = space.base
        try:
            zeta = _symmetric_center(base, [p.base for p in points])
        except RadiusGuardError:
            return space.apex()
        rho = base.distance(points[0].base, zeta)
        if rho < 0.5 * math.pi:
            return ConePoint(s * math.cos(rho), zeta)
        return space.apex()
    raise NotImplementedError("no symmetric fast path for %s" % space.kind)


def _tree_center(tree, points):
    a = points[0]
    ib = max(range(len(points)), key=lambda i: (tree.distance(a, points[i]), -i))
    b = points[ib]
    ic = max(range(len(points)), key=lambda i: (tree.distance(b, points[i]), -i))
    c = points[ic]
    diam = tree.distance(b, c)
    return tree.geodesic(b, c, 0.5), 0.5 * diam


def _line_search(space, c, target, points, r0, iters=60):
    """Golden-section minimization of max distance along [c, target]."""
    g = 0.5 * (math.sqrt(5.0) - 1.0)
    lo, hi = 0.0, 1.0
    f = lambda t: max_distance(space, space.geodesic(c, target, t), points)[0]
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
        if hi - lo < 1e-15:
            break
    t = x1 if f1 <= f2 else x2
    ft = min(f1, f2)
    if ft < r0:
        return space.geodesic(c, target, t), ft
    return c, r0


def _polish(space, c, points, r, tol, budget):
    """Line searches toward active points, active-pair midpoints and the active average."""
    steps = 0
    hist = [r]
    delta = 1e-2 * max(r, tol)
    floor = 1e-2 * tol
    while delta > floor * 1e-3:
        if steps >= budget:
            return c, r, steps, False, max(hist[-50:]) - min(hist[-50:])
        dists = [space.distance(c, x) for x in points]
        active = [points[i] for i, d in enumerate(dists) if d >= r - delta]
        targets = list(active)
        for i in range(len(active)):
            for j in range(i + 1, len(active)):
                targets.append(space.geodesic(active[i], active[j], 0.5))
        if len(active) > 2:
            targets.append(average_along_geodesics(space, active))
        improved = False
        for tgt in targets:
            if space.distance(c, tgt) == 0.0:
                continue
            c_new, r_new = _line_search(space, c, tgt, points, r)
            steps += 1
            if r_new < r - floor:
                improved = True
            c, r = c_new, r_new
            hist.append(r)
        if not improved:
            delta *= 0.5
    return c, r, steps, True, max(hist[-50:]) - min(hist[-50:])


def _iterative_center(space, points, tol, max_iter, window=50, warm_iter=2000):
    """Farthest-point subgradient warm start, then geodesic line-search polish."""
    sign = getattr(space, "sign", None)
    if isinstance(space, (Euclidean, Hyperbolic, Sphere)):
        P, s = _normalized(space, points)
        c0 = P[0]
        cn, _, k, _, _ = kernels.minimax_iterate(sign, P, c0, min(max_iter, warm_iter), tol * s, window)
        c = cn / s if sign else cn
    else:
        c = points[0]
        r, far = max_distance(space, c, points)
        hist = [r]
        stable = 0
        k = 0
        best_c, best_r = c, r
        while k < min(max_iter, warm_iter):
            t = 1.0 / (k + 2.0)
            k += 1
            cand = space.geodesic(c, points[far], t)
            r_new, far_new = max_distance(space, cand, points)
            if r_new > r + tol:
                continue
            change = abs(r_new - r)
            c, r, far = cand, r_new, far_new
            hist = (hist + [r])[-window:]
            if r < best_r:
                best_c, best_r = c, r
            stable = stable + 1 if change < tol * 1e-2 else 0
            if stable >= window:
                break
        c = best_c
    r, _ = max_distance(space, c, points)
    budget = max(max_iter - k, 0)
    c, r, steps, converged, residual = _polish(space, c, points, r, tol, budget)
    total = k + steps
    return c, r, total, residual, converged


def circumcenter(space: Space, points, tol: float = 1e-9, max_iter: int = 100000,
                 symmetric: bool = False, method: str = "auto") -> CircumcenterResult:
    """Minimax center argmin_c max_i d(c, x_i).

    ``method``: ``"auto"`` picks an exact fast path when one applies
    (symmetric orbit, Welzl in the model spaces, diameter midpoint in
    trees), otherwise the iterative scheme; ``"iterative"`` forces it.
    ``symmetric=True`` asserts that ``points`` form one orbit of an isometry
    group with a fixed point.
    """
    points = list(points)
    if not points:
        raise DomainError("circumcenter of an empty set")
    if method == "auto" and symmetric:
        try:
            c = _symmetric_center(space, points)
            used = "symmetric"
        except NotImplementedError:
            used = None
        if used:
            r = max_distance(space, c, points)[0]
            return _finish(space, c, r, 0, 0.0, used, True)
    if method == "auto" and isinstance(space, (Euclidean, Hyperbolic, Sphere)):
        P, s = _normalized(space, points)
        if isinstance(space, Sphere):
            m = P.mean(axis=0)
            if not all(float(np.dot(m, x)) > 0 for x in P):
                raise RadiusGuardError("points are not in an open hemisphere around their mean")
        c, _ = _welzl(space.sign, list(P), space.dim)
        c = c / s if space.sign else c
        r = max_distance(space, c, points)[0]
        return _finish(space, c, r, 0, 0.0, "welzl", True)
    if method == "auto" and isinstance(space, Tree):
        c, _ = _tree_center(space, points)
        r = max_distance(space, c, points)[0]
        return _finish(space, c, r, 0, 0.0, "tree-diameter", True)
    if method not in ("auto", "iterative"):
        raise DomainError("unknown circumcenter method %r" % method)
    c, r, its, residual, converged = _iterative_center(space, points, tol, max_iter)
    if not converged:
        raise NonConvergenceError("circumcenter did not converge within %d iterations" % max_iter)
    return _finish(space, c, r, its, residual, "iterative", converged)


def _finish(space, c, r, its, residual, method, converged):
    k = space.curvature
    guard = r < k.radius_guard
    if k.kappa > 0 and not guard:
        raise RadiusGuardError("circumradius %.17g violates pi/(2 sqrt(kappa)) = %.17g" % (r, k.radius_guard))
    return CircumcenterResult(c, float(r), int(its), float(residual), bool(guard), method, converged)


def average_along_geodesics(space, points):
    """p_1 = x_1, p_{k+1} = point at 1/(k+1) on [p_k, x_{k+1}]."""
    points = list(points)
    if not points:
        raise DomainError("nothing to average")
    p = points[0]
    for k, x in enumerate(points[1:], start=1):
        p = space.geodesic(p, x, 1.0 / (k + 1))
    return p


def circumcenter_certificate(space, center, points, probes, rel=1e-6, schedule=None):
    """max over probe directions of min over farthest points of the first variation.

    At a true circumcenter no direction decreases every farthest distance,
    so the returned value is <= 0 up to estimator error.
    """
    dists = [space.distance(center, x) for x in points]
    r = max(dists)
    far = [points[i] for i, d in enumerate(dists) if d >= r * (1 - rel) - 1e-12]
    worst = -math.inf
    for q in probes:
        vals = [distance_directional_derivative(space, center, q, x, schedule) for x in far]
        worst = max(worst, min(vals))
    return worst


# ---------------------------------------------------------------- angles

@dataclass(frozen=True)
class AngleSchedule:
    rungs: int = 14
    shrink: float = 0.5
    initial_fraction: float = 0.25
    richardson: int = 4


DEFAULT_SCHEDULE = AngleSchedule()


@dataclass
class AngleEstimate:
    value: float
    ladder: list = field(default_factory=list)
    extrapolated: bool = False
    upper_bias_bound: float = 0.0


def _richardson(values, ratio):
    """Eliminate error terms t, t^2, ... from a geometric ladder (ratio < 1)."""
    table = list(values)
    for p in range(1, len(values)):
        f = (1.0 / ratio) ** p
        table = [(f * table[i + 1] - table[i]) / (f - 1.0) for i in range(len(table) - 1)]
    return table[0]


def _angle_noise(a, b, c, gamma, eps_abs):
    """Rounding noise of a comparison angle from side errors of size ``eps_abs``.

    Linear sensitivity away from 0 and pi, square-root sensitivity near them.
    """
    lin = eps_abs * (a + b + c) / (a * b * max(math.sin(gamma), 1e-300))
    root = 2.0 * math.sqrt(eps_abs * (a + b + c)) / min(a, b)
    return 4.0 * min(lin, root)


def alexandrov_angle(space: Space, p, x, y, schedule: AngleSchedule | None = None,
                     check_monotone: bool = True, monotone_tol: float = 1e-9) -> AngleEstimate:
    """Upper angle at ``p`` between [p, x] and [p, y] as a limit of comparison angles."""
    sch = schedule or DEFAULT_SCHEDULE
    dpx = space.distance(p, x)
    dpy = space.distance(p, y)
    if dpx == 0.0 or dpy == 0.0:
        raise DegenerateError("angle needs x != p and y != p")
    kappa = space.curvature
    r = sch.initial_fraction * min(dpx, dpy)
    floor = 1e3 * _EPS * max(space.magnitude(p), space.magnitude(x), space.magnitude(y))
    ladder = []
    noise = []
    eps_abs = 8.0 * _EPS * max(space.magnitude(p), space.magnitude(x), space.magnitude(y), 1.0)
    t = r
    for _ in range(sch.rungs):
        if t < floor:
            break
        xt = space.geodesic(p, x, t / dpx)
        ys = space.geodesic(p, y, t / dpy)
        a = space.distance(p, xt)
        b = space.distance(p, ys)
        if a <= 0.0 or b <= 0.0:
            break
        c = space.distance(xt, ys)
        ang = comparison_angle(kappa, a, b, c, tol=1e-7)
        ladder.append((t, ang))
        noise.append(_angle_noise(a, b, c, ang, eps_abs))
        t *= sch.shrink
    if not ladder:
        raise DegenerateError("angle ladder is empty (points too close to p)")
    vals = [v for _, v in ladder]
    if check_monotone:
        for i in range(1, len(vals)):
            if vals[i] > vals[i - 1] + monotone_tol + noise[i] + noise[i - 1]:
                raise LadderError(
                    "comparison angles increase at rung %d (%.17g -> %.17g) on a CAT(%g) space"
                    % (i, vals[i - 1], vals[i], kappa.kappa))
    m = sch.richardson
    spread = max(vals) - min(vals)
    if spread <= 2.0 * max(noise):
        # constant ladder (flat or additive geometry): extrapolation only
        # amplifies rounding, so report the least noisy rung
        value = vals[int(np.argmin(noise))]
        return AngleEstimate(float(min(max(value, 0.0), math.pi)), ladder, False, float(spread))
    if len(vals) >= m >= 2:
        value = _richardson(vals[-m:], sch.shrink)
        extrapolated = True
    else:
        value = vals[-1]
        extrapolated = False
    value = min(max(value, 0.0), math.pi, min(vals))
    bias = abs(vals[-1] - vals[-2]) if len(vals) > 1 else 0.0
    return AngleEstimate(float(value), ladder, extrapolated, float(bias))


def distance_directional_derivative(space: Space, p, q, x0, schedule: AngleSchedule | None = None) -> float:
    """lim_{s->0} (d(p, x0) - d(gamma(s), x0)) / s with gamma the geodesic p -> q."""
    sch = schedule or DEFAULT_SCHEDULE
    dpq = space.distance(p, q)
    d0 = space.distance(p, x0)
    if d0 == 0.0:
        raise DegenerateError("target coincides with the base point")
    if dpq == 0.0:
        raise DegenerateError("probe coincides with the base point")
    s = sch.initial_fraction * min(dpq, d0)
    floor = 1e3 * _EPS * max(space.magnitude(p), space.magnitude(x0))
    vals = []
    for _ in range(sch.rungs):
        if s < floor:
            break
        g = space.geodesic(p, q, s / dpq)
        step = space.distance(p, g)
        if step <= 0.0:
            break
        vals.append((d0 - space.distance(g, x0)) / step)
        s *= sch.shrink
    if not vals:
        raise DegenerateError("empty first-variation ladder")
    m = sch.richardson
    if len(vals) >= m >= 2:
        v = _richardson(vals[-m:], sch.shrink)
    else:
        v = vals[-1]
    return float(min(1.0, max(-1.0, v)))


def tangent_scalar_product(space: Space, c, x, y, schedule=None) -> float:
    """<v_x, v_y> for the unit directions at ``c`` toward ``x`` and ``y``."""
    if space.distance(x, y) == 0.0:
        if space.distance(c, x) == 0.0:
            raise DegenerateError("x coincides with c")
        return 1.0
    return math.cos(alexandrov_angle(space, c, x, y, schedule).value)


@dataclass
class GramSummary:
    matrix: np.ndarray
    angles: np.ndarray
    total: float
    per_orbit: dict = field(default_factory=dict)


def gram_sum(space: Space, c, points, orbit_labels=None, schedule=None) -> GramSummary:
    """Pairwise cos of Alexandrov angles at ``c`` and their total (diagonal of ones included).

    ``orbit_labels[i][j]`` (optional) groups pairs; ``per_orbit`` maps a
    label to (ordered multiplicity, mean cos).
    """
    n = len(points)
    for x in points:
        if space.distance(c, x) == 0.0:
            raise DegenerateError("gram_sum needs c distinct from every point")
    M = np.eye(n)
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if space.distance(points[i], points[j]) == 0.0:
                ang = 0.0
            else:
                ang = alexandrov_angle(space, c, points[i], points[j], schedule).value
            A[i, j] = A[j, i] = ang
            M[i, j] = M[j, i] = math.cos(ang)
    per = {}
    if orbit_labels is not None:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                lab = orbit_labels[i][j]
                cnt, tot = per.get(lab, (0, 0.0))
                per[lab] = (cnt + 1, tot + M[i, j])
        per = {k: (cnt, tot / cnt) for k, (cnt, tot) in per.items()}
    return GramSummary(M, A, float(M.sum()), per)


# ---------------------------------------------------------------- inequalities

def concavity_check(cone: Cone, u, v, w, t: float) -> float:
    """<gamma(t), w> - (1-t)<u, w> - t<v, w> with true cone norms."""
    if not isinstance(cone, Cone):
        raise DomainError("concavity_check needs a cone space")
    for p in (u, v, w):
        cone.validate(p)
    if not 0.0 <= t <= 1.0:
        raise DomainError("t outside [0, 1]")
    g = cone.geodesic(u, v, t)
    sp = cone.scalar_product
    return sp(g, w) - (1.0 - t) * sp(u, w) - t * sp(v, w)


def chord_diameter_bound_check(space: Space, points, c, i: int, j: int, alpha: float,
                               angle: float | None = None, tol: float = VERIFY_TOL) -> float:
    """d(x_i, x_j)^2 - diam^2 (1 - cos alpha) / 2 for points equidistant from ``c``."""
    radii = [space.distance(c, x) for x in points]
    r = radii[0]
    if max(abs(q - r) for q in radii) > KERNEL_TOL * max(1.0, r):
        raise DomainError("points are not equidistant from the center")
    if angle is None:
        angle = alexandrov_angle(space, c, points[i], points[j]).value
    if angle < alpha - tol:
        raise DomainError("measured angle %.17g is below alpha=%.17g" % (angle, alpha))
    diam = max(space.distance(a, b) for a in points for b in points)
    dij = space.distance(points[i], points[j])
    return dij * dij - diam * diam * (1.0 - math.cos(alpha)) / 2.0


def parallelogram_check(space: Space, x0, x1, x2, x3) -> float:
    """Sum of squared sides minus sum of squared diagonals (>= 0 in CAT(0))."""
    d = space.distance
    sides = d(x0, x1) ** 2 + d(x1, x2) ** 2 + d(x2, x3) ** 2 + d(x3, x0) ** 2
    return sides - d(x0, x2) ** 2 - d(x1, x3) ** 2


@dataclass
class FlatnessReport:
    flat: bool
    worst_deviation: float
    center_angle_deviation: float
    vertex_angle_sum: float
    angle_sum_deviation: float
    distance_deviation: float


def flat_ngon_check(space: Space, points, c, tol: float = VERIFY_TOL) -> FlatnessReport:
    """Does the cycle ``points`` look like a flat regular n-gon centred at ``c``?"""
    n = len(points)
    if n < 3:
        raise DomainError("an n-gon needs n >= 3")
    target = 2.0 * math.pi / n
    cdev = 0.0
    for i in range(n):
        a = alexandrov_angle(space, c, points[i], points[(i + 1) % n]).value
        cdev = max(cdev, abs(a - target))
    vsum = 0.0
    for i in range(n):
        vsum += alexandrov_angle(space, points[i], points[i - 1], points[(i + 1) % n]).value
    sdev = abs(vsum - (n - 2) * math.pi)
    R = float(np.mean([space.distance(c, x) for x in points]))
    ddev = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            tmpl = 2.0 * R * math.sin(math.pi * (j - i) / n)
            ddev = max(ddev, abs(space.distance(points[i], points[j]) - tmpl) / max(R, 1e-300))
    worst = max(cdev, sdev, ddev)
    return FlatnessReport(worst <= tol, worst, cdev, vsum, sdev, ddev)
