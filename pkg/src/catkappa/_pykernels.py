"""Pure-Python reference kernels.

Same signatures and semantics as the compiled ``_ckernels`` extension; used
when the extension is unavailable or when the fallback is requested.

All lengths are *normalized*: multiplied by sqrt(|kappa|) so that the
model curvature is exactly -1, 0 or +1 (``sign``).  Sphere points are unit
vectors, hyperboloid points satisfy <x, x>_L = -1 with the time coordinate
first.
"""
import math

import numpy as np

from .errors import DegenerateError, DomainError, TriangleInequalityError

BACKEND = "python"

PI = math.pi


def _f(sign, x):
    if sign == 0:
        return x
    if sign > 0:
        return math.sin(x)
    return math.sinh(x)


def comparison_angle(sign, a, b, c, tol=1e-9):
    """Angle between sides ``a`` and ``b`` opposite ``c`` in the model plane.

    Half-angle form: gamma = 2 atan2(sqrt(f(u) f(v)), sqrt(f(w) f(z))) with
    u, v, w the half excesses and z the half perimeter, f = id/sin/sinh.
    """
    if not (a > 0.0 and b > 0.0):
        raise DegenerateError("comparison angle needs positive adjacent sides, got a=%r b=%r" % (a, b))
    if c < 0.0:
        raise DomainError("negative side c=%r" % c)
    scale = a + b + c
    if sign > 0:
        if a > PI + tol or b > PI + tol or c > PI + tol:
            raise DomainError("spherical side exceeds pi")
        if scale >= 2.0 * PI:
            raise TriangleInequalityError(
                "spherical perimeter %.17g >= 2 pi" % scale, side="perimeter")
    u = 0.5 * (c - a + b)
    v = 0.5 * (c + a - b)
    w = 0.5 * (a + b - c)
    lim = -tol * scale
    if u < lim:
        raise TriangleInequalityError("side a=%.17g exceeds b + c" % a, side="a")
    if v < lim:
        raise TriangleInequalityError("side b=%.17g exceeds a + c" % b, side="b")
    if w < lim:
        raise TriangleInequalityError("side c=%.17g exceeds a + b" % c, side="c")
    z = 0.5 * scale
    u = max(u, 0.0)
    v = max(v, 0.0)
    w = max(w, 0.0)
    s2 = _f(sign, u) * _f(sign, v)
    c2 = _f(sign, w) * _f(sign, z)
    return 2.0 * math.atan2(math.sqrt(max(s2, 0.0)), math.sqrt(max(c2, 0.0)))


def comparison_angles(sign, a, b, c, tol=1e-9):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.empty(a.shape)
    for i in range(a.size):
        out.flat[i] = comparison_angle(sign, float(a.flat[i]), float(b.flat[i]), float(c.flat[i]), tol)
    return out


def side_from_angle(sign, a, b, gamma):
    """Side opposite ``gamma`` with adjacent sides ``a`` and ``b``."""
    if a < 0.0 or b < 0.0:
        raise DomainError("negative side")
    if not (0.0 <= gamma <= PI):
        raise DomainError("angle %r outside [0, pi]" % gamma)
    if sign > 0 and (a > PI or b > PI):
        raise DomainError("spherical side exceeds pi")
    # degenerate triangles are segments; return them exactly
    if gamma == 0.0:
        return abs(a - b)
    if gamma == PI:
        return a + b if sign <= 0 or a + b <= PI else 2.0 * PI - a - b
    sh = math.sin(0.5 * gamma)
    sh2 = sh * sh
    if sign == 0:
        d = a - b
        return math.sqrt(d * d + 4.0 * a * b * sh2)
    if sign < 0:
        s = math.sinh(0.5 * (a - b))
        return 2.0 * math.asinh(math.sqrt(s * s + math.sinh(a) * math.sinh(b) * sh2))
    s = math.sin(0.5 * (a - b))
    q = s * s + math.sin(a) * math.sin(b) * sh2
    return 2.0 * math.asin(math.sqrt(min(max(q, 0.0), 1.0)))


def _lorentz(x, y):
    return -x[0] * y[0] + float(np.dot(x[1:], y[1:]))


def model_dist(sign, p, q):
    """Distance between two normalized model points."""
    d = p - q
    if sign == 0:
        return float(math.sqrt(float(np.dot(d, d))))
    if sign > 0:
        s = q + p
        return 2.0 * math.atan2(math.sqrt(float(np.dot(d, d))), math.sqrt(float(np.dot(s, s))))
    n2 = _lorentz(d, d)
    return 2.0 * math.asinh(0.5 * math.sqrt(max(n2, 0.0)))


def model_geodesic(sign, p, q, t):
    """Point at fraction ``t`` of the geodesic from ``p`` to ``q``."""
    if sign == 0:
        return (1.0 - t) * p + t * q
    d = model_dist(sign, p, q)
    if d == 0.0:
        return p.copy()
    if sign > 0:
        s = math.sin(d)
        out = (math.sin((1.0 - t) * d) / s) * p + (math.sin(t * d) / s) * q
        return out / math.sqrt(float(np.dot(out, out)))
    s = math.sinh(d)
    out = (math.sinh((1.0 - t) * d) / s) * p + (math.sinh(t * d) / s) * q
    return out / math.sqrt(-_lorentz(out, out))


def max_dist(sign, pts, c):
    """(max_i d(c, pts[i]), smallest index attaining it)."""
    best = -1.0
    idx = 0
    for i in range(pts.shape[0]):
        d = model_dist(sign, c, pts[i])
        if d > best:
            best = d
            idx = i
    return best, idx


def minimax_iterate(sign, pts, c0, max_iter, tol, window):
    """Farthest-point subgradient scheme for the minimax center.

    c_{k+1} = geodesic(c_k, x_far, 1/(k+2)); steps raising the max distance
    by more than ``tol`` are rejected.  Stops after ``window`` consecutive
    accepted steps with radius change below ``tol * 1e-2``.

    Returns (best_center, best_radius, iterations, spread, converged) where
    ``spread`` is max - min radius over the last ``window`` accepted steps.
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    c = np.array(c0, dtype=float)
    r, far = max_dist(sign, pts, c)
    best_c = c.copy()
    best_r = r
    stable = 0
    hist = [r]
    k = 0
    thresh = tol * 1e-2
    converged = False
    while k < max_iter:
        t = 1.0 / (k + 2.0)
        k += 1
        cand = model_geodesic(sign, c, pts[far], t)
        r_new, far_new = max_dist(sign, pts, cand)
        if r_new > r + tol:
            continue
        change = abs(r_new - r)
        c = cand
        r = r_new
        far = far_new
        hist.append(r)
        if len(hist) > window:
            hist.pop(0)
        if r < best_r:
            best_r = r
            best_c = c.copy()
        if change < thresh:
            stable += 1
            if stable >= window:
                converged = True
                break
        else:
            stable = 0
    spread = max(hist) - min(hist)
    return best_c, best_r, k, spread, converged
