# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirror of ``_pykernels`` (see there for semantics)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, sinh, sqrt, atan2, asin, asinh, fabs, M_PI

from catkappa.errors import DegenerateError, DomainError, TriangleInequalityError

cnp.import_array()

BACKEND = "cython"


cdef inline double _f(int sign, double x) nogil:
    if sign == 0:
        return x
    if sign > 0:
        return sin(x)
    return sinh(x)


cpdef double comparison_angle(int sign, double a, double b, double c, double tol=1e-9) except? -1.0:
    cdef double scale, u, v, w, z, lim, s2, c2
    if not (a > 0.0 and b > 0.0):
        raise DegenerateError("comparison angle needs positive adjacent sides, got a=%r b=%r" % (a, b))
    if c < 0.0:
        raise DomainError("negative side c=%r" % c)
    scale = a + b + c
    if sign > 0:
        if a > M_PI + tol or b > M_PI + tol or c > M_PI + tol:
            raise DomainError("spherical side exceeds pi")
        if scale >= 2.0 * M_PI:
            raise TriangleInequalityError("spherical perimeter %.17g >= 2 pi" % scale, side="perimeter")
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
    if u < 0.0:
        u = 0.0
    if v < 0.0:
        v = 0.0
    if w < 0.0:
        w = 0.0
    s2 = _f(sign, u) * _f(sign, v)
    c2 = _f(sign, w) * _f(sign, z)
    if s2 < 0.0:
        s2 = 0.0
    if c2 < 0.0:
        c2 = 0.0
    return 2.0 * atan2(sqrt(s2), sqrt(c2))


def comparison_angles(int sign, a, b, c, double tol=1e-9):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aa = np.ascontiguousarray(a, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bb = np.ascontiguousarray(b, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cc = np.ascontiguousarray(c, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = aa.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = comparison_angle(sign, aa[i], bb[i], cc[i], tol)
    return out.reshape(np.shape(a))


cpdef double side_from_angle(int sign, double a, double b, double gamma) except? -1.0:
    cdef double sh2, d, s, q
    if a < 0.0 or b < 0.0:
        raise DomainError("negative side")
    if not (0.0 <= gamma <= M_PI):
        raise DomainError("angle %r outside [0, pi]" % gamma)
    if sign > 0 and (a > M_PI or b > M_PI):
        raise DomainError("spherical side exceeds pi")
    # degenerate triangles are segments; return them exactly
    if gamma == 0.0:
        return fabs(a - b)
    if gamma == M_PI:
        return a + b if sign <= 0 or a + b <= M_PI else 2.0 * M_PI - a - b
    sh2 = sin(0.5 * gamma)
    sh2 = sh2 * sh2
    if sign == 0:
        d = a - b
        return sqrt(d * d + 4.0 * a * b * sh2)
    if sign < 0:
        s = sinh(0.5 * (a - b))
        return 2.0 * asinh(sqrt(s * s + sinh(a) * sinh(b) * sh2))
    s = sin(0.5 * (a - b))
    q = s * s + sin(a) * sin(b) * sh2
    if q < 0.0:
        q = 0.0
    if q > 1.0:
        q = 1.0
    return 2.0 * asin(sqrt(q))


cdef double _dist(int sign, const double[::1] p, const double[::1] q) nogil:
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double dd = 0.0, ss = 0.0, t
    if sign == 0:
        for i in range(n):
            t = p[i] - q[i]
            dd += t * t
        return sqrt(dd)
    if sign > 0:
        for i in range(n):
            t = p[i] - q[i]
            dd += t * t
            t = p[i] + q[i]
            ss += t * t
        return 2.0 * atan2(sqrt(dd), sqrt(ss))
    t = p[0] - q[0]
    dd = -t * t
    for i in range(1, n):
        t = p[i] - q[i]
        dd += t * t
    if dd < 0.0:
        dd = 0.0
    return 2.0 * asinh(0.5 * sqrt(dd))


cdef void _geodesic(int sign, const double[::1] p, const double[::1] q, double t,
                    double[::1] out) nogil:
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double d, s, wa, wb, nrm
    if sign == 0:
        for i in range(n):
            out[i] = (1.0 - t) * p[i] + t * q[i]
        return
    d = _dist(sign, p, q)
    if d == 0.0:
        for i in range(n):
            out[i] = p[i]
        return
    if sign > 0:
        s = sin(d)
        wa = sin((1.0 - t) * d) / s
        wb = sin(t * d) / s
    else:
        s = sinh(d)
        wa = sinh((1.0 - t) * d) / s
        wb = sinh(t * d) / s
    for i in range(n):
        out[i] = wa * p[i] + wb * q[i]
    if sign > 0:
        nrm = 0.0
        for i in range(n):
            nrm += out[i] * out[i]
    else:
        nrm = out[0] * out[0]
        for i in range(1, n):
            nrm -= out[i] * out[i]
    nrm = sqrt(nrm)
    for i in range(n):
        out[i] /= nrm


def model_dist(int sign, p, q):
    cdef double[::1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] qq = np.ascontiguousarray(q, dtype=np.float64)
    return _dist(sign, pp, qq)


def model_geodesic(int sign, p, q, double t):
    cdef double[::1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] qq = np.ascontiguousarray(q, dtype=np.float64)
    out = np.empty(pp.shape[0])
    cdef double[::1] o = out
    _geodesic(sign, pp, qq, t, o)
    return out


cdef double _max_dist(int sign, const double[:, ::1] pts, const double[::1] c, Py_ssize_t* idx) nogil:
    cdef Py_ssize_t i
    cdef double best = -1.0, d
    idx[0] = 0
    for i in range(pts.shape[0]):
        d = _dist(sign, c, pts[i])
        if d > best:
            best = d
            idx[0] = i
    return best


def max_dist(int sign, pts, c):
    cdef double[:, ::1] P = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t idx = 0
    cdef double r = _max_dist(sign, P, cc, &idx)
    return r, int(idx)


def minimax_iterate(int sign, pts, c0, long max_iter, double tol, int window):
    cdef double[:, ::1] P = np.ascontiguousarray(pts, dtype=np.float64)
    c_arr = np.array(c0, dtype=np.float64)
    cand_arr = np.empty_like(c_arr)
    best_arr = c_arr.copy()
    hist_arr = np.zeros(max(window, 1))
    cdef double[::1] c = c_arr
    cdef double[::1] cand = cand_arr
    cdef double[::1] best_c = best_arr
    cdef double[::1] hist = hist_arr
    cdef Py_ssize_t far = 0, far_new = 0, i, n = c.shape[0]
    cdef double r, r_new, best_r, change, t, thresh = tol * 1e-2
    cdef long k = 0
    cdef int stable = 0, hpos = 0, hcount = 0, converged = 0
    r = _max_dist(sign, P, c, &far)
    best_r = r
    hist[0] = r
    hcount = 1
    hpos = 1 % window
    with nogil:
        while k < max_iter:
            t = 1.0 / (k + 2.0)
            k += 1
            _geodesic(sign, c, P[far], t, cand)
            r_new = _max_dist(sign, P, cand, &far_new)
            if r_new > r + tol:
                continue
            change = fabs(r_new - r)
            for i in range(n):
                c[i] = cand[i]
            r = r_new
            far = far_new
            hist[hpos] = r
            hpos = (hpos + 1) % window
            if hcount < window:
                hcount += 1
            if r < best_r:
                best_r = r
                for i in range(n):
                    best_c[i] = c[i]
            if change < thresh:
                stable += 1
                if stable >= window:
                    converged = 1
                    break
            else:
                stable = 0
    spread = float(np.max(hist_arr[:hcount]) - np.min(hist_arr[:hcount]))
    return best_arr, best_r, int(k), spread, bool(converged)
