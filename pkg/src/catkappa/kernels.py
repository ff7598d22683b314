"""Hot-loop kernels with compiled / pure-Python backends.

The Cython extension ``catkappa._ckernels`` is used when it was built;
otherwise the pure-Python ``catkappa._pykernels`` is used.  Both expose the
same functions.  ``use_backend`` switches explicitly (tests and the
benchmark run both).
"""
from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = (
    "comparison_angle",
    "comparison_angles",
    "side_from_angle",
    "model_dist",
    "model_geodesic",
    "max_dist",
    "minimax_iterate",
)

_active = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    out = ["python"]
    if _ckernels is not None:
        out.insert(0, "cython")
    return out


def backend():
    """Name of the active backend (``"cython"`` or ``"python"``)."""
    return _active.BACKEND


def get(name):
    return getattr(_active, name)


def use_backend(name):
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global _active
    prev = _active.BACKEND
    if name == "python":
        _active = _pykernels
    elif name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        _active = _ckernels
    else:
        raise ValueError("unknown backend %r" % name)
    return prev


def comparison_angle(sign, a, b, c, tol=1e-9):
    return _active.comparison_angle(sign, a, b, c, tol)


def comparison_angles(sign, a, b, c, tol=1e-9):
    return _active.comparison_angles(sign, a, b, c, tol)


def side_from_angle(sign, a, b, gamma):
    return _active.side_from_angle(sign, a, b, gamma)


def model_dist(sign, p, q):
    return _active.model_dist(sign, p, q)


def model_geodesic(sign, p, q, t):
    return _active.model_geodesic(sign, p, q, t)


def max_dist(sign, pts, c):
    return _active.max_dist(sign, pts, c)


def minimax_iterate(sign, pts, c0, max_iter, tol, window):
    return _active.minimax_iterate(sign, pts, c0, max_iter, tol, window)
