"""Numeric kernels for tropical projection, with a compiled fast path.

The MCMC fit spends nearly all of its time projecting sample points onto a
small tropical polytope, so those loops live here in two interchangeable
backends: a Cython extension and a pure-numpy fallback. The extension is
picked at import time when it built successfully; set TROPPCA_PURE_PYTHON=1
to force the fallback (the benchmark in benchmarks/bench_kernels.py compares
the two). `BACKEND` records which one is active.

All kernels take float64 C-contiguous arrays; the wrappers below coerce and
validate shapes so callers can pass any array-like. Vertices are stacked as
an (s, e) matrix, sample points as (n, e).
"""

import os

import numpy as np

from . import _numpy_impl

_impl = _numpy_impl
BACKEND = "numpy"
if not os.environ.get("TROPPCA_PURE_PYTHON"):
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        pass


def _vector(a):
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d coordinate vector, got shape {v.shape}")
    return v


def _matrix(a):
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d point matrix, got shape {m.shape}")
    return m


def tropical_distance(v, w) -> float:
    """Tropical metric: max(v - w) - min(v - w)."""
    v = _vector(v)
    w = _vector(w)
    if v.shape != w.shape:
        raise ValueError(f"dimension mismatch: {v.shape[0]} vs {w.shape[0]}")
    return _impl.tropical_distance(v, w)

def project_point(vertices, point):
    """Project one point onto tconv(vertices); returns (projection, lambdas)."""
    V = _matrix(vertices)
    p = _vector(point)
    if p.shape[0] != V.shape[1]:
        raise ValueError(f"dimension mismatch: point has {p.shape[0]} coords, vertices {V.shape[1]}")
    return _impl.project_point(V, p)


def project_batch(vertices, points):
    """Project each row of `points`; returns ((n, e) projections, (n, s) lambdas)."""
    V = _matrix(vertices)
    P = _matrix(points)
    if P.shape[1] != V.shape[1]:
        raise ValueError(f"dimension mismatch: points have {P.shape[1]} coords, vertices {V.shape[1]}")
    return _impl.project_batch(V, P)


def residual_batch(vertices, points):
    """Tropical distance from each row of `points` to its projection, as an (n,) array."""
    V = _matrix(vertices)
    P = _matrix(points)
    if P.shape[1] != V.shape[1]:
        raise ValueError(f"dimension mismatch: points have {P.shape[1]} coords, vertices {V.shape[1]}")
    return np.asarray(_impl.residual_batch(V, P))
