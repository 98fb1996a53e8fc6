"""Max-plus arithmetic on the tropical projective torus.

Points are plain float64 vectors of length e >= 2. Two vectors name the same
torus point when their difference is a constant vector; `normalize` picks the
representative whose first coordinate is 0 (the plotting convention), and
`trop_eq` compares modulo that equivalence. All functions are pure and safe
to call concurrently.
"""

import math

import numpy as np

from . import kernels

TOL = 1e-9
NEG_INF = float("-inf")


def as_point(coords) -> np.ndarray:
    """Coerce to a torus point: 1-d float64, length >= 2, all finite."""
    v = np.asarray(coords, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError("a tropical point needs at least 2 coordinates")
    if not np.all(np.isfinite(v)):
        raise ValueError("tropical point coordinates must be finite")
    return v


def trop_add(a: float, b: float) -> float:
    """Tropical addition max(a, b); -inf is the additive identity."""
    return max(a, b)


def trop_mul(a: float, b: float) -> float:
    """Tropical multiplication a + b; 0 is the multiplicative identity."""
    return a + b


def trop_scale(a: float, v) -> np.ndarray:
    """Shift every coordinate by the finite scalar a (tropical scaling)."""
    if not math.isfinite(a):
        raise ValueError("tropical scalar must be finite")
    return as_point(v) + a


def trop_vec_add(a: float, v, b: float, w) -> np.ndarray:
    """Tropical combination of two points: coordinatewise max of the shifts."""
    v = as_point(v)
    w = as_point(w)
    if v.shape != w.shape:
        raise ValueError(f"dimension mismatch: {v.shape[0]} vs {w.shape[0]}")
    return np.maximum(v + a, w + b)


def normalize(v) -> np.ndarray:
    """Canonical representative with first coordinate 0."""
    v = as_point(v)
    return v - v[0]


def trop_dist(v, w) -> float:
    """Generalized Hilbert projective metric: max(v-w) - min(v-w).

    Equals the maximum of |v_i - w_i - v_j + w_j| over coordinate pairs, and
    is zero exactly when v and w coincide in the torus.
    """
    return kernels.tropical_distance(as_point(v), as_point(w))


def trop_eq(v, w, tol: float = TOL) -> bool:
    """Torus equality within `tol`."""
    return trop_dist(v, w) <= tol
