"""Tropical Fermat-Weber points: the zero-dimensional tropical PCA.

A Fermat-Weber point minimizes the sum of tropical distances to the sample.
That minimum is the value of a linear program: with the first coordinate of
x pinned to 0 (the torus gauge), minimize sum_i t_i subject to

    t_i >= (x_j - x_k) - (D_ij - D_ik)   for every i and ordered pair j != k,

since the right-hand side ranges over exactly the differences whose maximum
is the tropical distance d(x, D_i). The minimizer is generally a polytope;
`fermat_weber` canonicalizes to its lexicographically smallest normalized
point by a staged sequence of LPs so tests get one deterministic answer.

`pull_into_hull` moves a Fermat-Weber point into the tropical convex hull of
the sample without changing any distance: every coordinate whose type is
empty is lowered until it ties some vertex's maximum. For ultrametric
samples the pulled point is itself ultrametric.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .core import normalize, trop_dist
from .polytope import TropicalPolytope

# Keeps the LP at desk scale: e = m(m-1)/2 <= 300, i.e. at most 25 leaves.
MAX_DIMENSION = 300


@dataclass(frozen=True)
class FermatWeberResult:
    point: np.ndarray
    objective: float
    in_hull: bool


def fw_objective(sample, point) -> float:
    """Sum of tropical distances from `point` to the sample rows."""
    D = np.asarray(sample, dtype=np.float64)
    x = np.asarray(point, dtype=np.float64)
    diff = x[None, :] - D
    return float((diff.max(axis=1) - diff.min(axis=1)).sum())


def _sample_matrix(sample) -> np.ndarray:
    rows = [np.asarray(getattr(v, "vector", v), dtype=np.float64) for v in sample]
    if not rows:
        raise ValueError("empty sample")
    D = np.vstack(rows)
    if D.shape[1] > MAX_DIMENSION:
        raise ValueError(
            f"instance too large: dimension {D.shape[1]} exceeds {MAX_DIMENSION} "
            "(more than 25 leaves)"
        )
    return D


def _base_constraints(D: np.ndarray):
    """Sparse A_ub, b_ub for the distance epigraph constraints.

    Row i * (e*(e-1)) + p encodes x_j - x_k - t_i <= D_ij - D_ik for the
    p-th ordered pair (j, k); the x_0 column is absent (pinned to 0).
    """
    n, e = D.shape
    pj, pk = np.nonzero(~np.eye(e, dtype=bool))
    npairs = pj.size
    b = (D[:, pj] - D[:, pk]).reshape(-1)

    r_idx = np.arange(n * npairs)
    jj = np.tile(pj, n)
    kk = np.tile(pk, n)
    mj = jj > 0
    mk = kk > 0
    rows = np.concatenate([r_idx[mj], r_idx[mk], r_idx])
    cols = np.concatenate([jj[mj] - 1, kk[mk] - 1, e - 1 + r_idx // npairs])
    vals = np.concatenate([np.ones(mj.sum()), -np.ones(mk.sum()), -np.ones(r_idx.size)])
    A = coo_matrix((vals, (rows, cols)), shape=(n * npairs, e - 1 + n)).tocsr()
    return A, b


def _solve(A, b, c, A_eq=None, b_eq=None, bounds=(None, None)):
    res = linprog(c, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"Fermat-Weber LP failed: {res.message}")
    return res


def fermat_weber(sample, canonical: bool = True) -> FermatWeberResult:
    """Global minimizer of the summed tropical distance to the sample.

    With `canonical=True` (the default) the returned point is the
    lexicographically smallest normalized minimizer, found by minimizing
    each coordinate in turn while the objective is pinned to its optimum and
    earlier coordinates are fixed; with False the solver's own optimal
    vertex is returned, which is cheaper and still deterministic, and has
    the same (unique) objective value.
    """
    D = _sample_matrix(sample)
    n, e = D.shape
    A, b = _base_constraints(D)
    c = np.concatenate([np.zeros(e - 1), np.ones(n)])
    bounds = [(None, None)] * (e - 1) + [(0, None)] * n
    res = _solve(A, b, c, bounds=bounds)
    x = res.x

    if canonical:
        pin = coo_matrix(c.reshape(1, -1))
        target = np.array([float(c @ x)])
        for j in range(e - 1):
            obj = np.zeros(e - 1 + n)
            obj[j] = 1.0
            res = _solve(A, b, obj, A_eq=pin, b_eq=target, bounds=bounds)
            x = res.x
            bounds[j] = (float(x[j]), float(x[j]))

    point = normalize(np.concatenate([[0.0], x[: e - 1]]))
    objective = fw_objective(D, point)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # duplicate sample rows are fine here
        # judged at LP accuracy, not at the exact-arithmetic tolerance
        in_hull = TropicalPolytope(D).contains(point, tol=1e-7)
    return FermatWeberResult(point=point, objective=objective, in_hull=in_hull)


def pull_into_hull(sample, point, tol: float = 1e-7) -> np.ndarray:
    """Move an optimal Fermat-Weber point into tconv(sample).

    Coordinates whose type is empty are decreased until they tie the maximum
    of some `D_i - x`; no tropical distance changes, so the objective is
    preserved. If the objective does move by more than `tol` (relative), the
    input was not optimal and a ValueError is raised.
    """
    D = _sample_matrix(sample)
    x = np.asarray(point, dtype=np.float64).copy()
    if x.shape != (D.shape[1],):
        raise ValueError(f"point has shape {x.shape}, sample lives in R^{D.shape[1]}")
    before = fw_objective(D, x)
    row_max = (D - x[None, :]).max(axis=1)
    gaps = (row_max[:, None] - (D - x[None, :])).min(axis=0)
    pulled = x - gaps
    after = fw_objective(D, pulled)
    if abs(after - before) > tol * max(1.0, before):
        raise ValueError(
            f"objective moved from {before!r} to {after!r} while pulling; "
            "the input point was not a Fermat-Weber minimizer"
        )
    return pulled
