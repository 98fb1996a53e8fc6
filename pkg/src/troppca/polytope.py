"""Tropical polytopes: projection, type vectors, cells, and containment.

A polytope is the tropical convex hull of finitely many points. Projection
uses the closed form: lambda_k = min(D - D_k) coordinatewise, and the image
is the coordinatewise max of lambda_k + D_k; the residual is the tropical
distance from a point to its projection. Type vectors record, per
coordinate, which vertices attain the max of D_k - x; a point lies in the
polytope exactly when every coordinate's set is nonempty, and points sharing
a type form a cell. Polytopes are read-only after construction, so one
instance can serve any number of concurrent projection calls.
"""

import warnings

import numpy as np

from . import kernels
from .core import TOL, trop_dist, trop_eq
from .ultrametrics import LeafPairIndex, Ultrametric, leaf_count_for

TypeVector = tuple[frozenset[int], ...]


def _vertex_matrix(vertices) -> np.ndarray:
    rows = []
    for v in vertices:
        rows.append(v.vector if isinstance(v, Ultrametric) else np.asarray(v, dtype=np.float64))
    if not rows:
        raise ValueError("a polytope needs at least one vertex")
    mat = np.ascontiguousarray(np.vstack(rows), dtype=np.float64)
    if not np.all(np.isfinite(mat)):
        raise ValueError("vertex coordinates must be finite")
    return mat


class TropicalPolytope:
    """Tropical convex hull of an ordered list of vertices.

    Vertices that coincide in the torus (within `tol`) are dropped with a
    warning rather than rejected; MCMC proposals can collapse vertices
    transiently and the hull they span is unchanged.
    """

    def __init__(self, vertices, tol: float = TOL):
        mat = _vertex_matrix(vertices)
        keep = []
        for i in range(mat.shape[0]):
            if any(trop_eq(mat[i], mat[j], tol) for j in keep):
                warnings.warn(f"dropping vertex {i}: torus-equal to an earlier vertex")
                continue
            keep.append(i)
        self._vertices = mat[keep]
        self._vertices.setflags(write=False)

    @property
    def vertices(self) -> np.ndarray:
        """Read-only (s, e) matrix of vertex coordinates."""
        return self._vertices

    @property
    def n_vertices(self) -> int:
        return self._vertices.shape[0]

    @property
    def dim(self) -> int:
        return self._vertices.shape[1]

    def _check_dim(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=np.float64)
        if p.shape != (self.dim,):
            raise ValueError(f"point has shape {p.shape}, polytope lives in R^{self.dim}")
        return p

    def project(self, point):
        """Projection onto the hull and its lambda vector.

        The result always lies in the polytope; a point already inside maps
        to itself (in the torus), which makes projection idempotent.
        """
        return kernels.project_point(self._vertices, self._check_dim(point))

    def project_batch(self, points):
        """Row-wise projection; returns ((n, e) projections, (n, s) lambdas)."""
        return kernels.project_batch(self._vertices, points)

    def residual(self, point) -> float:
        """Tropical distance from a point to its projection (0 iff inside)."""
        proj, _ = self.project(point)
        return trop_dist(point, proj)

    def type_of(self, point, tol: float = TOL) -> TypeVector:
        """Per-coordinate sets of vertices attaining max(D_k - x), 0-based."""
        x = self._check_dim(point)
        diff = self._vertices - x
        row_max = diff.max(axis=1)
        hits = diff >= (row_max[:, None] - tol)
        return tuple(frozenset(np.nonzero(hits[:, j])[0].tolist()) for j in range(self.dim))

    def contains(self, point, tol: float = TOL) -> bool:
        """True iff every coordinate of the type vector is nonempty."""
        return all(self.type_of(point, tol))

    def same_cell(self, x, y, tol: float = TOL) -> bool:
        """Whether two points of the polytope share a type vector."""
        tx = self.type_of(x, tol)
        ty = self.type_of(y, tol)
        if not all(tx):
            raise ValueError("first point lies outside the polytope")
        if not all(ty):
            raise ValueError("second point lies outside the polytope")
        return tx == ty

    def to_json_dict(self, labels=None) -> dict:
        m = leaf_count_for(self.dim)
        if labels is None:
            labels = [str(i) for i in range(1, m + 1)]
        return {
            "m": m,
            "vertices": [[float(x) for x in row] for row in self._vertices],
            "labels": list(labels),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> tuple["TropicalPolytope", list[str]]:
        poly = cls(np.asarray(data["vertices"], dtype=np.float64))
        m = leaf_count_for(poly.dim)
        if int(data["m"]) != m:
            raise ValueError(f"m={data['m']} inconsistent with vertex dimension {poly.dim}")
        return poly, [str(x) for x in data["labels"]]


def origin_in_hull(vertices, tol: float = TOL):
    """Whether the star-tree point (origin) lies in the hull of ultrametrics.

    Checks the direct criterion, that every leaf pair attains the maximum
    coordinate of some vertex (the pair's path passes through that vertex's
    root), and cross-checks it against membership of the all-zeros point;
    the two tests must agree. Returns (answer, witness) where the witness
    maps each pair to a covering vertex index, or lists the uncovered pairs.
    """
    mat = _vertex_matrix(vertices)
    m = leaf_count_for(mat.shape[1])
    idx = LeafPairIndex(m)

    row_max = mat.max(axis=1)
    attains = mat >= (row_max[:, None] - tol)
    cover = {}
    uncovered = []
    for k in range(idx.size):
        hit = np.nonzero(attains[:, k])[0]
        if hit.size:
            cover[idx.flat_to_pair(k)] = int(hit[0])
        else:
            uncovered.append(idx.flat_to_pair(k))
    by_criterion = not uncovered

    by_membership = TropicalPolytope(mat, tol).contains(np.zeros(mat.shape[1]), tol)
    if by_criterion != by_membership:
        raise RuntimeError(
            f"origin criterion ({by_criterion}) disagrees with hull membership "
            f"({by_membership}); this should be impossible"
        )
    witness = {"cover": cover} if by_criterion else {"uncovered": uncovered}
    return by_criterion, witness
