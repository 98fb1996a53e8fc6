"""Shared generators and brute-force oracles for the test suite."""

import numpy as np
import pytest

from troppca import Rng, cophenetic, random_coalescent
from troppca.ultrametrics import LeafPairIndex


def rand_ultrametrics(seed: int, m: int, count: int) -> np.ndarray:
    """(count, e) matrix of cophenetic vectors of random coalescent trees."""
    rng = Rng(seed)
    return np.vstack([cophenetic(t).vector for t in random_coalescent(m, count, rng)])


def random_combination(vertices: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A random tropical combination of the vertex rows (a point of the hull)."""
    lam = rng.uniform(-2.0, 0.0, size=vertices.shape[0])
    return (lam[:, None] + vertices).max(axis=0)


def tree_clades(tree) -> frozenset:
    """Clades of a tree as frozensets of 1-based numbers in leaf-label order."""
    order = {name: i + 1 for i, name in enumerate(tree.leaf_names())}

    def collect(node):
        if node.is_leaf:
            leafset = frozenset([order[node.name]])
            return leafset, {leafset}
        leaves = set()
        clades = set()
        for child in node.children:
            sub_leaves, sub_clades = collect(child)
            leaves |= sub_leaves
            clades |= sub_clades
        leafset = frozenset(leaves)
        clades.add(leafset)
        return leafset, clades

    _, clades = collect(tree.root)
    return frozenset(clades)


def grid_membership_best(vertices: np.ndarray, target: np.ndarray, step: float = 0.01, tol: float = 1e-9):
    """Distance from `target` to the closest *grid* point of the hull, e = 3.

    Normalizes everything to first coordinate 0 and scans an axis-aligned
    grid over the vertex bounding box (plus margin), keeping points whose
    type vector is full. Returns inf when no grid point lands inside.
    """
    V = vertices - vertices[:, :1]
    D = target - target[0]
    lo = V[:, 1:].min() - 0.1
    hi = V[:, 1:].max() + 0.1
    axis = np.arange(lo, hi + step, step)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    G = np.column_stack([np.zeros(a.size), a.ravel(), b.ravel()])
    diff = V[None, :, :] - G[:, None, :]          # (N, s, 3)
    row_max = diff.max(axis=2)
    full = np.ones(G.shape[0], dtype=bool)
    for j in range(3):
        full &= (diff[:, :, j] >= row_max - tol).any(axis=1)
    if not full.any():
        return float("inf")
    delta = G[full] - D
    return float((delta.max(axis=1) - delta.min(axis=1)).min())


def fw_grid_min(points: np.ndarray, step: float = 0.01) -> float:
    """Brute-force minimum of the summed tropical distance over a plane grid, e = 3."""
    D = points - points[:, :1]
    lo = D[:, 1:].min() - 0.5
    hi = D[:, 1:].max() + 0.5
    axis = np.arange(lo, hi + step, step)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    G = np.column_stack([np.zeros(a.size), a.ravel(), b.ravel()])
    total = np.zeros(G.shape[0])
    for row in D:
        delta = G - row
        total += delta.max(axis=1) - delta.min(axis=1)
    return float(total.min())


@pytest.fixture
def pair_index():
    return LeafPairIndex
