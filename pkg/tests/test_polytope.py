"""Projection, types, cells, and the origin criterion.

The five points of the running example: with vertices (0,0,0), (0,3,0),
(0,3,3), the point (0,1,2) projects to (0,1,1) at distance 1, while (0,2,1)
is already a tropical combination of the vertices (0 . v1 + -1 . v2 + -2 . v3)
and projects to itself.
"""

import warnings

import numpy as np
import pytest

from troppca import Rng, TropicalPolytope, cophenetic, origin_in_hull, random_coalescent, trop_eq
from troppca.ultrametrics import topology_from_vector

from conftest import grid_membership_best, rand_ultrametrics, random_combination

D1 = np.array([0.0, 0.0, 0.0])
D2 = np.array([0.0, 3.0, 0.0])
D3 = np.array([0.0, 3.0, 3.0])
D4 = np.array([0.0, 1.0, 2.0])
D5 = np.array([0.0, 2.0, 1.0])


@pytest.fixture
def example():
    return TropicalPolytope([D1, D2, D3])


def test_projection_example_exact(example):
    proj, lam = example.project(D4)
    assert np.array_equal(lam, [0.0, -2.0, -2.0])
    assert np.array_equal(proj, [0.0, 1.0, 1.0])
    assert example.residual(D4) == 1.0


def test_projection_fixed_points(example):
    for vertex in (D1, D2, D3):
        proj, _ = example.project(vertex)
        assert trop_eq(proj, vertex, 1e-12)
        assert example.residual(vertex) <= 1e-12


def test_projection_idempotent(example):
    rng = np.random.default_rng(7)
    for _ in range(100):
        x = rng.uniform(-4, 4, size=3)
        once, _ = example.project(x)
        twice, _ = example.project(once)
        assert trop_eq(once, twice, 1e-9)


def test_projection_independent_of_vertex_order():
    rng = np.random.default_rng(8)
    for _ in range(50):
        V = rng.uniform(-3, 3, size=(4, 5))
        x = rng.uniform(-3, 3, size=5)
        base, _ = TropicalPolytope(V).project(x)
        perm = rng.permutation(4)
        other, _ = TropicalPolytope(V[perm]).project(x)
        assert trop_eq(base, other, 1e-9)


def test_type_vectors(example):
    t = example.type_of(D1)
    assert 0 in t[0]
    assert all(t)  # vertices lie in the polytope
    t_far = example.type_of(np.array([0.0, -100.0, -100.0]))
    assert not all(t_far)
    x = np.array([0.5, 1.5, -2.0])
    assert example.type_of(x) == example.type_of(x + 7.25)


def test_contains(example):
    assert example.contains(D5)
    assert not example.contains(D4)
    for vertex in (D1, D2, D3):
        assert example.contains(vertex)
    rng = np.random.default_rng(9)
    for _ in range(200):
        x = random_combination(example.vertices, rng)
        assert example.contains(x)


def test_contains_agrees_with_projection_fixed_point(example):
    for point in (D1, D2, D3, D4, D5):
        proj, _ = example.project(point)
        assert example.contains(point) == (trop_eq(proj, point, 1e-12))


def test_projection_lands_inside(example):
    rng = np.random.default_rng(10)
    for _ in range(200):
        x = rng.uniform(-5, 5, size=3)
        proj, _ = example.project(x)
        assert example.contains(proj)


def test_same_cell(example):
    x = np.array([0.0, 2.5, 0.5])
    assert example.same_cell(x, x)
    assert not example.same_cell(D1, D2)
    with pytest.raises(ValueError):
        example.same_cell(D4, D1)


def test_same_cell_on_perturbed_pairs(example):
    rng = np.random.default_rng(11)
    found = 0
    for _ in range(200):
        lam = rng.uniform(-2, 0, size=3)
        x = (lam[:, None] + example.vertices).max(axis=0)
        y = ((lam + rng.uniform(-0.02, 0.02, size=3))[:, None] + example.vertices).max(axis=0)
        if example.type_of(x) == example.type_of(y):
            assert example.same_cell(x, y)
            found += 1
    assert found > 50


def test_duplicate_vertices_dropped_with_warning():
    with pytest.warns(UserWarning, match="torus-equal"):
        poly = TropicalPolytope([D1, D2, D1 + 5.0])
    assert poly.n_vertices == 2


def test_vertex_validation():
    with pytest.raises(ValueError):
        TropicalPolytope([])
    with pytest.raises(ValueError):
        TropicalPolytope([[0.0, np.inf, 0.0]])
    with pytest.raises(ValueError):
        TropicalPolytope([D1]).project([0.0, 1.0])


def test_projection_beats_membership_grid():
    rng = np.random.default_rng(12)
    for _ in range(50):
        V = rng.uniform(0, 1, size=(3, 3))
        x = rng.uniform(0, 1, size=3)
        poly = TropicalPolytope(V)
        best = grid_membership_best(poly.vertices, x)
        assert poly.residual(x) <= best + 1e-6 + 0.01


def test_cell_topology_theorem_small():
    # same type vector => ultrametric points with the same tree shape
    rng = np.random.default_rng(13)
    checked = 0
    for trial in range(300):
        m = 4 if trial % 2 == 0 else 5
        V = rand_ultrametrics(trial + 50_000, m, 3)
        poly = TropicalPolytope(V)
        lam = rng.uniform(-2, 0, size=poly.n_vertices)
        x = (lam[:, None] + poly.vertices).max(axis=0)
        y = ((lam + rng.uniform(-0.05, 0.05, size=poly.n_vertices))[:, None] + poly.vertices).max(axis=0)
        if poly.type_of(x) != poly.type_of(y):
            continue
        assert topology_from_vector(x, m) == topology_from_vector(y, m)
        checked += 1
    assert checked > 100


def test_origin_in_hull_star_vertex():
    star = np.array([2.0, 2.0, 2.0])
    inside, witness = origin_in_hull([star])
    assert inside
    assert set(witness["cover"]) == {(1, 2), (1, 3), (2, 3)}


def test_origin_in_hull_strict_cherry():
    cherry = np.array([1.0, 2.0, 2.0])  # pair (1,2) never attains the max
    inside, witness = origin_in_hull([cherry])
    assert not inside
    assert witness["uncovered"] == [(1, 2)]


def test_origin_lemma_agreement_random():
    rng = Rng(14)
    for trial in range(300):
        m = 4 if trial % 2 == 0 else 5
        s = 1 + trial % 4
        vecs = [cophenetic(t).vector for t in random_coalescent(m, s, rng)]
        inside, witness = origin_in_hull(vecs)  # raises if the two checks disagree
        if inside:
            assert len(witness["cover"]) == m * (m - 1) // 2
        else:
            assert witness["uncovered"]


def test_polytope_json_roundtrip(example):
    data = example.to_json_dict(labels=["a", "b", "c"])
    assert data["m"] == 3 and data["labels"] == ["a", "b", "c"]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        poly, labels = TropicalPolytope.from_json_dict(data)
    assert np.array_equal(poly.vertices, example.vertices)
    assert labels == ["a", "b", "c"]
