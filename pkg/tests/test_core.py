"""Tropical arithmetic and the projective metric."""

import numpy as np
import pytest

from troppca import (
    NEG_INF,
    normalize,
    trop_add,
    trop_dist,
    trop_eq,
    trop_scale,
    trop_vec_add,
)


def test_trop_add():
    assert trop_add(3, 5) == 5
    assert trop_add(NEG_INF, 7) == 7
    assert trop_add(2, 2) == 2


def test_trop_scale():
    assert np.array_equal(trop_scale(2, [0, 1, 2]), [2, 3, 4])
    assert np.array_equal(trop_scale(0, [0, 3, 0]), [0, 3, 0])
    with pytest.raises(ValueError):
        trop_scale(NEG_INF, [0, 1])


def test_trop_scale_projective_equality():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.uniform(-5, 5, size=6)
        assert np.allclose(normalize(trop_scale(5, v)), normalize(v))


def test_trop_vec_add():
    assert np.array_equal(trop_vec_add(0, [0, 0, 0], 0, [0, 3, 0]), [0, 3, 0])
    # max((-2, 1, -2), (0, 0, 0)) evaluated coordinatewise
    assert np.array_equal(trop_vec_add(-2, [0, 3, 0], 0, [0, 0, 0]), [0, 1, 0])
    v = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(trop_vec_add(0, v, 0, v), v)
    with pytest.raises(ValueError):
        trop_vec_add(0, [0, 1], 0, [0, 1, 2])


def test_trop_vec_add_algebra():
    rng = np.random.default_rng(1)
    for _ in range(100):
        u, v, w = rng.uniform(-3, 3, size=(3, 5))
        a, b, c = rng.uniform(-2, 2, size=3)
        left = trop_vec_add(0, trop_vec_add(a, u, b, v), c, w)
        right = trop_vec_add(a, u, 0, trop_vec_add(b, v, c, w))
        assert trop_eq(left, right, 1e-12)
        assert trop_eq(trop_vec_add(a, u, b, v), trop_vec_add(b, v, a, u), 1e-12)
        assert trop_eq(trop_vec_add(a, u, a, u), trop_scale(a, u), 1e-12)


def test_normalize():
    assert np.array_equal(normalize([5, 8, 5]), [0, 3, 0])
    assert np.array_equal(normalize([0, 1, 2]), [0, 1, 2])
    v = np.array([3.0, -1.0, 2.0])
    assert np.array_equal(normalize(normalize(v)), normalize(v))


def test_trop_dist_examples():
    assert trop_dist([0, 0, 0], [0, 3, 3]) == 3
    assert trop_dist([0, 1, 2], [0, 1, 1]) == 1
    v = np.array([0.3, -1.2, 4.0])
    for c in (-7.5, 0.0, 2.25):
        assert trop_dist(v, v + c) <= 1e-12
    with pytest.raises(ValueError):
        trop_dist([0, 1], [0, 1, 2])


def test_trop_dist_matches_pairwise_definition_exactly():
    rng = np.random.default_rng(2)
    for _ in range(200):
        e = int(rng.integers(2, 9))
        v = rng.uniform(-10, 10, size=e)
        w = rng.uniform(-10, 10, size=e)
        delta = v - w
        pairwise = max(
            abs(delta[i] - delta[j]) for i in range(e) for j in range(i + 1, e)
        )
        assert trop_dist(v, w) == pairwise


def test_metric_axioms_on_random_triples():
    rng = np.random.default_rng(3)
    u = rng.uniform(-10, 10, size=(10_000, 5))
    v = rng.uniform(-10, 10, size=(10_000, 5))
    w = rng.uniform(-10, 10, size=(10_000, 5))

    def dist(a, b):
        d = a - b
        return d.max(axis=1) - d.min(axis=1)

    duv, dvu = dist(u, v), dist(v, u)
    duw, dvw = dist(u, w), dist(v, w)
    assert (duv >= 0).all()
    assert np.allclose(duv, dvu, atol=1e-9)
    assert (duw <= duv + dvw + 1e-9).all()
    assert dist(u, u).max() == 0


def test_trop_dist_shift_invariance():
    rng = np.random.default_rng(4)
    for _ in range(100):
        v = rng.uniform(-5, 5, size=6)
        w = rng.uniform(-5, 5, size=6)
        a, b = rng.uniform(-20, 20, size=2)
        assert trop_dist(trop_scale(a, v), trop_scale(b, w)) == pytest.approx(
            trop_dist(v, w), abs=1e-9
        )


def test_point_validation():
    with pytest.raises(ValueError):
        normalize([1.0])
    with pytest.raises(ValueError):
        normalize([1.0, float("nan")])
    with pytest.raises(ValueError):
        trop_vec_add(0, [0, float("inf")], 0, [0, 0])
