"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. Tolerances are fixed here, not calibrated elsewhere.
"""

import json
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from troppca import (
    McmcConfig,
    Rng,
    TropicalPolytope,
    Ultrametric,
    cophenetic,
    fermat_weber,
    fit_single_chain,
    is_ultrametric,
    metropolis_accept,
    origin_in_hull,
    parse_newick,
    propose,
    pull_into_hull,
    random_caterpillar,
    random_coalescent,
    serialize_newick,
    trop_dist,
    trop_eq,
)
from troppca.cli import main
from troppca.fermat_weber import fw_objective
from troppca.ultrametrics import topology_from_vector

from conftest import fw_grid_min, grid_membership_best, rand_ultrametrics, random_combination
from test_newick import MALFORMED


def report(number, text):
    print(f"\nACCEPTANCE {number:2d}: PASS - {text}")


def test_criterion_01_projection_grid_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(1001)
    for _ in range(500):
        V = rng.uniform(0, 1, size=(3, 3))
        D = rng.uniform(0, 1, size=3)
        poly = TropicalPolytope(V)
        residual = poly.residual(D)
        best = grid_membership_best(poly.vertices, D, step=0.01)
        assert residual <= best + 1e-6 + 0.01
    elapsed = time.perf_counter() - start
    assert elapsed < 30
    report(1, f"500 projections within 1e-6 + grid step of the 0.01-grid oracle ({elapsed:.1f}s)")


def test_criterion_02_hand_checked_example():
    D1, D2, D3 = [0.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 3.0, 3.0]
    D4, D5 = np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 1.0])
    poly = TropicalPolytope([D1, D2, D3])
    proj, lam = poly.project(D4)
    assert np.all(np.abs(proj - [0.0, 1.0, 1.0]) <= 1e-12)
    assert np.all(np.abs(lam - [0.0, -2.0, -2.0]) <= 1e-12)
    assert abs(poly.residual(D4) - 1.0) <= 1e-12
    for point in (np.array(D1), np.array(D2), np.array(D3), D4, D5):
        fixed_point = trop_dist(poly.project(point)[0], point) <= 1e-12
        assert poly.contains(point) == fixed_point
    report(2, "five-point example: projection (0,1,1), residual 1, types agree with fixed points")


def test_criterion_03_cell_topology_theorem():
    start = time.perf_counter()
    rng = np.random.default_rng(1003)
    checked = 0
    trial = 0
    while checked < 1000:
        trial += 1
        assert trial < 20_000, "same-cell pair generation stalled"
        m = 4 if trial % 2 == 0 else 5
        s = 3 + trial % 2
        V = rand_ultrametrics(trial + 40_000, m, s)
        poly = TropicalPolytope(V)
        lam = rng.uniform(-2, 0, size=poly.n_vertices)
        x = (lam[:, None] + poly.vertices).max(axis=0)
        y = ((lam + rng.uniform(-0.05, 0.05, size=poly.n_vertices))[:, None]
             + poly.vertices).max(axis=0)
        if poly.type_of(x) != poly.type_of(y):
            continue
        ok_x, _ = is_ultrametric(x, m)
        ok_y, _ = is_ultrametric(y, m)
        assert ok_x and ok_y
        assert topology_from_vector(x, m) == topology_from_vector(y, m)
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    report(3, f"1000 same-cell pairs: all ultrametric with equal topology ({elapsed:.1f}s)")


def test_criterion_04_origin_lemma_equivalence():
    rng = Rng(1004)
    inside = outside = 0
    for trial in range(1000):
        m = 4 if trial % 2 == 0 else 5
        if trial % 5 == 0:
            height = 0.5 + 0.1 * (trial % 7)
            vecs = [np.full(m * (m - 1) // 2, 2.0 * height)]
            if trial % 10 == 0:
                vecs += [cophenetic(t).vector for t in random_coalescent(m, 2, rng)]
        else:
            s = 1 + trial % 4
            vecs = [cophenetic(t).vector for t in random_coalescent(m, s, rng)]
        # origin_in_hull raises if the lemma criterion and membership disagree
        answer, witness = origin_in_hull(vecs)
        if answer:
            inside += 1
            assert len(witness["cover"]) == m * (m - 1) // 2
        else:
            outside += 1
            assert witness["uncovered"]
    assert inside > 0 and outside > 0
    report(4, f"1000 vertex sets: lemma criterion == membership ({inside} inside, {outside} outside)")


def test_criterion_05_fermat_weber():
    rng = np.random.default_rng(1005)
    for _ in range(200):
        D = rng.uniform(0, 1, size=(3, 3))
        assert fermat_weber(D, canonical=False).objective <= fw_grid_min(D, step=0.01) + 0.02

    for trial in range(500):
        n = 3 + trial % 4
        D = rand_ultrametrics(trial + 70_000, 4, n)
        res = fermat_weber(D, canonical=False)
        pulled = pull_into_hull(D, res.point)
        assert TropicalPolytope(D).contains(pulled)
        ok, _ = is_ultrametric(pulled, 4)
        assert ok
        assert abs(fw_objective(D, pulled) - res.objective) <= 1e-7 * max(1.0, res.objective)
    report(5, "FW: 200 LP objectives beat the grid oracle; 500 pulled points in-hull, "
              "ultrametric, objective preserved to 1e-7")


def test_criterion_06_mcmc_exact_at_optimum():
    for seed in (61, 62, 63):
        rng = Rng(seed)
        vertex_trees = random_coalescent(4, 3, rng)
        V = np.vstack([cophenetic(t).vector for t in vertex_trees])
        labels = cophenetic(vertex_trees[0]).labels
        gen = np.random.default_rng(seed)
        sample = [
            Ultrametric(random_combination(V, gen), 4, labels) for _ in range(20)
        ]
        config = McmcConfig(iterations=100, cooling_interval=10, seed=seed,
                            init="user-supplied")
        result = fit_single_chain(sample, config, init_trees=vertex_trees)
        assert result.pi_unexplained <= 1e-9
        assert abs(result.r_squared - 1.0) <= 1e-9
        assert all(a >= b for a, b in zip(result.trace, result.trace[1:]))
    report(6, "fits started at the true vertices: pi = 0 and R^2 = 1 to 1e-9, traces monotone")


def test_criterion_07_metropolis_ratio():
    rng = Rng(1007)
    hits = sum(metropolis_accept(5.0, 10.0, rng) for _ in range(10_000))
    rate = hits / 10_000
    assert abs(rate - 0.5) <= 0.02
    report(7, f"acceptance frequency for objectives (5, 10): {rate:.3f} within 0.5 +/- 0.02")


def test_criterion_08_sensitivity_trend():
    start = time.perf_counter()
    successes = 0
    for seed in (81, 82, 83, 84, 85):
        data = [cophenetic(t) for t in random_caterpillar(4, 25, Rng(seed))]
        medians = {}
        for iterations in (10, 1000):
            config = McmcConfig(iterations=iterations, cooling_interval=100, seed=seed)
            r2s = [fit_single_chain(data, config, chain).r_squared for chain in range(10)]
            medians[iterations] = float(np.median(r2s))
        if medians[1000] >= medians[10]:
            successes += 1
    elapsed = time.perf_counter() - start
    assert successes >= 4, f"trend held for only {successes}/5 seeds"
    assert elapsed < 300
    report(8, f"median R^2 at 1000 iterations >= at 10 for {successes}/5 seeds ({elapsed:.1f}s)")


def test_criterion_09_proposal_validity():
    rng = Rng(1009)
    produced = 0
    while produced < 10_000:
        m = 4 + produced % 5
        maker = random_caterpillar if produced % 2 == 0 else random_coalescent
        trees = maker(m, 3, rng)
        heights = [t.height for t in trees]
        k = produced % (m + 1)
        for t, h in zip(propose(trees, k, rng), heights):
            assert t.is_equidistant(1e-9)
            assert abs(t.height - h) <= 1e-9
            assert all(node.length >= 0 for node in t.nodes())
            produced += 1
    report(9, "10000 proposals: equidistant, height preserved to 1e-9, nonnegative lengths")


def test_criterion_10_fit_determinism(tmp_path):
    data = str(tmp_path / "d.nwk")
    assert main(["simulate", "--m", "4", "--n", "10", "--mode", "coalescent",
                 "--seed", "5", "--output", data]) == 0
    outs = []
    for name in ("a.json", "b.json"):
        out = str(tmp_path / name)
        assert main(["fit", "--input", data, "--iterations", "100", "--seed", "42",
                     "--chains", "2", "--output", out]) == 0
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]
    report(10, "fit with a fixed seed wrote byte-identical JSON twice")


def test_criterion_11_newick_roundtrip():
    rng = Rng(1011)
    count = 0
    for m in range(4, 10):
        maker = random_caterpillar if m % 2 == 0 else random_coalescent
        for tree in maker(m, 170, rng):
            u = cophenetic(tree)
            back = cophenetic(parse_newick(serialize_newick(tree)))
            assert trop_eq(back.vector, u.vector, 1e-9)
            assert back.labels == u.labels
            count += 1
    assert count >= 1000

    assert len(MALFORMED) >= 20
    from troppca import NewickError

    for text in MALFORMED:
        with pytest.raises(NewickError):
            parse_newick(text)
    report(11, f"{count} trees round-tripped within 1e-9; {len(MALFORMED)} malformed inputs rejected")
