"""Stochastic search for the best-fit tropical polytope over tree space.

The (s-1)-th order tropical principal components of a sample of ultrametrics
are the vertices of the s-vertex tropical polytope minimizing the summed
projection residual. Exact minimization is a large mixed-integer program, so
the estimate here is a Markov chain over s-tuples of equidistant trees:

  * `propose` perturbs each tree: a random subset of k leaf labels is
    permuted, then one internal node is slid along its parent branch, which
    lengthens that branch and shortens every child branch by the same
    (clamped) amount, so the tree stays equidistant with the same height
    and nonnegative branch lengths.
  * `metropolis_accept` accepts a proposal with probability
    min(1, current / proposal) on the objective values.
  * `fit` runs the outer loop: k starts at the leaf count and decreases by
    one every `cooling_interval` iterations until it reaches zero, so early
    iterations hop between topologies and late ones refine branch lengths.
    The best vertex set ever proposed is tracked separately and returned.

Convergence is not detected; the iteration budget is fixed and the
best-objective trace is exposed so callers can judge it themselves. All
randomness is drawn from `troppca.rng.Rng`; chain i uses seed ^ i, and a
fixed (sample, config) reproduces the fit bit for bit.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import trop_eq
from .fermat_weber import fermat_weber, pull_into_hull
from .newick import RootedTree, cophenetic, serialize_newick, tree_from_ultrametric
from .rng import Rng
from .ultrametrics import Ultrametric

INIT_MODES = ("sample-random", "user-supplied")


@dataclass
class McmcConfig:
    """Knobs for one fit; `chains` > 1 runs independent chains and keeps the best."""

    n_vertices: int = 3
    iterations: int = 1000
    cooling_interval: int = 100
    seed: int = 0
    chains: int = 1
    init: str = "sample-random"

    def __post_init__(self):
        if self.n_vertices < 2:
            raise ValueError("need at least 2 vertices")
        if self.iterations < 1:
            raise ValueError("need at least 1 iteration")
        if self.cooling_interval < 1:
            raise ValueError("cooling interval must be positive")
        if self.chains < 1:
            raise ValueError("need at least 1 chain")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}")

    def as_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "iterations": self.iterations,
            "cooling_interval": self.cooling_interval,
            "seed": self.seed,
            "chains": self.chains,
            "init": self.init,
        }


@dataclass
class PcaFit:
    """A fitted tropical PCA: vertices, per-sample projections, and statistics."""

    vertices: list[Ultrametric]
    vertex_trees: list[RootedTree]
    projections: np.ndarray
    lambdas: np.ndarray
    residuals: np.ndarray
    pi_unexplained: float
    s_reg: float
    r_squared: float
    trace: list[float]
    config: McmcConfig
    chain: int = 0
    chain_summaries: list[dict] = field(default_factory=list)

    @property
    def n_leaves(self) -> int:
        return self.vertices[0].n_leaves

    @property
    def labels(self) -> tuple[str, ...]:
        return self.vertices[0].labels

    def to_json_dict(self, source: str | None = None, group_labels=None) -> dict:
        return {
            "format": "troppca-fit/1",
            "config": self.config.as_dict(),
            "m": self.n_leaves,
            "labels": list(self.labels),
            "n": int(self.residuals.shape[0]),
            "chain": self.chain,
            "chains": self.chain_summaries,
            "vertices_newick": [serialize_newick(t) for t in self.vertex_trees],
            "vertices_vectors": [[float(x) for x in u.vector] for u in self.vertices],
            "lambdas": [[float(x) for x in row] for row in self.lambdas],
            "residuals": [float(x) for x in self.residuals],
            "projections": [[float(x) for x in row] for row in self.projections],
            "pi_unexplained": float(self.pi_unexplained),
            "s_reg": float(self.s_reg),
            "r_squared": float(self.r_squared),
            "trace": [float(x) for x in self.trace],
            "source": source,
            "group_labels": list(group_labels) if group_labels is not None else None,
        }


def _point_matrix(points) -> np.ndarray:
    rows = [np.asarray(getattr(p, "vector", p), dtype=np.float64) for p in points]
    if not rows:
        raise ValueError("empty point list")
    return np.ascontiguousarray(np.vstack(rows))


def objective(vertices, sample) -> float:
    """Summed tropical projection residual of the sample onto tconv(vertices)."""
    V = _point_matrix(vertices)
    U = _point_matrix(sample)
    if V.shape[1] != U.shape[1]:
        raise ValueError(f"dimension mismatch: vertices in R^{V.shape[1]}, sample in R^{U.shape[1]}")
    return float(kernels.residual_batch(V, U).sum())


def metropolis_accept(current_objective: float, proposal_objective: float, rng: Rng) -> bool:
    """Accept with probability min(1, current/proposal).

    A proposal at least as good as the current state is always accepted; a
    perfect proposal (objective 0) is accepted unconditionally without
    consuming a draw.
    """
    if current_objective < 0 or proposal_objective < 0:
        raise ValueError("objectives must be nonnegative")
    if proposal_objective == 0:
        return True
    p = min(1.0, current_objective / proposal_objective)
    return rng.random() < p


def cooling_schedule(n_leaves: int, iterations: int, interval: int) -> list[int]:
    """The k used at each iteration: starts at the leaf count and drops by one
    every `interval` iterations until it reaches zero."""
    ks = []
    k = n_leaves
    for i in range(1, iterations + 1):
        if i % interval == 0 and k > 0:
            k -= 1
        ks.append(k)
    return ks


def propose(trees: list[RootedTree], k: int, rng: Rng) -> list[RootedTree]:
    """One proposal move applied independently to each tree.

    Per tree, in this fixed draw order: (a) for k >= 2, choose k distinct
    leaves and permute their labels uniformly (k <= 1 permutes nothing and
    consumes no draws); (b) choose an internal branch, a sign, and an amount
    c uniform on [0, length/m], then slide the branch's lower node by that
    amount. The slide adds the signed amount to the chosen branch and
    subtracts it from every child branch below the node, clamped so no child
    branch goes negative; root-to-leaf heights are untouched. A star tree
    has no internal branch and only gets the permutation.
    """
    m = trees[0].n_leaves
    if not 0 <= k <= m:
        raise ValueError(f"k must be in 0..{m}, got {k}")
    out = []
    for tree in trees:
        t = tree.copy()
        if k >= 2:
            leaves = t.leaves()
            chosen = [leaves[i] for i in rng.sample_indices(len(leaves), k)]
            perm = rng.permutation(k)
            names = [leaf.name for leaf in chosen]
            for dst, src in enumerate(perm):
                chosen[dst].name = names[src]
        internal = t.internal_branches()
        if internal:
            node = internal[rng.randint(len(internal))]
            eps = rng.sign()
            c = rng.uniform(0.0, node.length / m)
            delta = eps * c
            if delta > 0:
                delta = min(delta, min(child.length for child in node.children))
            node.length += delta
            for child in node.children:
                child.length -= delta
        out.append(t)
    return out


def statistics(vertices, sample):
    """(pi, s_reg, r_squared) of a vertex set against a sample.

    pi is the summed projection residual; s_reg sums the tropical distances
    of the projections to their own Fermat-Weber point pulled into the hull;
    r_squared = s_reg / (pi + s_reg), defined as 1 when both vanish (all
    points identical and inside the polytope).
    """
    V = _point_matrix(vertices)
    U = _point_matrix(sample)
    proj, _ = kernels.project_batch(V, U)
    diff = U - proj
    pi = float((diff.max(axis=1) - diff.min(axis=1)).sum())
    fw = fermat_weber(proj, canonical=False)
    centre = pull_into_hull(proj, fw.point)
    spread = proj - centre[None, :]
    s_reg = float((spread.max(axis=1) - spread.min(axis=1)).sum())
    denom = pi + s_reg
    if denom <= 1e-12 * max(1.0, float(np.abs(U).max())):
        return pi, s_reg, 1.0
    return pi, s_reg, s_reg / denom


def _sample_inputs(sample):
    if not sample:
        raise ValueError("empty sample")
    ms = {u.n_leaves for u in sample}
    if len(ms) != 1:
        raise ValueError(f"mixed leaf counts in sample: {sorted(ms)}")
    m = ms.pop()
    labels = None
    for u in sample:
        if u.labels is not None:
            if labels is None:
                labels = u.labels
            elif u.labels != labels:
                raise ValueError(f"mixed leaf label sets: {labels} vs {u.labels}")
    if labels is None:
        labels = tuple(str(i) for i in range(1, m + 1))
    U = np.ascontiguousarray(np.vstack([u.vector for u in sample]))
    return U, m, labels


def _tree_vector(tree: RootedTree, labels) -> np.ndarray:
    u = cophenetic(tree)
    if u.labels != labels:
        raise ValueError(f"tree leaf set {u.labels} does not match sample {labels}")
    return u.vector


def fit_single_chain(
    sample: list[Ultrametric],
    config: McmcConfig,
    chain: int = 0,
    init_trees: list[RootedTree] | None = None,
) -> PcaFit:
    """Run one Markov chain and return the best vertex set it ever proposed."""
    U, m, labels = _sample_inputs(sample)
    n, s = U.shape[0], config.n_vertices
    if n < s:
        raise ValueError(f"sample of {n} cannot seed {s} vertices")
    rng = Rng(config.seed ^ chain)

    if init_trees is not None:
        if len(init_trees) != s:
            raise ValueError(f"expected {s} initial trees, got {len(init_trees)}")
        trees = [t.copy() for t in init_trees]
    else:
        chosen: list[int] = []
        for i in rng.permutation(n):
            if all(not trop_eq(U[i], U[j]) for j in chosen):
                chosen.append(i)
            if len(chosen) == s:
                break
        if len(chosen) < s:
            raise ValueError(f"sample has fewer than {s} distinct points")
        trees = [tree_from_ultrametric(Ultrametric(U[i], m, labels)) for i in chosen]

    cur_vecs = np.vstack([_tree_vector(t, labels) for t in trees])
    cur_obj = float(kernels.residual_batch(cur_vecs, U).sum())
    best_vecs = cur_vecs
    best_trees = [t.copy() for t in trees]
    best_obj = cur_obj
    trace = [best_obj]

    schedule = cooling_schedule(m, config.iterations, config.cooling_interval)
    for k in schedule:
        prop_trees = propose(trees, k, rng)
        prop_vecs = np.vstack([_tree_vector(t, labels) for t in prop_trees])
        collapsed = any(
            trop_eq(prop_vecs[a], prop_vecs[b])
            for a in range(s)
            for b in range(a + 1, s)
        )
        if collapsed:
            trace.append(best_obj)
            continue
        prop_obj = float(kernels.residual_batch(prop_vecs, U).sum())
        if metropolis_accept(cur_obj, prop_obj, rng):
            trees = prop_trees
            cur_obj = prop_obj
        if prop_obj < best_obj:
            best_obj = prop_obj
            best_vecs = prop_vecs
            best_trees = [t.copy() for t in prop_trees]
        trace.append(best_obj)

    proj, lam = kernels.project_batch(best_vecs, U)
    diff = U - proj
    residuals = diff.max(axis=1) - diff.min(axis=1)
    pi, s_reg, r2 = statistics(best_vecs, U)
    return PcaFit(
        vertices=[Ultrametric(best_vecs[i], m, labels) for i in range(s)],
        vertex_trees=best_trees,
        projections=proj,
        lambdas=lam,
        residuals=residuals,
        pi_unexplained=pi,
        s_reg=s_reg,
        r_squared=r2,
        trace=trace,
        config=config,
        chain=chain,
    )


def fit(
    sample: list[Ultrametric],
    config: McmcConfig,
    init_trees: list[RootedTree] | None = None,
    workers: int = 1,
) -> PcaFit:
    """Run `config.chains` chains (chain i seeded with seed ^ i) and keep the
    one with the highest r_squared (ties: lower objective, then lower chain).

    `workers` > 1 runs chains in separate processes; results are identical
    either way.
    """
    indices = list(range(config.chains))
    if workers > 1 and config.chains > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, config.chains)) as pool:
            fits = list(
                pool.map(_fit_chain_job, [(sample, config, c, init_trees) for c in indices])
            )
    else:
        fits = [fit_single_chain(sample, config, c, init_trees) for c in indices]
    best = min(fits, key=lambda f: (-f.r_squared, f.pi_unexplained, f.chain))
    best.chain_summaries = [
        {"chain": f.chain, "pi_unexplained": f.pi_unexplained, "r_squared": f.r_squared}
        for f in fits
    ]
    return best


def _fit_chain_job(args):
    sample, config, chain, init_trees = args
    return fit_single_chain(sample, config, chain, init_trees)
