"""Synthetic equidistant-tree generators for simulation studies.

Two generators, both seed-deterministic and height-1:

  * `random_caterpillar` keeps a fixed caterpillar shape (cherry {1, 2},
    leaf m attached at the root) and draws the interior merge heights by
    stick breaking: candidate lengths are drawn sequentially, each uniform
    on [0, 1 - sum of the earlier ones], and the suffix sums of the last
    m-2 draws become the merge heights, so every root-to-leaf path is
    exactly 1.
  * `random_coalescent` merges uniformly chosen lineage pairs with
    exponential waiting times (rate j(j-1)/2 for j live lineages), then
    rescales the total height to 1. This stands in for coalescent samples
    from external tools; effective population size drops out with the
    rescaling.
"""

import json
from dataclasses import dataclass

from .newick import Node, RootedTree, serialize_newick
from .rng import Rng

MODES = ("fixed-caterpillar", "random-coalescent")


@dataclass(frozen=True)
class SimConfig:
    n_leaves: int
    n_trees: int
    mode: str = "random-coalescent"
    seed: int = 0

    def __post_init__(self):
        if self.n_leaves < 3:
            raise ValueError("need at least 3 leaves")
        if self.n_trees < 1:
            raise ValueError("need at least 1 tree")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


def _one_caterpillar(m: int, rng: Rng) -> RootedTree:
    draws = []
    total = 0.0
    for _ in range(m - 1):
        u = rng.uniform(0.0, 1.0 - total)
        draws.append(u)
        total += u
    # merge height of clade {1..j}; suffix sums keep them nondecreasing
    heights = {j: sum(draws[m - j : m - 1]) for j in range(2, m)}

    node = Node()
    node.add_child(Node("1", heights[2]))
    node.add_child(Node("2", heights[2]))
    for j in range(3, m):
        parent = Node()
        node.length = heights[j] - heights[j - 1]
        parent.add_child(node)
        parent.add_child(Node(str(j), heights[j]))
        node = parent
    root = Node()
    node.length = 1.0 - heights[m - 1]
    root.add_child(node)
    root.add_child(Node(str(m), 1.0))
    return RootedTree(root)


def random_caterpillar(m: int, n: int, rng: Rng) -> list[RootedTree]:
    """n random height-1 equidistant trees on the fixed caterpillar shape."""
    if m < 3:
        raise ValueError("need at least 3 leaves")
    return [_one_caterpillar(m, rng) for _ in range(n)]


def _one_coalescent(m: int, rng: Rng) -> RootedTree:
    lineages = [(Node(str(i)), 0.0) for i in range(1, m + 1)]
    t = 0.0
    while len(lineages) > 1:
        j = len(lineages)
        t += rng.exponential(j * (j - 1) / 2.0)
        a, ha = lineages.pop(rng.randint(j))
        b, hb = lineages.pop(rng.randint(j - 1))
        a.length = t - ha
        b.length = t - hb
        parent = Node()
        parent.add_child(a)
        parent.add_child(b)
        lineages.append((parent, t))
    root, height = lineages[0]
    for node in RootedTree(root).nodes():
        node.length /= height
    return RootedTree(root)


def random_coalescent(m: int, n: int, rng: Rng) -> list[RootedTree]:
    """n random binary equidistant trees from the coalescent, rescaled to height 1."""
    if m < 2:
        raise ValueError("need at least 2 leaves")
    return [_one_coalescent(m, rng) for _ in range(n)]


def generate(config: SimConfig, rng: Rng | None = None) -> list[RootedTree]:
    """Generate per `config.mode`, seeding a fresh stream unless one is given."""
    rng = rng or Rng(config.seed)
    if config.mode == "fixed-caterpillar":
        return random_caterpillar(config.n_leaves, config.n_trees, rng)
    return random_coalescent(config.n_leaves, config.n_trees, rng)


def mixture_experiment(config_a: SimConfig, config_b: SimConfig, rng: Rng):
    """Concatenate two generated groups; returns (trees, 0/1 group labels)."""
    if config_a.n_leaves != config_b.n_leaves:
        raise ValueError(
            f"leaf-count mismatch: {config_a.n_leaves} vs {config_b.n_leaves}"
        )
    trees_a = generate(config_a, rng)
    trees_b = generate(config_b, rng)
    labels = [0] * len(trees_a) + [1] * len(trees_b)
    return trees_a + trees_b, labels


def manifest_path(newick_path: str) -> str:
    return f"{newick_path}.manifest.json"


def write_dataset(path: str, trees: list[RootedTree], manifest: dict) -> None:
    """One Newick per line, plus the sidecar `<path>.manifest.json`."""
    with open(path, "w") as fh:
        for tree in trees:
            fh.write(serialize_newick(tree) + "\n")
    with open(manifest_path(path), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
