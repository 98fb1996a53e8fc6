"""Leaf-pair distance vectors, the three-point condition, and tree topologies.

A dissimilarity map on m leaves lives in R^e with e = m(m-1)/2, one
coordinate per unordered pair (i, j) with 1 <= i < j <= m in lexicographic
order. A vector is ultrametric when, in every leaf triple, the largest of
the three pairwise values is attained at least twice; these are exactly the
cophenetic vectors of equidistant trees. `topology_of` recovers the rooted
tree shape by single-linkage merging, which realizes the (unique) equidistant
tree of an ultrametric.
"""

import csv
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import as_point

TIE_TOL = 1e-9


class LeafPairIndex:
    """Bijection between pairs (i, j), 1 <= i < j <= m, and flat indices 0..e-1."""

    def __init__(self, n_leaves: int):
        if n_leaves < 2:
            raise ValueError("need at least 2 leaves")
        self.n_leaves = n_leaves
        self.size = n_leaves * (n_leaves - 1) // 2
        self.pairs = [(i, j) for i in range(1, n_leaves + 1) for j in range(i + 1, n_leaves + 1)]

    def pair_to_flat(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        if not (1 <= i < j <= self.n_leaves):
            raise ValueError(f"invalid leaf pair ({i}, {j}) for m={self.n_leaves}")
        m = self.n_leaves
        return (i - 1) * m - i * (i - 1) // 2 + (j - i - 1)

    def flat_to_pair(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.size:
            raise ValueError(f"flat index {k} out of range for m={self.n_leaves}")
        return self.pairs[k]


def leaf_count_for(dimension: int) -> int:
    """The m with m(m-1)/2 == dimension, or raise if there is none."""
    m = int((1 + math.isqrt(1 + 8 * dimension)) // 2)
    if m * (m - 1) // 2 != dimension:
        raise ValueError(f"{dimension} is not a binomial(m, 2) dimension")
    return m


@dataclass(frozen=True)
class Ultrametric:
    """A leaf-pair distance vector together with its leaf labelling.

    `vector[k]` is the distance between the pair `LeafPairIndex(n_leaves).pairs[k]`;
    leaves are named 1..m internally, `labels` maps them to external names.
    Construction does not validate the three-point condition (MCMC proposals
    build many of these); call `validate()` or `is_ultrametric` when needed.
    """

    vector: np.ndarray
    n_leaves: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        v = as_point(self.vector)
        expected = self.n_leaves * (self.n_leaves - 1) // 2
        if v.shape[0] != expected:
            raise ValueError(
                f"vector has {v.shape[0]} coordinates but m={self.n_leaves} needs {expected}"
            )
        if self.labels is not None and len(self.labels) != self.n_leaves:
            raise ValueError("label count does not match leaf count")
        object.__setattr__(self, "vector", v)

    @property
    def index(self) -> LeafPairIndex:
        return LeafPairIndex(self.n_leaves)

    def validate(self, tol: float = TIE_TOL) -> None:
        ok, bad = is_ultrametric(self.vector, self.n_leaves, tol)
        if not ok:
            raise ValueError(f"not ultrametric; violating triples: {bad[:5]}")


def is_ultrametric(vector, n_leaves: int, tol: float = TIE_TOL):
    """Check the three-point condition on every leaf triple.

    Returns (ok, violations) where violations lists the triples (i, j, k)
    whose maximum pairwise value is attained only once (beyond `tol`).
    """
    v = np.asarray(vector, dtype=np.float64)
    idx = LeafPairIndex(n_leaves)
    if v.shape != (idx.size,):
        raise ValueError(f"vector has shape {v.shape} but m={n_leaves} needs ({idx.size},)")
    violations = []
    for i, j, k in combinations(range(1, n_leaves + 1), 3):
        a = v[idx.pair_to_flat(i, j)]
        b = v[idx.pair_to_flat(i, k)]
        c = v[idx.pair_to_flat(j, k)]
        hi = max(a, b, c)
        if sum(1 for x in (a, b, c) if x >= hi - tol) < 2:
            violations.append((i, j, k))
    return len(violations) == 0, violations


class TreeTopology:
    """The laminar clade family of a rooted tree shape (no branch lengths).

    Clades are frozensets of 1-based leaf numbers; the family always contains
    all singletons and the full leaf set. Equality is set equality.
    """

    def __init__(self, clades, n_leaves: int):
        family = set(frozenset(c) for c in clades)
        all_leaves = frozenset(range(1, n_leaves + 1))
        for leaf in all_leaves:
            family.add(frozenset([leaf]))
        family.add(all_leaves)
        for c in family:
            if not c <= all_leaves:
                raise ValueError(f"clade {sorted(c)} outside leaf set 1..{n_leaves}")
        for a, b in combinations(family, 2):
            if a & b and not (a <= b or b <= a):
                raise ValueError(f"clades {sorted(a)} and {sorted(b)} overlap: not laminar")
        self.n_leaves = n_leaves
        self.clades = frozenset(family)

    def __eq__(self, other):
        return (
            isinstance(other, TreeTopology)
            and self.n_leaves == other.n_leaves
            and self.clades == other.clades
        )

    def __hash__(self):
        return hash((self.n_leaves, self.clades))

    def __repr__(self):
        return f"TreeTopology({self.shape_newick()!r})"

    def sorted_clades(self) -> list[list[int]]:
        return sorted((sorted(c) for c in self.clades), key=lambda c: (len(c), c))

    def shape_newick(self, labels=None) -> str:
        """Newick string of the shape, no branch lengths, e.g. '((1,2),3);'."""

        def name(leaf):
            return str(labels[leaf - 1]) if labels else str(leaf)

        def render(clade):
            if len(clade) == 1:
                return name(next(iter(clade)))
            children = _maximal_subclades(self.clades, clade)
            parts = sorted(render(c) for c in children)
            return "(" + ",".join(parts) + ")"

        return render(frozenset(range(1, self.n_leaves + 1))) + ";"


def _maximal_subclades(family, clade):
    proper = [c for c in family if c < clade]
    return [c for c in proper if not any(c < d for d in proper)]


def topology_from_vector(vector, n_leaves: int, tol: float = TIE_TOL, check: bool = True) -> TreeTopology:
    """Clade family of the single-linkage merge order of a distance vector.

    Values within `tol` of each other merge simultaneously, producing
    multifurcations instead of arbitrary binary resolutions, so the star
    tree and partially unresolved shapes come out as-is. Only the order of
    values matters; shifting all coordinates by a constant changes nothing.
    """
    v = np.asarray(vector, dtype=np.float64)
    idx = LeafPairIndex(n_leaves)
    if check:
        ok, bad = is_ultrametric(v, n_leaves, tol)
        if not ok:
            raise ValueError(f"input is not ultrametric; violating triples: {bad[:5]}")

    order = np.argsort(v, kind="stable")
    parent = list(range(n_leaves + 1))  # union-find over 1-based leaves

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    members = {leaf: {leaf} for leaf in range(1, n_leaves + 1)}
    clades = set()
    pos = 0
    while pos < idx.size:
        stop = pos + 1
        while stop < idx.size and v[order[stop]] <= v[order[stop - 1]] + tol:
            stop += 1
        touched = set()
        for t in range(pos, stop):
            i, j = idx.flat_to_pair(int(order[t]))
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri
                members[ri] |= members.pop(rj)
                touched.add(ri)
        for r in touched:
            clades.add(frozenset(members[find(r)]))
        pos = stop
    return TreeTopology(clades, n_leaves)


def topology_of(u: Ultrametric, tol: float = TIE_TOL) -> TreeTopology:
    """Tree topology encoded by an ultrametric (see `topology_from_vector`)."""
    return topology_from_vector(u.vector, u.n_leaves, tol)


def topologies_equal(a: TreeTopology, b: TreeTopology) -> bool:
    """Set equality of clade families; the leaf sets must agree."""
    if a.n_leaves != b.n_leaves:
        raise ValueError(f"different leaf sets: m={a.n_leaves} vs m={b.n_leaves}")
    return a == b


def write_vectors_csv(path, ultrametrics) -> None:
    """Write ultrametric vectors, one per row, header `m,<pair list>`."""
    items = list(ultrametrics)
    if not items:
        raise ValueError("nothing to write")
    m = items[0].n_leaves
    idx = LeafPairIndex(m)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m"] + [f"{i}-{j}" for i, j in idx.pairs])
        for u in items:
            if u.n_leaves != m:
                raise ValueError("mixed leaf counts in one CSV")
            writer.writerow([m] + [repr(float(x)) for x in u.vector])


def read_vectors_csv(path) -> list[Ultrametric]:
    """Read ultrametric vectors written by `write_vectors_csv`."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "m":
            raise ValueError(f"{path}: expected header starting with 'm'")
        e = len(header) - 1
        m = leaf_count_for(e)
        expected = ["m"] + [f"{i}-{j}" for i, j in LeafPairIndex(m).pairs]
        if header != expected:
            raise ValueError(f"{path}: header does not list pairs in lexicographic order")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if int(row[0]) != m or len(row) != e + 1:
                raise ValueError(f"{path}:{lineno}: row does not match header (m={m}, e={e})")
            out.append(Ultrametric(np.array([float(x) for x in row[1:]]), m))
    return out
