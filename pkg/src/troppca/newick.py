"""Rooted trees with branch lengths: Newick parsing, serialization, and the
conversion between equidistant trees and their leaf-pair distance vectors.

The parser accepts the common Newick dialect: quoted labels ('' doubles a
quote), bracketed comments (nested, treated as whitespace), missing branch
lengths (default 0), and internal node labels (parsed, then dropped). Errors
carry the text offset. The serializer is canonical: children are emitted in
order of their smallest leaf label, lengths with 12 significant digits, so
`serialize(parse(s)) == s` on canonical strings.
"""

from __future__ import annotations

import numpy as np

from .ultrametrics import LeafPairIndex, Ultrametric, is_ultrametric

_SPECIAL = set("():,;[]'")


class NewickError(ValueError):
    """Malformed Newick text; `position` is the offending text offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class NotEquidistantError(ValueError):
    """A tree whose root-to-leaf path sums differ beyond tolerance."""


def label_sort_key(name: str):
    """Numeric order for all-digit labels, lexicographic otherwise."""
    return (0, int(name), "") if name.isdigit() else (1, 0, name)


class Node:
    __slots__ = ("name", "length", "children", "parent")

    def __init__(self, name: str | None = None, length: float = 0.0):
        self.name = name
        self.length = length
        self.children: list[Node] = []
        self.parent: Node | None = None

    def add_child(self, child: "Node") -> None:
        child.parent = self
        self.children.append(child)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def clone(self) -> "Node":
        other = Node(self.name, self.length)
        for child in self.children:
            other.add_child(child.clone())
        return other


class RootedTree:
    """A rooted phylogenetic tree; leaves carry unique labels.

    Trees are treated as immutable once handed out; the MCMC proposal copies
    before perturbing. Traversal orders are deterministic (stored child order
    for nodes, label order for leaves) so seeded runs are reproducible.
    """

    def __init__(self, root: Node):
        self.root = root
        names = [leaf.name for leaf in self._iter_leaves()]
        if any(n is None or n == "" for n in names):
            raise ValueError("every leaf needs a label")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate leaf labels: {', '.join(dupes)}")

    def _iter_leaves(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def nodes(self) -> list[Node]:
        """All nodes in preorder."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(node.children))
        return out

    def leaves(self) -> list[Node]:
        """Leaf nodes sorted by label."""
        return sorted(self._iter_leaves(), key=lambda n: label_sort_key(n.name))

    def leaf_names(self) -> list[str]:
        return [leaf.name for leaf in self.leaves()]

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in self._iter_leaves())

    def internal_branches(self) -> list[Node]:
        """Nodes whose parent edge is an internal branch (internal, non-root)."""
        return [n for n in self.nodes() if n.parent is not None and not n.is_leaf]

    def depths(self) -> dict[Node, float]:
        """Distance from the root to every node (the root's own length is ignored)."""
        depth = {self.root: 0.0}
        stack = [self.root]
        while stack:
            node = stack.pop()
            for child in node.children:
                depth[child] = depth[node] + child.length
                stack.append(child)
        return depth

    @property
    def height(self) -> float:
        depth = self.depths()
        return max(depth[leaf] for leaf in self._iter_leaves())

    def is_equidistant(self, rel_tol: float = 1e-6) -> bool:
        depth = self.depths()
        ds = [depth[leaf] for leaf in self._iter_leaves()]
        spread = max(ds) - min(ds)
        return spread <= rel_tol * max(max(ds), 1.0)

    def copy(self) -> "RootedTree":
        return RootedTree(self.root.clone())

    def __repr__(self):
        return f"RootedTree({serialize_newick(self)!r})"


# ---------------------------------------------------------------------------
# parsing

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise NewickError(message, self.pos if pos is None else pos)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self):
        while not self.at_end():
            ch = self.text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "[":
                start = self.pos
                depth = 0
                while not self.at_end():
                    if self.text[self.pos] == "[":
                        depth += 1
                    elif self.text[self.pos] == "]":
                        depth -= 1
                        if depth == 0:
                            break
                    self.pos += 1
                if depth != 0:
                    self.error("unterminated comment", start)
                self.pos += 1
            else:
                return

    def parse_label(self) -> str | None:
        self.skip_ws()
        if self.peek() == "'":
            start = self.pos
            self.pos += 1
            chars = []
            while True:
                if self.at_end():
                    self.error("unterminated quoted label", start)
                ch = self.text[self.pos]
                if ch == "'":
                    if self.pos + 1 < len(self.text) and self.text[self.pos + 1] == "'":
                        chars.append("'")
                        self.pos += 2
                        continue
                    self.pos += 1
                    return "".join(chars)
                chars.append(ch)
                self.pos += 1
        chars = []
        while not self.at_end():
            ch = self.text[self.pos]
            if ch in _SPECIAL or ch.isspace():
                break
            chars.append(ch)
            self.pos += 1
        return "".join(chars) or None

    def parse_length(self) -> float:
        self.skip_ws()
        if self.peek() != ":":
            return 0.0
        self.pos += 1
        self.skip_ws()
        start = self.pos
        allowed = set("0123456789+-.eE")
        while not self.at_end() and self.text[self.pos] in allowed:
            self.pos += 1
        token = self.text[start:self.pos]
        try:
            return float(token)
        except ValueError:
            self.error(f"malformed branch length {token!r}", start)

    def parse_subtree(self) -> Node:
        self.skip_ws()
        if self.peek() == "(":
            open_pos = self.pos
            self.pos += 1
            node = Node()
            while True:
                node.add_child(self.parse_subtree())
                self.skip_ws()
                ch = self.peek()
                if ch == ",":
                    self.pos += 1
                    continue
                if ch == ")":
                    self.pos += 1
                    break
                if self.at_end():
                    self.error("unbalanced parenthesis", open_pos)
                self.error(f"expected ',' or ')' but found {ch!r}")
            self.parse_label()  # internal node labels are ignored
            node.length = self.parse_length()
            return node
        name = self.parse_label()
        if name is None:
            if self.at_end():
                self.error("unexpected end of input")
            self.error(f"expected a leaf label but found {self.peek()!r}")
        node = Node(name)
        node.length = self.parse_length()
        return node

    def parse_tree(self) -> RootedTree:
        root = self.parse_subtree()
        self.skip_ws()
        if self.peek() != ";":
            if self.at_end():
                self.error("missing ';' at end of tree")
            self.error(f"expected ';' but found {self.peek()!r}")
        self.pos += 1
        try:
            return RootedTree(root)
        except ValueError as exc:
            self.error(str(exc))


def parse_newick(text: str) -> RootedTree:
    """Parse a single Newick statement terminated by ';'."""
    parser = _Parser(text)
    parser.skip_ws()
    if parser.at_end():
        raise NewickError("empty input", 0)
    tree = parser.parse_tree()
    parser.skip_ws()
    if not parser.at_end():
        parser.error(f"trailing content after ';': {parser.peek()!r}")
    return tree


def parse_newick_many(text: str) -> list[RootedTree]:
    """Parse a sequence of ';'-terminated trees (e.g. a whole file)."""
    parser = _Parser(text)
    trees = []
    while True:
        parser.skip_ws()
        if parser.at_end():
            break
        trees.append(parser.parse_tree())
    if not trees:
        raise NewickError("empty input", 0)
    return trees


# ---------------------------------------------------------------------------
# serialization

def _quote_label(name: str) -> str:
    if name and not any(ch in _SPECIAL or ch.isspace() for ch in name):
        return name
    return "'" + name.replace("'", "''") + "'"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def serialize_newick(tree: RootedTree) -> str:
    """Canonical Newick: children ordered by smallest leaf label, 12 significant
    digits on lengths; the root carries a length only when it is itself a leaf."""

    def min_leaf(node: Node):
        if node.is_leaf:
            return label_sort_key(node.name)
        return min(min_leaf(c) for c in node.children)

    def render(node: Node) -> str:
        if node.is_leaf:
            return f"{_quote_label(node.name)}:{_fmt(node.length)}"
        inner = ",".join(render(c) for c in sorted(node.children, key=min_leaf))
        return f"({inner}):{_fmt(node.length)}"

    root = tree.root
    if root.is_leaf:
        return f"{_quote_label(root.name)}:{_fmt(root.length)};"
    inner = ",".join(render(c) for c in sorted(root.children, key=min_leaf))
    suffix = f":{_fmt(root.length)}" if root.length != 0 else ""
    return f"({inner}){suffix};"


# ---------------------------------------------------------------------------
# trees <-> ultrametrics

def cophenetic(tree: RootedTree, rel_tol: float = 1e-6) -> Ultrametric:
    """Pairwise leaf path lengths of an equidistant tree.

    Rejects trees whose root-to-leaf sums differ by more than `rel_tol`
    relative to the tree height (see `repair_equidistant` for the explicit
    fix). Leaves are numbered 1..m in label order.
    """
    leaves = tree.leaves()
    m = len(leaves)
    if m < 3:
        raise ValueError(f"need at least 3 leaves, got {m}")
    depth = tree.depths()
    ds = [depth[leaf] for leaf in leaves]
    spread = max(ds) - min(ds)
    if spread > rel_tol * max(max(ds), 1.0):
        raise NotEquidistantError(
            f"root-to-leaf paths differ by {spread:.3g} (height {max(ds):.3g}); "
            "not an equidistant tree"
        )
    number = {leaf: i + 1 for i, leaf in enumerate(leaves)}
    idx = LeafPairIndex(m)
    vec = np.zeros(idx.size)

    def collect(node: Node) -> list[Node]:
        if node.is_leaf:
            return [node]
        groups = [collect(c) for c in node.children]
        for gi in range(len(groups)):
            for gj in range(gi + 1, len(groups)):
                for a in groups[gi]:
                    for b in groups[gj]:
                        d = depth[a] + depth[b] - 2.0 * depth[node]
                        vec[idx.pair_to_flat(number[a], number[b])] = d
        return [leaf for g in groups for leaf in g]

    collect(tree.root)
    return Ultrametric(vec, m, labels=tuple(leaf.name for leaf in leaves))


def tree_from_ultrametric(u: Ultrametric, tie_tol: float = 1e-9) -> RootedTree:
    """Equidistant tree realizing an ultrametric; node heights are half the
    merge distances, so `cophenetic` inverts this exactly up to float noise.

    Entries must be nonnegative (shift the vector first if it came from a
    normalized torus representative)."""
    v = u.vector
    ok, bad = is_ultrametric(v, u.n_leaves, tie_tol)
    if not ok:
        raise ValueError(f"not ultrametric; violating triples: {bad[:5]}")
    if v.min() < 0:
        raise ValueError("pairwise distances must be nonnegative to build a tree")
    labels = u.labels or tuple(str(i) for i in range(1, u.n_leaves + 1))
    idx = LeafPairIndex(u.n_leaves)

    parent = list(range(u.n_leaves + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    cluster: dict[int, tuple[Node, float]] = {
        i: (Node(labels[i - 1]), 0.0) for i in range(1, u.n_leaves + 1)
    }
    order = np.argsort(v, kind="stable")
    pos = 0
    while pos < idx.size:
        stop = pos + 1
        while stop < idx.size and v[order[stop]] <= v[order[stop - 1]] + tie_tol:
            stop += 1
        height = float(v[order[pos]]) / 2.0
        adj: dict[int, set[int]] = {}
        for t in range(pos, stop):
            i, j = idx.flat_to_pair(int(order[t]))
            ri, rj = find(i), find(j)
            if ri != rj:
                adj.setdefault(ri, set()).add(rj)
                adj.setdefault(rj, set()).add(ri)
        seen = set()
        for start in sorted(adj):
            if start in seen:
                continue
            comp = []
            stack = [start]
            while stack:
                r = stack.pop()
                if r in seen:
                    continue
                seen.add(r)
                comp.append(r)
                stack.extend(adj.get(r, ()))
            if len(comp) < 2:
                continue
            comp.sort()
            merged = Node()
            for r in comp:
                child, child_h = cluster.pop(r)
                child.length = height - child_h
                merged.add_child(child)
            rep = comp[0]
            for r in comp[1:]:
                parent[r] = rep
            cluster[rep] = (merged, height)
        pos = stop
    if len(cluster) != 1:
        raise ValueError("merge order did not produce a single root (input not ultrametric)")
    root, _ = next(iter(cluster.values()))
    return RootedTree(root)


def repair_equidistant(tree: RootedTree) -> RootedTree:
    """Stretch pendant edges so every root-to-leaf path equals the max depth."""
    fixed = tree.copy()
    depth = fixed.depths()
    leaves = list(fixed._iter_leaves())
    target = max(depth[leaf] for leaf in leaves)
    for leaf in leaves:
        leaf.length += target - depth[leaf]
    return fixed
