"""Finite R-trees over a distance ladder and their end spaces.

A node is stored as its *path*: the tuple ``(c_0, ..., c_j)`` of child labels
read at the ladder values ``r_0, ..., r_j``.  Its level is ``r_j`` (ladder
index ``j = len(path) - 1``); the empty path is the root, one step above
``r_0``.  Two branches that first disagree at coordinate ``i`` are at
distance ``r_i``, so the cone below a node at index ``j`` is the closed
ball of radius ``r_{j+1}`` (ZERO for the last ladder value), equivalently
the open ball of radius ``r_j``.

All leaves sit at the same depth; the index of that depth is the tree's
*resolution*.  Trees are kept in canonical form: child labels under a node
are ``0..k-1`` and, for trees with more than one leaf, the last level
actually splits somewhere.  A lone chain of single children is allowed (it
is the standard non-perfect example) but is not what :func:`build_tree`
returns for a one-point space.
"""

from __future__ import annotations

import random
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .metric import ZERO, Dist, DistanceLadder, FiniteUltrametricSpace, MalformedInputError

__all__ = [
    "RNode",
    "RTree",
    "TreeIsometry",
    "build_tree",
    "cantor",
    "cone_members",
    "end_distance",
    "generate_from_ladder",
    "incompatible",
    "is_perfect_truncation",
    "nodes_at_level",
    "padic",
    "random_perfect",
    "realize_space",
]

Path = tuple[int, ...]


@dataclass(frozen=True, order=True)
class RNode:
    path: Path

    @property
    def level_index(self) -> int:
        """Ladder index of the node's level; ``-1`` for the root."""
        return len(self.path) - 1

    def level(self) -> Dist | None:
        return None if not self.path else Dist(len(self.path) - 1)

    def restrict(self, k: int) -> RNode:
        """The initial segment of this node at ladder index ``k``."""
        return RNode(self.path[: k + 1])

    def extends(self, other: RNode) -> bool:
        return self.path[: len(other.path)] == other.path

    def coordinates(self, ladder: DistanceLadder) -> dict[Fraction, int]:
        """The node as a finitely supported function on ladder values."""
        return {ladder[i]: c for i, c in enumerate(self.path)}

    def label(self) -> str:
        return path_label(self.path)


def path_label(path: Path) -> str:
    if not path:
        return "ε"
    if all(c < 10 for c in path):
        return "".join(str(c) for c in path)
    return ".".join(str(c) for c in path)


class RTree:
    """A finite, canonical R-tree given by its leaves."""

    __slots__ = ("ladder", "leaves", "_children", "depth")

    def __init__(self, ladder: DistanceLadder, leaves: Iterable[Sequence[int]]):
        self.ladder = ladder
        paths = sorted({tuple(int(c) for c in p) for p in leaves})
        if not paths:
            raise MalformedInputError("a tree needs at least one leaf")
        depth = len(paths[0])
        if any(len(p) != depth for p in paths):
            raise MalformedInputError("all leaves must sit at the same depth")
        if depth > len(ladder):
            raise MalformedInputError(
                f"leaves of depth {depth} need a ladder of length >= {depth}"
            )
        children: dict[Path, int] = {}
        for p in paths:
            for k in range(depth):
                parent, c = p[:k], p[k]
                children[parent] = max(children.get(parent, 0), c + 1)
        for p in paths:
            children[p] = 0
        self.leaves: tuple[Path, ...] = tuple(paths)
        self._children = children
        self.depth = depth
        self._check_canonical()

    def _check_canonical(self) -> None:
        seen: dict[Path, set[int]] = {}
        for node in self._children:
            if node:
                seen.setdefault(node[:-1], set()).add(node[-1])
        for parent, labels in seen.items():
            if labels != set(range(len(labels))):
                raise MalformedInputError(
                    f"children of node {path_label(parent)} are not labeled 0..k-1"
                )
        if len(self.leaves) > 1 and not any(
            len(p) == self.depth - 1 and k >= 2 for p, k in self._children.items()
        ):
            raise MalformedInputError(
                "the finest level never splits; drop it so resolution is the finest value present"
            )

    def __repr__(self) -> str:
        return f"RTree(leaves={len(self.leaves)}, depth={self.depth}, ladder={self.ladder})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RTree):
            return NotImplemented
        return self.ladder == other.ladder and self.leaves == other.leaves

    __hash__ = None

    @property
    def resolution(self) -> int:
        """Ladder index of the leaves (``-1`` when the root is the only leaf)."""
        return self.depth - 1

    @property
    def root(self) -> RNode:
        return RNode(())

    def __contains__(self, node: RNode) -> bool:
        return node.path in self._children

    def nodes(self) -> list[RNode]:
        return [RNode(p) for p in sorted(self._children, key=lambda p: (len(p), p))]

    def leaf_nodes(self) -> list[RNode]:
        return [RNode(p) for p in self.leaves]

    def children(self, node: RNode) -> list[RNode]:
        k = self._children[node.path]
        return [RNode(node.path + (c,)) for c in range(k)]

    def child_count(self, node: RNode | Path) -> int:
        path = node.path if isinstance(node, RNode) else node
        return self._children[path]

    def is_leaf(self, node: RNode) -> bool:
        return len(node.path) == self.depth and node.path in self._children

    def leaf_index(self, node: RNode | Path) -> int:
        path = node.path if isinstance(node, RNode) else tuple(node)
        i = bisect_left(self.leaves, path)
        if i == len(self.leaves) or self.leaves[i] != path:
            raise KeyError(f"{path_label(path)} is not a leaf")
        return i

    def cone_range(self, node: RNode) -> range:
        """Indices (in sorted leaf order) of the leaves below ``node``."""
        lo = bisect_left(self.leaves, node.path)
        hi = bisect_right(self.leaves, node.path + (float("inf"),))
        return range(lo, hi)

    def leaf_array(self) -> np.ndarray:
        return np.array(self.leaves, dtype=np.int64).reshape(len(self.leaves), self.depth)


@dataclass(frozen=True)
class TreeIsometry:
    """Bijection between point ids of a space and leaves of a tree."""

    point_to_leaf: tuple[Path, ...]

    def leaf(self, x: int) -> RNode:
        return RNode(self.point_to_leaf[x])

    def point(self, leaf: RNode | Path) -> int:
        path = leaf.path if isinstance(leaf, RNode) else tuple(leaf)
        return self._inverse()[path]

    def _inverse(self) -> dict[Path, int]:
        inv = self.__dict__.get("_inv")
        if inv is None:
            inv = {p: i for i, p in enumerate(self.point_to_leaf)}
            object.__setattr__(self, "_inv", inv)
        return inv


def end_distance(tree: RTree, u: RNode, v: RNode) -> Dist:
    """Largest ladder value at which two branches differ."""
    for node in (u, v):
        if not tree.is_leaf(node):
            raise ValueError(f"{node.label()} is not a leaf of the tree")
    for i, (a, b) in enumerate(zip(u.path, v.path)):
        if a != b:
            return Dist(i)
    return ZERO


def incompatible(u: RNode, v: RNode) -> bool:
    """True iff neither node is an initial segment of the other."""
    return not (u.extends(v) or v.extends(u))


def cone_members(tree: RTree, u: RNode) -> list[RNode]:
    if u not in tree:
        raise KeyError(f"{u.label()} is not a node of the tree")
    return [RNode(tree.leaves[i]) for i in tree.cone_range(u)]


def nodes_at_level(tree: RTree, r: Dist) -> list[RNode]:
    if r.is_zero:
        raise ValueError("nodes have ladder levels; ZERO is not one")
    k = r.index
    return sorted(RNode(p) for p in tree._children if len(p) == k + 1)


def is_perfect_truncation(tree: RTree) -> bool:
    """Every node strictly above the resolution has at least two leaves below it."""
    counts: dict[Path, int] = {}
    for leaf in tree.leaves:
        for k in range(tree.depth):
            counts[leaf[:k]] = counts.get(leaf[:k], 0) + 1
    return all(c >= 2 for c in counts.values())


def build_tree(space: FiniteUltrametricSpace) -> tuple[RTree, TreeIsometry]:
    """Dendrogram of a validated space.

    Levels are swept coarse to fine.  The node at ladder index ``j`` holding
    point ``x`` is the class of ``x`` under ``d <= r_{j+1}`` (ZERO past the
    end of the ladder); siblings are labeled in order of their least point.
    """
    res = space.resolution()
    depth = 0 if res.is_zero else res.index + 1
    m = len(space.ladder)
    reps = [space.reps(Dist(j) if j < m else ZERO) for j in range(1, depth + 1)]
    next_label: dict[Path, int] = {}
    label_of: dict[tuple[int, int], int] = {}  # (depth, rep) -> label
    paths: list[Path] = []
    for x in space.points:
        path: Path = ()
        for j in range(depth):
            rep = int(reps[j][x])
            key = (j, rep)
            if key not in label_of:
                label_of[key] = next_label.get(path, 0)
                next_label[path] = label_of[key] + 1
            path = path + (label_of[key],)
        paths.append(path)
    tree = RTree(space.ladder, paths)
    return tree, TreeIsometry(tuple(paths))


def realize_space(tree: RTree) -> tuple[FiniteUltrametricSpace, TreeIsometry]:
    """The end space of ``tree``: one point per leaf, in sorted leaf order."""
    leaves = tree.leaf_array()
    n, depth = leaves.shape
    m = len(tree.ladder)
    if depth == 0:
        h = np.zeros((1, 1), dtype=np.int16)
    else:
        diff = leaves[:, None, :] != leaves[None, :, :]
        first = np.argmax(diff, axis=2)
        h = np.where(diff.any(axis=2), m - first, 0)
    labels = [path_label(p) for p in tree.leaves]
    return FiniteUltrametricSpace(labels, tree.ladder, h), TreeIsometry(tree.leaves)


def _grow(ladder: DistanceLadder, child_count) -> RTree:
    level: list[Path] = [()]
    for j in range(len(ladder)):
        level = [p + (c,) for p in level for c in range(child_count(j, p))]
    return RTree(ladder, level)


def generate_from_ladder(ladder: DistanceLadder, branching: Sequence[int]) -> RTree:
    """Uniform tree: every node at ladder index ``j - 1`` has ``branching[j]`` children."""
    if len(branching) != len(ladder):
        raise ValueError(f"need {len(ladder)} branching counts, got {len(branching)}")
    if any(b < 2 for b in branching):
        raise ValueError("branching counts must be >= 2 for a perfect truncation")
    return _grow(ladder, lambda j, _p: branching[j])


def cantor(depth: int) -> RTree:
    """Binary tree over the ladder ``1, 1/2, ..., 2^-(depth-1)``."""
    return padic(2, depth)


def padic(p: int, depth: int) -> RTree:
    """``p``-ary tree over the ladder ``1, 1/p, ..., p^-(depth-1)``."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ladder = DistanceLadder(Fraction(1, p**j) for j in range(depth))
    return generate_from_ladder(ladder, [p] * depth)


def random_perfect(ladder: DistanceLadder, max_branching: int, seed: int) -> RTree:
    """Perfect truncation with child counts drawn from ``[2, max_branching]``.

    Nodes are visited level by level in sorted order, so the tree depends
    only on the arguments.
    """
    if max_branching < 2:
        raise ValueError("max_branching must be >= 2")
    rng = random.Random(seed)
    return _grow(ladder, lambda _j, _p: rng.randint(2, max_branching))


def random_tree(ladder: DistanceLadder, max_branching: int, seed: int, chain_prob: float = 0.3) -> RTree:
    """Tree that may contain chain nodes (one child); not perfect in general.

    Used to exercise the isometry on spaces that skip distance values.
    """
    rng = random.Random(seed)
    m = len(ladder)

    def count(j: int, _p) -> int:
        if j < m - 1 and rng.random() < chain_prob:
            return 1
        return rng.randint(2, max_branching)

    return _grow(ladder, count)
