"""Named self-maps on realized tree spaces and random map generators.

Maps on a tree act on point ids of ``realize_space(tree)``, i.e. on leaves
in sorted order.
"""

from __future__ import annotations

import random

from .contraction import SelfMap
from .metric import ZERO, FiniteUltrametricSpace, diameter, uniform_value_partition
from .rtree import RTree

__all__ = [
    "constant_map",
    "identity_map",
    "prepend_map",
    "random_level_contractive",
    "random_permutation",
    "random_self_map",
    "shift_map",
]


def identity_map(n: int) -> SelfMap:
    return SelfMap(range(n))


def constant_map(n: int, value: int = 0) -> SelfMap:
    return SelfMap([value] * n)


def prepend_map(tree: RTree, symbol: int = 0) -> SelfMap:
    """``u -> symbol ^ u`` with the last coordinate dropped.

    On trees with uneven branching each copied coordinate is reduced modulo
    the child count of the node it lands under.  Branches that first differ
    at ``r_i`` then agree through coordinate ``i``, so the Lipschitz constant
    is at most the largest ratio ``r_{i+1} / r_i`` (below 1).
    """
    if tree.depth == 0:
        return SelfMap([0])
    if not 0 <= symbol < tree.child_count(()):
        raise ValueError(f"root has no child {symbol}")
    targets = []
    for leaf in tree.leaves:
        path = (symbol,)
        for c in leaf[: tree.depth - 1]:
            path = path + (c % tree.child_count(path),)
        targets.append(tree.leaf_index(path))
    return SelfMap(targets)


def shift_map(tree: RTree) -> SelfMap:
    """Cyclic left shift ``(c_0, ..., c_{L-1}) -> (c_1, ..., c_{L-1}, c_0)``.

    Defined on uniform trees whose branching is the same at every level
    (Cantor and p-adic truncations), where it is a bijection.
    """
    targets = []
    for leaf in tree.leaves:
        if not leaf:
            targets.append(0)
            continue
        targets.append(tree.leaf_index(leaf[1:] + leaf[:1]))
    return SelfMap(targets)


def random_permutation(n: int, rng: random.Random) -> SelfMap:
    targets = list(range(n))
    rng.shuffle(targets)
    return SelfMap(targets)


def random_self_map(n: int, rng: random.Random) -> SelfMap:
    return SelfMap(rng.randrange(n) for _ in range(n))


def random_level_contractive(
    space: FiniteUltrametricSpace,
    rng: random.Random,
    level: int | None = None,
) -> tuple[SelfMap, int]:
    """A map that is level-contractive at ``r_level`` by construction.

    Every ball of the partition at ``r_level`` picks a target ball of
    strictly smaller diameter and its points are assigned into it, either
    arbitrarily or all to one point.  Returns the map and the level used.
    """
    m = len(space.ladder)
    if level is None:
        level = rng.randrange(m)
    ladder = space.ladder
    targets = [0] * len(space)
    for ball in uniform_value_partition(space, ladder.dist(level)):
        d = diameter(space, ball.members)
        # target radii strictly below the ball's diameter: finer ladder values and ZERO
        radii = [r for r in ladder.dists() if r < d] + [ZERO]
        radius = rng.choice(radii)
        centre = rng.randrange(len(space))
        pool = [y for y in space.points if space.heights[centre, y] <= space.height(radius)]
        if d.is_zero or radius.is_zero:
            pool = [centre]
        if rng.random() < 0.3:
            pool = [rng.choice(pool)]
        for x in ball.sorted_members():
            targets[x] = rng.choice(pool)
    return SelfMap(targets), level
