"""Finite ultrametric spaces over an exact distance ladder.

Distances are never stored as numbers.  A space carries a
:class:`DistanceLadder` ``r_0 > r_1 > ... > r_{m-1} > 0`` of exact rationals
and every matrix entry is either :data:`ZERO` or an index into the ladder.
Internally the matrix is held as integer *heights* (``0`` for ZERO and
``m - k`` for ``r_k``) so that ``max`` and ``<=`` on distances are plain
integer operations.
"""

from __future__ import annotations

import functools
from itertools import chain
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "ZERO",
    "Ball",
    "BallLawReport",
    "Dist",
    "DistanceLadder",
    "FiniteUltrametricSpace",
    "LawResult",
    "MalformedInputError",
    "PartitionError",
    "UltrametricError",
    "ViolationWitness",
    "ball_members",
    "check_ball_laws",
    "diameter",
    "partition_into_balls",
    "uniform_value_partition",
    "validate_ultrametric",
]


class MalformedInputError(ValueError):
    """Input that cannot even be read as a distance matrix over a ladder."""


class PartitionError(ValueError):
    """A radius chooser produced a ball that does not fit the partition."""

    def __init__(self, message: str, point: int):
        super().__init__(message)
        self.point = point


@functools.total_ordering
@dataclass(frozen=True)
class Dist:
    """A distance value: ZERO (``index is None``) or the ladder entry ``r_index``.

    Ordering follows the values, so a *smaller* index is a *larger* distance.
    """

    index: int | None = None

    @property
    def is_zero(self) -> bool:
        return self.index is None

    def _key(self) -> tuple[int, int]:
        return (0, 0) if self.index is None else (1, -self.index)

    def __lt__(self, other: Dist) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self._key() < other._key()

    def __repr__(self) -> str:
        return "ZERO" if self.index is None else f"r{self.index}"


ZERO = Dist()


@dataclass(frozen=True)
class DistanceLadder:
    """A strictly decreasing finite sequence of positive rationals.

    This is a finite prefix of a decreasing null sequence; nothing in the
    library depends on the (absent) tail.
    """

    values: tuple[Fraction, ...]

    def __init__(self, values: Iterable):
        vals = tuple(Fraction(v) for v in values)
        if not vals:
            raise MalformedInputError("distance ladder must have at least one value")
        if vals[-1] <= 0:
            raise MalformedInputError("distance ladder values must be positive")
        for a, b in zip(vals, vals[1:]):
            if not a > b:
                raise MalformedInputError(
                    f"distance ladder must be strictly decreasing ({a} then {b})"
                )
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k]

    def value(self, d: Dist) -> Fraction:
        return Fraction(0) if d.index is None else self.values[d.index]

    def dist(self, k: int) -> Dist:
        if not 0 <= k < len(self.values):
            raise MalformedInputError(
                f"ladder index {k} out of range for ladder of length {len(self.values)}"
            )
        return Dist(k)

    def dists(self) -> list[Dist]:
        """All ladder values, coarsest first."""
        return [Dist(k) for k in range(len(self.values))]

    def height(self, d: Dist) -> int:
        if d.index is None:
            return 0
        if not 0 <= d.index < len(self.values):
            raise MalformedInputError(f"{d!r} is not a value of this ladder")
        return len(self.values) - d.index

    def from_height(self, h: int) -> Dist:
        h = int(h)
        return ZERO if h == 0 else Dist(len(self.values) - h)

    def __str__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.values) + ")"


@dataclass(frozen=True)
class ViolationWitness:
    """The first failed axiom found while validating a matrix.

    ``points`` has one entry for ``zero-diagonal``, two for ``asymmetry`` and
    ``indiscernibles`` and three for ``strong-triangle``; ``distances`` holds
    the matrix entries that were compared, in the order the check reads them.
    """

    kind: str
    points: tuple[int, ...]
    distances: tuple[Dist, ...]

    def reproduces(self, ladder: DistanceLadder, matrix) -> bool:
        """Re-read the cited entries of ``matrix`` and re-evaluate the failure."""
        h = _heights_from_matrix(ladder, matrix)
        p = self.points
        if self.kind == "zero-diagonal":
            return h[p[0], p[0]] != 0
        if self.kind == "asymmetry":
            return h[p[0], p[1]] != h[p[1], p[0]]
        if self.kind == "indiscernibles":
            return p[0] != p[1] and h[p[0], p[1]] == 0
        if self.kind == "strong-triangle":
            x, y, z = p
            return h[x, y] > max(h[x, z], h[y, z])
        raise ValueError(f"unknown violation kind {self.kind!r}")

    def describe(self, ladder: DistanceLadder, labels: Sequence[str] | None = None) -> str:
        names = [labels[i] if labels else str(i) for i in self.points]
        vals = [str(ladder.value(d)) for d in self.distances]
        if self.kind == "strong-triangle":
            x, y, z = names
            return (
                f"strong-triangle: d({x},{y})={vals[0]} > "
                f"max(d({x},{z})={vals[1]}, d({y},{z})={vals[2]})"
            )
        if self.kind == "asymmetry":
            x, y = names
            return f"asymmetry: d({x},{y})={vals[0]} but d({y},{x})={vals[1]}"
        if self.kind == "indiscernibles":
            x, y = names
            return f"indiscernibles: d({x},{y})=0 for distinct points"
        return f"zero-diagonal: d({names[0]},{names[0]})={vals[0]}"


class UltrametricError(ValueError):
    def __init__(self, witness: ViolationWitness):
        super().__init__(f"not an ultrametric: {witness.kind} at {witness.points}")
        self.witness = witness


def _height_dtype(m: int):
    return np.int8 if m < 127 else np.int16 if m < 32767 else np.int32


def _heights_from_matrix(ladder: DistanceLadder, matrix) -> np.ndarray:
    """Convert a matrix of Dist / ints (-1 or None for ZERO) into heights."""
    m = len(ladder)
    rows = list(matrix)
    n = len(rows)
    if n == 0:
        raise MalformedInputError("a space needs at least one point")
    fast = _int_heights(rows, n, m)
    if fast is not None:
        return fast
    h = np.zeros((n, n), dtype=_height_dtype(m))
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != n:
            raise MalformedInputError(f"matrix is not square: row {i} has {len(row)} entries, expected {n}")
        for j, e in enumerate(row):
            if isinstance(e, Dist):
                k = e.index
            elif e is None:
                k = None
            elif isinstance(e, (int, np.integer)) and not isinstance(e, bool):
                k = None if e == -1 else int(e)
            else:
                raise MalformedInputError(f"entry [{i}][{j}] is not a distance index: {e!r}")
            if k is None:
                continue
            if not 0 <= k < m:
                raise MalformedInputError(
                    f"entry [{i}][{j}] = {k} is not a valid index for a ladder of length {m}"
                )
            h[i, j] = m - k
    return h


def _int_heights(rows, n: int, m: int) -> np.ndarray | None:
    """Vectorized conversion for the common case of a square matrix of plain ints."""
    if not all(isinstance(r, (list, tuple)) and len(r) == n for r in rows):
        return None
    if not set(map(type, chain.from_iterable(rows))) <= {int}:
        return None
    k = np.array(rows, dtype=np.int64)
    if ((k < -1) | (k >= m)).any():
        return None  # the slow path names the bad entry
    return np.where(k == -1, 0, m - k).astype(_height_dtype(m))


def _row_keys(rows: np.ndarray) -> np.ndarray:
    """One hashable key per boolean row; equal keys iff equal rows."""
    packed = np.ascontiguousarray(np.packbits(rows, axis=1))
    return packed.view(np.dtype((np.void, packed.shape[1]))).ravel()


class FiniteUltrametricSpace:
    """Labeled points with a ladder-indexed ultrametric.

    Instances are built by :func:`validate_ultrametric` (or
    :meth:`from_matrix`) and are immutable afterwards.  For every height
    ``h`` the array ``reps(h)`` gives, per point, the least point id of its
    closed ball of that radius; this doubles as the canonical partition at
    every ladder value.
    """

    __slots__ = ("labels", "ladder", "_h", "_reps")

    def __init__(self, labels: Sequence[str], ladder: DistanceLadder, heights: np.ndarray):
        self.labels = tuple(labels)
        self.ladder = ladder
        heights = np.array(heights, dtype=_height_dtype(len(ladder)))
        heights.setflags(write=False)
        self._h = heights
        n = len(self.labels)
        reps = []
        for h in range(len(ladder) + 1):
            r = np.argmax(heights <= h, axis=1) if h else np.arange(n)
            r.setflags(write=False)
            reps.append(r)
        self._reps = tuple(reps)

    @classmethod
    def from_matrix(cls, labels, ladder, matrix) -> FiniteUltrametricSpace:
        """Like :func:`validate_ultrametric` but raising on a violation."""
        result = validate_ultrametric(labels, ladder, matrix)
        if isinstance(result, ViolationWitness):
            raise UltrametricError(result)
        return result

    @classmethod
    def _unchecked(cls, labels, ladder, matrix) -> FiniteUltrametricSpace:
        # Test hook: skips validation so law checks can be run on bad data.
        if not isinstance(ladder, DistanceLadder):
            ladder = DistanceLadder(ladder)
        return cls(labels, ladder, _heights_from_matrix(ladder, matrix))

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"FiniteUltrametricSpace(n={len(self)}, ladder={self.ladder})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteUltrametricSpace):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.ladder == other.ladder
            and np.array_equal(self._h, other._h)
        )

    __hash__ = None

    @property
    def heights(self) -> np.ndarray:
        """Read-only height matrix (``0`` for ZERO, ``m - k`` for ``r_k``)."""
        return self._h

    @property
    def points(self) -> range:
        return range(len(self.labels))

    def dist(self, x: int, y: int) -> Dist:
        return self.ladder.from_height(self._h[x, y])

    def value(self, x: int, y: int) -> Fraction:
        return self.ladder.value(self.dist(x, y))

    def matrix(self) -> list[list[int]]:
        """Matrix of ladder indices with ``-1`` for ZERO."""
        m = len(self.ladder)
        h = self._h.astype(np.int64)
        return np.where(h == 0, -1, m - h).tolist()

    def height(self, d: Dist) -> int:
        return self.ladder.height(d)

    def reps(self, r: Dist) -> np.ndarray:
        return self._reps[self.height(r)]

    def resolution(self) -> Dist:
        """The smallest nonzero distance realized, or ZERO for one point."""
        off = self._h[self._h > 0]
        return self.ladder.from_height(off.min()) if off.size else ZERO

    def describe_subset(self, members: Iterable[int]) -> str:
        """Short name for a set of points, e.g. ``1**`` for a Cantor cone."""
        names = [self.labels[i] for i in sorted(members)]
        if len(names) > 1 and len({len(s) for s in names}) == 1:
            return "".join(c[0] if len(set(c)) == 1 else "*" for c in zip(*names))
        if len(names) == 1:
            return names[0]
        return "{" + ",".join(names) + "}"


@dataclass(frozen=True)
class Ball:
    """A closed ball ``B(center, radius)``.

    Equality and hashing use the member set only: two balls are the same
    set whatever center or radius named them.
    """

    space: FiniteUltrametricSpace = field(compare=False, repr=False)
    center: int = field(compare=False)
    radius: Dist = field(compare=False)
    members: frozenset[int]

    @property
    def representative(self) -> int:
        return min(self.members)

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)

    def sorted_members(self) -> list[int]:
        return sorted(self.members)

    def describe(self) -> str:
        return self.space.describe_subset(self.members)


def validate_ultrametric(labels, ladder, matrix) -> FiniteUltrametricSpace | ViolationWitness:
    """Validate a distance matrix, returning the space or the first violation.

    Malformed input (empty, non-square, bad index, label mismatch) raises
    :class:`MalformedInputError`.  Metric failures are returned as a
    :class:`ViolationWitness`: pairs ``(x, y)`` with ``x <= y`` are scanned
    lexicographically first (diagonal, then asymmetry, then zero distance
    between distinct points), then triples ``(x, y, z)`` with ``x < y``.
    """
    if not isinstance(ladder, DistanceLadder):
        ladder = DistanceLadder(ladder)
    h = _heights_from_matrix(ladder, matrix)
    n = h.shape[0]
    labels = [str(s) for s in labels]
    if len(labels) != n:
        raise MalformedInputError(f"{len(labels)} labels for a {n}x{n} matrix")
    if len(set(labels)) != n:
        raise MalformedInputError("point labels must be distinct")

    witness = _first_pair_violation(ladder, h)
    if witness is None and not _threshold_relations_are_equivalences(h, len(ladder)):
        witness = _first_triangle_violation(ladder, h)
        assert witness is not None
    if witness is not None:
        return witness
    return FiniteUltrametricSpace(labels, ladder, h)


def _first_pair_violation(ladder, h) -> ViolationWitness | None:
    n = h.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    diag = np.eye(n, dtype=bool)
    bad = (diag & (h != 0)) | (upper & ((h != h.T) | (h == 0)))
    hits = np.argwhere(bad)
    if not hits.size:
        return None
    x, y = (int(v) for v in hits[0])
    d = ladder.from_height
    if x == y:
        return ViolationWitness("zero-diagonal", (x,), (d(h[x, x]),))
    if h[x, y] != h[y, x]:
        return ViolationWitness("asymmetry", (x, y), (d(h[x, y]), d(h[y, x])))
    return ViolationWitness("indiscernibles", (x, y), (ZERO,))


def _threshold_relations_are_equivalences(h: np.ndarray, m: int) -> bool:
    # d is an ultrametric iff every relation {d <= r} is transitive; with the
    # pair axioms in place, {d <= r} is an equivalence iff it is the kernel of
    # x -> least element of row x.
    for level in range(1, m):
        rel = h <= level
        rep = np.argmax(rel, axis=1)
        if not np.array_equal(rel, rep[:, None] == rep[None, :]):
            return False
    return True


def _first_triangle_violation(ladder, h) -> ViolationWitness | None:
    n = h.shape[0]
    idx = np.arange(n)
    for x in range(n):
        # viol[y, z] : d(x,y) > max(d(x,z), d(y,z))
        viol = h[x, :, None] > np.maximum(h[x, None, :], h)
        viol &= (idx > x)[:, None]
        hits = np.argwhere(viol)
        if hits.size:
            y, z = (int(v) for v in hits[0])
            d = ladder.from_height
            return ViolationWitness(
                "strong-triangle", (x, y, z), (d(h[x, y]), d(h[x, z]), d(h[y, z]))
            )
    return None


def diameter(space: FiniteUltrametricSpace, subset: Iterable[int]) -> Dist:
    """Largest pairwise distance in a nonempty subset."""
    idx = np.fromiter(sorted(set(subset)), dtype=np.intp)
    if idx.size == 0:
        raise ValueError("diameter of an empty set is undefined")
    return space.ladder.from_height(space.heights[np.ix_(idx, idx)].max())


def ball_members(space: FiniteUltrametricSpace, center: int, radius: Dist) -> Ball:
    if not 0 <= center < len(space):
        raise IndexError(f"point {center} out of range")
    level = space.height(radius)
    members = frozenset(int(i) for i in np.flatnonzero(space.heights[center] <= level))
    return Ball(space, center, radius, members)


def uniform_value_partition(space: FiniteUltrametricSpace, r: Dist) -> list[Ball]:
    """All distinct balls of radius ``r``, centered at and sorted by least member."""
    reps = space.reps(r)
    groups: dict[int, list[int]] = {}
    for x, c in enumerate(reps.tolist()):
        groups.setdefault(c, []).append(x)
    return [Ball(space, c, r, frozenset(groups[c])) for c in sorted(groups)]


def partition_into_balls(
    space: FiniteUltrametricSpace,
    subset: Iterable[int],
    radius_chooser: Callable[[int], Dist],
) -> list[Ball]:
    """Greedy ball partition of ``subset``.

    Points are visited in id order; each uncovered point ``x`` contributes
    ``B(x, radius_chooser(x))``.  A chosen ball that leaves ``subset`` or
    swallows an earlier ball raises :class:`PartitionError` naming ``x``.
    """
    target = frozenset(subset)
    if not target:
        raise ValueError("cannot partition an empty set")
    covered: set[int] = set()
    out: list[Ball] = []
    for x in sorted(target):
        if x in covered:
            continue
        ball = ball_members(space, x, radius_chooser(x))
        if not ball.members <= target:
            raise PartitionError(f"ball chosen at point {x} escapes the subset", x)
        if ball.members & covered:
            raise PartitionError(f"ball chosen at point {x} overlaps an earlier ball", x)
        covered |= ball.members
        out.append(ball)
    return out


@dataclass
class LawResult:
    checked: int
    failures: int = 0
    examples: list[tuple] = field(default_factory=list)
    vacuous: bool = False

    @property
    def ok(self) -> bool:
        return self.failures == 0


@dataclass
class BallLawReport:
    laws: dict[str, LawResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.laws.values())

    def failed(self) -> dict[str, LawResult]:
        return {k: v for k, v in self.laws.items() if not v.ok}

    def lines(self) -> list[str]:
        out = []
        for name, r in self.laws.items():
            if r.vacuous:
                out.append(f"{name}: vacuous (finite spaces are discrete)")
            else:
                status = "ok" if r.ok else f"FAILED {r.failures} of {r.checked}"
                out.append(f"{name}: {status} ({r.checked} instances)")
        return out


_MAX_EXAMPLES = 10


def _record(result: LawResult, hits: np.ndarray, as_tuple=lambda row: tuple(int(v) for v in row)):
    result.failures += int(hits.shape[0])
    for row in hits[: _MAX_EXAMPLES - len(result.examples)]:
        result.examples.append(as_tuple(row))


def check_ball_laws(space: FiniteUltrametricSpace) -> BallLawReport:
    """Exhaustively check the basic ball laws on the stored matrix.

    The checks read the raw matrix rather than trusting validation, so a
    corrupted matrix (see ``FiniteUltrametricSpace._unchecked``) shows up as
    failed instances.  Radii range over ZERO and every ladder value.

    * ``(i) isosceles``: over all triples, ``d(x,z) != d(y,z)`` forces
      ``d(x,y) = max(d(x,z), d(y,z))``.
    * ``(ii) clopen``: vacuous at finite scale.
    * ``(iii) nesting``: any two balls that meet are nested.
    * ``(iv) center invariance``: ``y in B(x,r)`` implies ``B(y,r) = B(x,r)``.
    * ``(v) radial diameter``: for every ball and the whole space, the
      diameter equals the largest distance from each fixed member.
    """
    h = space.heights
    n = h.shape[0]
    m = len(space.ladder)
    laws: dict[str, LawResult] = {}

    iso = LawResult(checked=n**3)
    chunk = max(1, 2_000_000 // max(1, n * n))
    for z0 in range(0, n, chunk):
        zs = slice(z0, min(n, z0 + chunk))
        a = h[:, None, zs]  # d(x, z)
        b = h[None, :, zs]  # d(y, z)
        bad = h[:, :, None] != np.maximum(a, b)
        bad &= a != b
        if bad.any():
            hits = np.argwhere(bad)
            hits[:, 2] += z0
            _record(iso, hits)
    laws["(i) isosceles"] = iso

    laws["(ii) clopen"] = LawResult(checked=0, vacuous=True)

    rows = np.concatenate([h <= level for level in range(m + 1)])
    _, first = np.unique(_row_keys(rows), return_index=True)
    balls = rows[np.sort(first)]
    k = balls.shape[0]
    nest = LawResult(checked=k * (k - 1) // 2)
    fb = balls.astype(np.float64)
    inter = fb @ fb.T
    size = fb.sum(axis=1)
    crossing = (inter > 0) & (inter < np.minimum(size[:, None], size[None, :]))
    hits = np.argwhere(np.triu(crossing, 1))
    if hits.size:
        _record(
            nest,
            hits,
            lambda row: (
                tuple(np.flatnonzero(balls[row[0]]).tolist()),
                tuple(np.flatnonzero(balls[row[1]]).tolist()),
            ),
        )
    laws["(iii) nesting"] = nest

    center = LawResult(checked=0)
    for level in range(m + 1):
        rel = h <= level
        center.checked += int(rel.sum())
        _, cls = np.unique(_row_keys(rel), return_inverse=True)
        cls = cls.reshape(-1)
        bad = rel & (cls[:, None] != cls[None, :])
        hits = np.argwhere(bad)
        if hits.size:
            _record(center, hits, lambda row, level=level: (int(row[0]), int(row[1]), level))
    laws["(iv) center invariance"] = center

    radial = LawResult(checked=0)
    subsets = np.concatenate([balls, np.ones((1, n), dtype=bool)])
    radial.checked = int(subsets.sum())
    step = max(1, 2_000_000 // max(1, n * n))
    for s0 in range(0, subsets.shape[0], step):
        sub = subsets[s0 : s0 + step]
        # row_max[b, x]: largest distance from x to a member of subset b
        # (heights are >= 0, so masking by multiplication is safe)
        row_max = (sub[:, None, :] * h[None, :, :]).max(axis=2)
        row_max[~sub] = -1
        bad = sub & (row_max != row_max.max(axis=1, keepdims=True))
        if bad.any():
            hits = np.argwhere(bad)
            radial.failures += int(hits.shape[0])
            for b, x in hits[: _MAX_EXAMPLES - len(radial.examples)]:
                radial.examples.append((tuple(np.flatnonzero(sub[b]).tolist()), int(x)))
    laws["(v) radial diameter"] = radial

    return BallLawReport(laws)
