"""Contraction analysis of self-maps and non-surjectivity certificates.

On a finite space every map is locally contractive through singleton
neighborhoods, so the property certified here is *level contractivity*:
at some ladder value ``r_t`` each ball of the uniform partition is sent to
a set of strictly smaller diameter.  :func:`deficiency_certificate` turns
that into a counting argument: every coarse ball's image fits inside a
single finer ball, there are more fine balls than coarse ones, so some
fine ball receives nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .metric import (
    Ball,
    Dist,
    FiniteUltrametricSpace,
    ball_members,
    diameter,
    uniform_value_partition,
)

__all__ = [
    "CertificationError",
    "ContractivePartition",
    "DeficiencyCertificate",
    "FixedPointReport",
    "InsufficientDepth",
    "NotContractive",
    "PartitionFailure",
    "RadialReport",
    "SelfMap",
    "ShrinkReport",
    "banach_fixed_point",
    "contractive_ball_partition",
    "deficiency_certificate",
    "find_contractive_nbhd",
    "image_of",
    "is_level_contractive",
    "lipschitz_constant",
    "radial_modulus",
    "radial_report",
    "shrink_check",
    "surjectivity_oracle",
]


class CertificationError(Exception):
    """No deficiency certificate could be produced."""


class NotContractive(CertificationError):
    """No ladder level has all partition images strictly below that level."""


class InsufficientDepth(CertificationError):
    """A contracting level exists but the ladder is too short for the count."""


@dataclass(frozen=True)
class SelfMap:
    """A total map on point ids; ``targets[i]`` is the image of point ``i``."""

    targets: tuple[int, ...]

    def __init__(self, targets: Iterable[int]):
        object.__setattr__(self, "targets", tuple(int(t) for t in targets))

    def __call__(self, x: int) -> int:
        return self.targets[x]

    def __len__(self) -> int:
        return len(self.targets)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.targets, dtype=np.intp)

    def check(self, space: FiniteUltrametricSpace) -> None:
        n = len(space)
        if len(self.targets) != n:
            raise ValueError(f"map has {len(self.targets)} targets for a space of {n} points")
        for i, t in enumerate(self.targets):
            if not 0 <= t < n:
                raise ValueError(f"target of point {i} is {t}, outside 0..{n - 1}")


def image_of(f: SelfMap, subset: Iterable[int]) -> frozenset[int]:
    return frozenset(f(x) for x in subset)


def _ratio_table(space: FiniteUltrametricSpace) -> list[list[Fraction | None]]:
    # table[a][b] = value(height a) / value(height b), None for b == 0
    ladder = space.ladder
    vals = [ladder.value(ladder.from_height(h)) for h in range(len(ladder) + 1)]
    return [[None if b == 0 else vals[a] / vals[b] for b in range(len(vals))] for a in range(len(vals))]


def lipschitz_constant(space: FiniteUltrametricSpace, f: SelfMap) -> Fraction:
    """Exact ``max d(f x, f y) / d(x, y)`` over distinct pairs (0 if none)."""
    f.check(space)
    h = space.heights
    fa = f.as_array()
    hf = h[np.ix_(fa, fa)]
    table = _ratio_table(space)
    best = Fraction(0)
    for b in np.unique(h[h > 0]).tolist():
        a = int(hf[h == b].max())
        best = max(best, table[a][b])
    return best


def _radial_profile(space: FiniteUltrametricSpace, f: SelfMap, x: int) -> list[int]:
    """``out[b]`` = largest image height among points at height ``b`` from ``x`` (-1 if none)."""
    h = space.heights
    fa = f.as_array()
    out = np.full(len(space.ladder) + 1, -1, dtype=np.int64)
    np.maximum.at(out, h[x].astype(np.int64), h[fa[x], fa].astype(np.int64))
    return out.tolist()


def radial_modulus(space: FiniteUltrametricSpace, f: SelfMap, x: int, r: Dist) -> Fraction | None:
    """``max d(f x, f u) / d(x, u)`` over ``u`` in ``B(x, r)`` minus ``x``; None for a singleton ball."""
    f.check(space)
    profile = _radial_profile(space, f, x)
    return _modulus_from_profile(_ratio_table(space), profile, space.height(r))


def _modulus_from_profile(table, profile, level: int) -> Fraction | None:
    best = None
    for b in range(1, level + 1):
        a = profile[b]
        if a >= 0:
            q = table[a][b]
            best = q if best is None or q > best else best
    return best


@dataclass(frozen=True)
class RadialReport:
    """Radial moduli of a map at every point and every ladder radius.

    ``moduli[x][k]`` is the modulus of ``B(x, r_k)`` (None for a singleton);
    ``nbhd[x]`` is the largest radius whose modulus is below 1, with that
    modulus, or None.  ``isolated`` lists points whose ball at the space's
    finest distance is a singleton.
    """

    moduli: tuple[tuple[Fraction | None, ...], ...]
    nbhd: tuple[tuple[Dist, Fraction] | None, ...]
    isolated: tuple[int, ...]

    def contractive_points(self) -> list[int]:
        return [x for x, n in enumerate(self.nbhd) if n is not None]


def radial_report(space: FiniteUltrametricSpace, f: SelfMap) -> RadialReport:
    f.check(space)
    table = _ratio_table(space)
    m = len(space.ladder)
    moduli, nbhd = [], []
    for x in space.points:
        profile = _radial_profile(space, f, x)
        row = tuple(_modulus_from_profile(table, profile, m - k) for k in range(m))
        moduli.append(row)
        nbhd.append(_largest_contractive(row))
    res = space.resolution()
    isolated = ()
    if not res.is_zero:
        level = space.height(res)
        isolated = tuple(int(x) for x in np.flatnonzero((space.heights <= level).sum(axis=1) == 1))
    return RadialReport(tuple(moduli), tuple(nbhd), isolated)


def _largest_contractive(row: Sequence[Fraction | None]) -> tuple[Dist, Fraction] | None:
    for k, alpha in enumerate(row):
        if alpha is not None and alpha < 1:
            return Dist(k), alpha
    return None


def find_contractive_nbhd(space: FiniteUltrametricSpace, f: SelfMap, x: int) -> tuple[Dist, Fraction] | None:
    """Largest non-singleton ball around ``x`` with radial modulus below 1."""
    f.check(space)
    table = _ratio_table(space)
    profile = _radial_profile(space, f, x)
    m = len(space.ladder)
    return _largest_contractive([_modulus_from_profile(table, profile, m - k) for k in range(m)])


@dataclass(frozen=True)
class ContractivePartition:
    """Disjoint cover by balls, each with its modulus (measured from its center)."""

    balls: tuple[tuple[Ball, Fraction], ...]

    def __iter__(self):
        return iter(self.balls)

    def __len__(self) -> int:
        return len(self.balls)


@dataclass(frozen=True)
class PartitionFailure:
    point: int
    reason: str

    def __bool__(self) -> bool:
        return False


def contractive_ball_partition(space: FiniteUltrametricSpace, f: SelfMap) -> ContractivePartition | PartitionFailure:
    """Greedy partition into f-contractive balls.

    Each uncovered point, in id order, takes its largest contractive ball
    that contains no earlier ball (balls that meet are nested and the point
    itself is uncovered).  Singleton balls have no modulus and never
    qualify; the first point left without a ball is reported.
    """
    f.check(space)
    report = radial_report(space, f)
    owner = np.full(len(space), -1, dtype=np.int64)
    chosen: list[tuple[Ball, Fraction]] = []
    for x in space.points:
        if owner[x] >= 0:
            continue
        for k, alpha in enumerate(report.moduli[x]):
            if alpha is None or alpha >= 1:
                continue
            ball = ball_members(space, x, Dist(k))
            idx = np.fromiter(ball.members, dtype=np.intp)
            if (owner[idx] >= 0).any():
                continue
            owner[idx] = len(chosen)
            chosen.append((ball, alpha))
            break
        else:
            return PartitionFailure(x, "no f-contractive ball avoids the balls already chosen")
    return ContractivePartition(tuple(chosen))


@dataclass(frozen=True)
class ShrinkReport:
    rows: tuple[tuple[Ball, Dist, Dist, Fraction, bool], ...]  # ball, diam, image diam, alpha, ok

    @property
    def ok(self) -> bool:
        return all(r[4] for r in self.rows)


def shrink_check(space: FiniteUltrametricSpace, f: SelfMap, partition: ContractivePartition) -> ShrinkReport:
    """Check ``diam f[B] <= alpha_B * diam B`` exactly for every partition ball."""
    ladder = space.ladder
    rows = []
    for ball, alpha in partition:
        d = diameter(space, ball.members)
        di = diameter(space, image_of(f, ball.members))
        ok = ladder.value(di) <= alpha * ladder.value(d)
        rows.append((ball, d, di, alpha, ok))
    return ShrinkReport(tuple(rows))


def _image_diameters(space: FiniteUltrametricSpace, f: SelfMap, reps: np.ndarray) -> np.ndarray:
    """Image diameter (as height) of every class of ``reps``, indexed by representative.

    Uses the radial property: within an ultrametric the diameter of a set is
    its largest distance from any one member.
    """
    fa = f.as_array()
    out = np.zeros(len(space), dtype=np.int64)
    np.maximum.at(out, reps, space.heights[fa[reps], fa].astype(np.int64))
    return out


def is_level_contractive(space: FiniteUltrametricSpace, f: SelfMap, r: Dist) -> bool:
    """Every non-degenerate ball of the partition at ``r`` has a strictly smaller image."""
    f.check(space)
    for ball in uniform_value_partition(space, r):
        d = diameter(space, ball.members)
        if d.is_zero:
            continue
        if not diameter(space, image_of(f, ball.members)) < d:
            return False
    return True


@dataclass(frozen=True)
class DeficiencyCertificate:
    """Counting witness that a map misses part of the space.

    ``coarse`` is ``r_t``; ``fine`` is ``r_s`` or ZERO (partition into
    points).  ``enclosures`` pairs every coarse ball with the fine ball
    containing its image, ``missed`` lists fine balls no enclosure names and
    ``witnesses`` holds the least point of each missed ball.
    """

    coarse: Dist
    fine: Dist
    image_diameter: Dist
    n_coarse: int
    n_fine: int
    enclosures: tuple[tuple[Ball, Ball], ...]
    missed: tuple[Ball, ...]
    witnesses: tuple[int, ...]

    def check(self, space: FiniteUltrametricSpace, f: SelfMap) -> list[str]:
        """Recompute every claim by direct set computation; returns problems found."""
        problems = []
        image = image_of(f, space.points)
        if self.n_fine <= self.n_coarse:
            problems.append(f"n_fine={self.n_fine} does not exceed n_coarse={self.n_coarse}")
        if len(self.missed) < self.n_fine - self.n_coarse:
            problems.append("fewer missed balls than the count guarantees")
        coarse = uniform_value_partition(space, self.coarse)
        fine = uniform_value_partition(space, self.fine)
        if [b.members for b, _ in self.enclosures] != [b.members for b in coarse]:
            problems.append("enclosures do not list the coarse partition")
        if len(coarse) != self.n_coarse or len(fine) != self.n_fine:
            problems.append("ball counts disagree with the partitions")
        fine_sets = {b.members for b in fine}
        for b, e in self.enclosures:
            if e.members not in fine_sets:
                problems.append(f"enclosure {e.describe()} is not a fine ball")
            if not image_of(f, b.members) <= e.members:
                problems.append(f"image of {b.describe()} leaves {e.describe()}")
            if space.ladder.value(diameter(space, image_of(f, b.members))) > space.ladder.value(self.fine):
                problems.append(f"image of {b.describe()} is wider than the fine value")
        named = {e.members for _, e in self.enclosures}
        for ball, w in zip(self.missed, self.witnesses):
            if ball.members not in fine_sets or ball.members in named:
                problems.append(f"missed ball {ball.describe()} is not an unused fine ball")
            if ball.members & image:
                problems.append(f"missed ball {ball.describe()} meets the image")
            if w not in ball.members or w in image:
                problems.append(f"witness {w} is not a missed point")
        return problems


def deficiency_certificate(space: FiniteUltrametricSpace, f: SelfMap) -> DeficiencyCertificate:
    """Search ladder levels coarse to fine for a counting certificate.

    Only ladder values down to the smallest realized distance are tried.
    Raises :class:`NotContractive` when no level's partition images all
    fall strictly below that level, and :class:`InsufficientDepth` when such
    a level exists but never leaves more fine balls than coarse ones.
    """
    f.check(space)
    ladder = space.ladder
    fa = f.as_array()
    contracting = False
    res = space.resolution()
    # ladder values finer than every realized distance split the space into
    # points and would count as vacuously contracting
    last = -1 if res.is_zero else res.index
    for t in range(last + 1):
        rt = Dist(t)
        reps_t = space.reps(rt)
        widths = _image_diameters(space, f, reps_t)
        coarse_reps = np.unique(reps_t)
        top = int(widths[coarse_reps].max())
        if top >= space.height(rt):
            continue
        contracting = True
        # every ladder value >= the image diameter encloses each image; take the smallest
        rs = ladder.from_height(top)
        reps_s = space.reps(rs)
        fine_reps = np.unique(reps_s)
        if fine_reps.size <= coarse_reps.size:
            continue
        return _assemble(space, f, fa, rt, rs, ladder.from_height(top), coarse_reps, reps_s, fine_reps)
    if contracting:
        raise InsufficientDepth("contracting level found but the ladder is too shallow for a count")
    raise NotContractive("no ladder level maps every ball to a strictly smaller set")


def _assemble(space, f, fa, rt, rs, width, coarse_reps, reps_s, fine_reps) -> DeficiencyCertificate:
    coarse = uniform_value_partition(space, rt)
    fine = {b.center: b for b in uniform_value_partition(space, rs)}
    enclosures = tuple((b, fine[int(reps_s[fa[b.center]])]) for b in coarse)
    used = {e.center for _, e in enclosures}
    missed = tuple(fine[c] for c in sorted(fine) if c not in used)
    witnesses = tuple(b.representative for b in missed)

    # Brute-force confirmation before anything is returned.
    image = set(fa.tolist())
    for ball in missed:
        hit = ball.members & image
        if hit:
            raise AssertionError(f"certificate would claim {ball.describe()} is missed but it contains image points {sorted(hit)}")
    return DeficiencyCertificate(
        coarse=rt,
        fine=rs,
        image_diameter=width,
        n_coarse=int(coarse_reps.size),
        n_fine=int(fine_reps.size),
        enclosures=enclosures,
        missed=missed,
        witnesses=witnesses,
    )


def surjectivity_oracle(space: FiniteUltrametricSpace, f: SelfMap) -> tuple[bool, list[int]]:
    """Brute force: is every point hit?  Also returns the points with no preimage."""
    hit = [False] * len(space)
    for t in f.targets:
        hit[t] = True
    missed = [x for x, h in enumerate(hit) if not h]
    return not missed, missed


@dataclass(frozen=True)
class FixedPointReport:
    fixed_point: int
    trace: tuple[int, ...]

    @property
    def trace_length(self) -> int:
        return len(self.trace)


def banach_fixed_point(space: FiniteUltrametricSpace, f: SelfMap, start: int = 0) -> FixedPointReport:
    """Iterate a strict contraction from ``start`` to its unique fixed point.

    Raises ValueError unless the Lipschitz constant is below 1.
    """
    lip = lipschitz_constant(space, f)
    if lip >= 1:
        raise ValueError(f"Lipschitz constant {lip} is not below 1")
    trace = [start]
    seen = {start}
    x = start
    while True:
        x = f(x)
        if x in seen:
            break
        seen.add(x)
        trace.append(x)
    if f(x) != x:
        raise AssertionError(f"orbit of {start} ends in a cycle through {x}, not a fixed point")
    fixed = [p for p in space.points if f(p) == p]
    if fixed != [x]:
        raise AssertionError(f"expected a unique fixed point, found {fixed}")
    return FixedPointReport(x, tuple(trace))
