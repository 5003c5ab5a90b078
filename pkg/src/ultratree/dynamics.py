"""Orbits, invariant sets and minimality of finite dynamical systems.

Finite spaces are discrete, so every subset is closed and "closed invariant
set" reduces to "invariant set".  A finite system is minimal exactly when
the map is a single cycle through all points.
"""

from __future__ import annotations

from dataclasses import dataclass

from .contraction import CertificationError, DeficiencyCertificate, SelfMap, deficiency_certificate
from .metric import FiniteUltrametricSpace

__all__ = [
    "MinimalityVerdict",
    "OrbitRecord",
    "contractive_nonminimality",
    "eventual_image",
    "minimality_check",
    "orbit",
]


@dataclass(frozen=True)
class OrbitRecord:
    start: int
    iterates: tuple[int, ...]  # distinct points up to the first repetition
    preperiod: int
    period: int

    @property
    def points(self) -> frozenset[int]:
        return frozenset(self.iterates)


@dataclass(frozen=True)
class MinimalityVerdict:
    minimal: bool
    invariant_set: frozenset[int] | None = None


def orbit(space: FiniteUltrametricSpace, f: SelfMap, x: int) -> OrbitRecord:
    f.check(space)
    position: dict[int, int] = {}
    seq: list[int] = []
    while x not in position:
        position[x] = len(seq)
        seq.append(x)
        x = f(x)
    pre = position[x]
    return OrbitRecord(seq[0], tuple(seq), pre, len(seq) - pre)


def eventual_image(space: FiniteUltrametricSpace, f: SelfMap) -> frozenset[int]:
    """Iterate ``E -> f[E]`` from the whole space until it stops shrinking."""
    f.check(space)
    current = frozenset(space.points)
    while True:
        nxt = frozenset(f(x) for x in current)
        if nxt == current:
            return current
        current = nxt


def minimality_check(space: FiniteUltrametricSpace, f: SelfMap) -> MinimalityVerdict:
    """Minimal iff ``f`` is one cycle through every point.

    Otherwise returns a nonempty proper invariant set: the eventual image
    when it is proper, else the orbit of the first point whose orbit is.
    """
    f.check(space)
    n = len(space)
    full = orbit(space, f, 0)
    if full.preperiod == 0 and full.period == n:
        return MinimalityVerdict(True)
    e = eventual_image(space, f)
    if len(e) < n:
        return MinimalityVerdict(False, e)
    for x in space.points:
        o = orbit(space, f, x).points
        if len(o) < n:
            return MinimalityVerdict(False, o)
    raise AssertionError("a map with every orbit full is a single cycle")


def contractive_nonminimality(
    space: FiniteUltrametricSpace,
    f: SelfMap,
    certificate: DeficiencyCertificate | None = None,
) -> MinimalityVerdict:
    """Non-minimality of a certified map, with its eventual image as witness.

    A minimal map on a compact space is surjective; a certified map is not,
    so its eventual image is a proper invariant set.  Raises
    :class:`CertificationError` when no certificate exists.
    """
    if certificate is None:
        certificate = deficiency_certificate(space, f)
    e = eventual_image(space, f)
    if len(e) == len(space):
        raise CertificationError("certificate given for a surjective map")
    return MinimalityVerdict(False, e)
