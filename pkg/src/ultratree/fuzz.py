"""Seeded corpora and the certificate-vs-oracle fuzz driver."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .contraction import (
    CertificationError,
    SelfMap,
    deficiency_certificate,
    surjectivity_oracle,
)
from .dynamics import contractive_nonminimality, minimality_check
from .maps import identity_map, random_level_contractive, random_permutation
from .metric import DistanceLadder, FiniteUltrametricSpace
from .rtree import RTree, random_perfect, realize_space

__all__ = ["TrialResult", "random_ladder", "random_perfect_tree", "run_fuzz", "run_trial", "trial_rng"]


def trial_rng(seed: int, index: int, salt: str = "") -> random.Random:
    return random.Random(f"{salt}{seed}/{index}")


def random_ladder(rng: random.Random, length: int) -> DistanceLadder:
    """Random strictly decreasing ladder of small-denominator rationals."""
    values = [Fraction(rng.randint(1, 9), rng.randint(1, 9))]
    for _ in range(length - 1):
        b = rng.randint(2, 9)
        values.append(values[-1] * Fraction(rng.randint(1, b - 1), b))
    return DistanceLadder(values)


def random_perfect_tree(rng: random.Random, max_points: int = 200, max_depth: int = 8) -> RTree:
    """A perfect truncation with at most ``max_points`` leaves and ``max_depth`` levels."""
    if max_points < 2:
        raise ValueError("a perfect truncation has at least two points")
    top = 1
    while top < max_depth and 2 ** (top + 1) <= max_points:
        top += 1
    depth = rng.randint(1, top)
    branch = 2
    while (branch + 1) ** depth <= max_points:
        branch += 1
    return random_perfect(random_ladder(rng, depth), rng.randint(2, branch), rng.randrange(2**32))


@dataclass(frozen=True)
class TrialResult:
    index: int
    points: int
    depth: int
    certified: bool
    disagreements: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def line(self) -> str:
        status = "ok" if self.ok else "DISAGREE " + "; ".join(self.disagreements)
        return f"trial {self.index}: points={self.points} depth={self.depth} certified={self.certified} {status}"


def _check_positive(space: FiniteUltrametricSpace, f: SelfMap) -> tuple[bool, list[str]]:
    problems = []
    try:
        cert = deficiency_certificate(space, f)
    except CertificationError as exc:
        return False, [f"level-contractive map not certified: {type(exc).__name__}"]
    problems += cert.check(space, f)
    surjective, missed = surjectivity_oracle(space, f)
    if surjective:
        problems.append("oracle says surjective")
    if not set(cert.witnesses) <= set(missed):
        problems.append("witness has a preimage")
    verdict = contractive_nonminimality(space, f, cert)
    e = verdict.invariant_set
    if verdict.minimal or not e or len(e) == len(space) or any(f(x) not in e for x in e):
        problems.append("non-minimality verdict lacks a proper invariant set")
    if minimality_check(space, f).minimal:
        problems.append("certified map reported minimal")
    return True, problems


def _check_negative(space: FiniteUltrametricSpace, f: SelfMap, name: str) -> list[str]:
    try:
        deficiency_certificate(space, f)
    except CertificationError:
        return []
    return [f"false certificate for surjective {name}"]


def run_trial(seed: int, index: int, max_points: int = 200, max_depth: int = 8) -> TrialResult:
    """One random perfect truncation, one constructed contractive map, two surjective controls."""
    rng = trial_rng(seed, index)
    tree = random_perfect_tree(rng, max_points, max_depth)
    space, _ = realize_space(tree)
    f, _level = random_level_contractive(space, rng)
    certified, problems = _check_positive(space, f)
    problems += _check_negative(space, identity_map(len(space)), "identity")
    problems += _check_negative(space, random_permutation(len(space), rng), "permutation")
    return TrialResult(index, len(space), tree.depth, certified, tuple(problems))


def _run_star(args):
    return run_trial(*args)


def run_fuzz(trials: int, seed: int, max_points: int = 200, max_depth: int = 8, jobs: int = 1) -> list[TrialResult]:
    """Run trials ``0..trials-1``; results are ordered by trial index."""
    work = [(seed, i, max_points, max_depth) for i in range(trials)]
    if jobs <= 1:
        return [run_trial(*w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_star, work, chunksize=max(1, trials // (4 * jobs))))
