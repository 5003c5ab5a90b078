"""Acceptance criteria: one pass/fail line per criterion in the terminal summary.

Corpora are seeded and built once per module; timings cover the checking
work only, not corpus generation.
"""

import random
import time

import pytest

from ultratree import (
    InsufficientDepth,
    NotContractive,
    ViolationWitness,
    banach_fixed_point,
    build_tree,
    cantor,
    check_ball_laws,
    contractive_ball_partition,
    contractive_nonminimality,
    deficiency_certificate,
    lipschitz_constant,
    minimality_check,
    realize_space,
    shrink_check,
    surjectivity_oracle,
    validate_ultrametric,
)
from ultratree.contraction import ContractivePartition, SelfMap
from ultratree.fuzz import random_ladder, random_perfect_tree, trial_rng
from ultratree.maps import identity_map, prepend_map, random_level_contractive, shift_map
from ultratree.metric import DistanceLadder
from ultratree.rtree import random_tree

import conftest
import oracles

SEED = 20240601


def record(number, title, ok, detail):
    conftest.ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")


def corpus(n, salt):
    out = []
    for i in range(n):
        rng = trial_rng(SEED, i, salt)
        out.append((rng, realize_space(random_perfect_tree(rng, 200, 8))[0]))
    return out


@pytest.fixture(scope="module")
def axiom_corpus():
    return corpus(1000, "axioms:")


@pytest.fixture(scope="module")
def contractive_corpus():
    """500 perfect truncations, each with a constructed level-contractive map."""
    out = []
    for rng, space in corpus(500, "contractive:"):
        f, level = random_level_contractive(space, rng)
        out.append((space, f, level))
    return out


@pytest.fixture(scope="module")
def certified(contractive_corpus):
    results = []
    for space, f, _ in contractive_corpus:
        try:
            results.append((space, f, deficiency_certificate(space, f)))
        except (NotContractive, InsufficientDepth) as exc:
            results.append((space, f, exc))
    return results


def corrupt(space, rng):
    """Change exactly one cell of the index matrix."""
    matrix = space.matrix()
    n, m = len(space), len(space.ladder)
    x, y = rng.randrange(n), rng.randrange(n)
    old = matrix[x][y]
    matrix[x][y] = rng.choice([k for k in range(-1, m) if k != old] or [0])
    return matrix


def test_1_axiom_fuzz(axiom_corpus):
    start = time.perf_counter()
    valid_misses = corrupt_misses = 0
    for rng, space in axiom_corpus:
        rebuilt = validate_ultrametric(space.labels, space.ladder, space.matrix())
        if isinstance(rebuilt, ViolationWitness) or not check_ball_laws(rebuilt).ok:
            valid_misses += 1
        matrix = corrupt(space, rng)
        w = validate_ultrametric(space.labels, space.ladder, matrix)
        if not isinstance(w, ViolationWitness) or not w.reproduces(space.ladder, matrix):
            corrupt_misses += 1
    elapsed = time.perf_counter() - start
    ok = valid_misses == 0 and corrupt_misses == 0 and elapsed < 10
    record(1, "axiom fuzz", ok,
           f"{len(axiom_corpus)} valid ({valid_misses} misses), {len(axiom_corpus)} corrupted "
           f"({corrupt_misses} misses), {elapsed:.2f}s (limit 10s)")
    assert ok


def round_trip_spaces():
    """Perfect, chain-bearing and label-shuffled spaces."""
    for i in range(500):
        rng = trial_rng(SEED, i, "iso:")
        kind = i % 3
        if kind == 0:
            space = realize_space(random_perfect_tree(rng, 200, 8))[0]
        else:
            ladder = random_ladder(rng, rng.randint(1, 6))
            space = realize_space(random_tree(ladder, 3, rng.randrange(2**32)))[0]
        if kind == 2:
            perm = list(space.points)
            rng.shuffle(perm)
            matrix = space.matrix()
            space = validate_ultrametric(
                [space.labels[p] for p in perm], space.ladder, [[matrix[a][b] for b in perm] for a in perm]
            )
        yield space


def test_2_isometry_round_trip():
    mismatches = total = 0
    for space in round_trip_spaces():
        total += 1
        tree, iso = build_tree(space)
        real, real_iso = realize_space(tree)
        ids = [real_iso.point(iso.leaf(x)) for x in space.points]
        d0 = oracles.value_matrix(space)
        d1 = oracles.value_matrix(real)
        if any(d1[ids[x]][ids[y]] != d0[x][y] for x in space.points for y in space.points):
            mismatches += 1
        elif build_tree(real)[0] != tree:
            mismatches += 1
    ok = mismatches == 0
    record(2, "isometry round trip", ok, f"{total} spaces, {mismatches} mismatches")
    assert ok


def test_3_contractive_maps_not_surjective(certified):
    start = time.perf_counter()
    disagreements = []
    for i, (space, f, cert) in enumerate(certified):
        if isinstance(cert, Exception):
            disagreements.append(f"#{i}: {type(cert).__name__}")
            continue
        surjective, missed = surjectivity_oracle(space, f)
        image = oracles.image(list(f.targets))
        if surjective or any(w in image for w in cert.witnesses) or not set(cert.witnesses) <= set(missed):
            disagreements.append(f"#{i}: oracle disagrees")
    elapsed = time.perf_counter() - start
    # certification time is included: rerun it under the clock
    t0 = time.perf_counter()
    for space, f, _ in certified:
        try:
            deficiency_certificate(space, f)
        except (NotContractive, InsufficientDepth):
            pass
    elapsed += time.perf_counter() - t0
    ok = not disagreements and elapsed < 60
    record(3, "level-contractive maps certified", ok,
           f"{len(certified)} maps, {len(disagreements)} disagreements, {elapsed:.2f}s (limit 60s)")
    assert ok, disagreements[:5]


def test_4_negative_controls(axiom_corpus, contractive_corpus):
    false_certs = []
    for m in range(2, 11):
        space = realize_space(cantor(m))[0]
        f = shift_map(cantor(m))
        surjective, _ = surjectivity_oracle(space, f)
        try:
            deficiency_certificate(space, f)
            false_certs.append(f"shift m={m}")
        except NotContractive:
            pass
        except InsufficientDepth:
            false_certs.append(f"shift m={m}: InsufficientDepth")
        if not surjective:
            false_certs.append(f"shift m={m} not surjective")
    spaces = [s for _, s in axiom_corpus] + [s for s, _, _ in contractive_corpus]
    for j, space in enumerate(spaces):
        try:
            deficiency_certificate(space, identity_map(len(space)))
            false_certs.append(f"identity on space {j}")
        except NotContractive:
            pass
    ok = not false_certs
    record(4, "negative controls", ok,
           f"shift on cantor(2..10), identity on {len(spaces)} spaces, {len(false_certs)} false certificates")
    assert ok, false_certs[:5]


def test_5_shrink_check(contractive_corpus):
    found = failures = 0
    for space, f, _ in contractive_corpus:
        part = contractive_ball_partition(space, f)
        if not isinstance(part, ContractivePartition):
            continue
        found += 1
        if not shrink_check(space, f, part).ok:
            failures += 1
    ok = failures == 0 and found > 0
    record(5, "shrink check", ok, f"{found} contractive partitions checked, {failures} failures")
    assert ok


def test_6_nonminimality(certified):
    bad = 0
    n_cert = 0
    for space, f, cert in certified:
        if isinstance(cert, Exception):
            continue
        n_cert += 1
        v = contractive_nonminimality(space, f, cert)
        e = v.invariant_set
        if v.minimal or not e or len(e) >= len(space) or any(f(x) not in e for x in e):
            bad += 1
    rng = random.Random(SEED)
    wrong_minimal = 0
    for _ in range(1000):
        n = rng.randint(1, 12)
        space = validate_ultrametric(
            [str(i) for i in range(n)], DistanceLadder([1]), [[-1 if i == j else 0 for j in range(n)] for i in range(n)]
        )
        perm = list(range(n))
        rng.shuffle(perm)
        f = SelfMap(perm)
        full_cycle = len(oracles_orbit(perm, 0)) == n
        if minimality_check(space, f).minimal != full_cycle:
            wrong_minimal += 1
    ok = bad == 0 and wrong_minimal == 0 and n_cert > 0
    record(6, "non-minimality", ok,
           f"{n_cert} certified maps, {bad} without a proper invariant set; "
           f"1000 permutations, {wrong_minimal} misclassified")
    assert ok


def oracles_orbit(perm, x):
    seen = [x]
    while perm[seen[-1]] != x:
        seen.append(perm[seen[-1]])
    return seen


def test_7_banach(axiom_corpus, contractive_corpus):
    cases = [(s, f) for s, f, _ in contractive_corpus]
    for i in range(200):
        rng = trial_rng(SEED, i, "banach:")
        tree = random_perfect_tree(rng, 200, 8)
        cases.append((realize_space(tree)[0], prepend_map(tree, rng.randrange(2))))
    checked = failures = 0
    rng = random.Random(SEED)
    for space, f in cases:
        if lipschitz_constant(space, f) >= 1:
            continue
        checked += 1
        targets = list(f.targets)
        fixed = [x for x in space.points if targets[x] == x]
        if len(fixed) != 1:
            failures += 1
            continue
        for start in rng.sample(range(len(space)), min(3, len(space))):
            report = banach_fixed_point(space, f, start)
            if report.fixed_point != fixed[0] or len(report.trace) - 1 > len(space):
                failures += 1
                break
    ok = failures == 0 and checked > 0
    record(7, "Banach sanity", ok, f"{checked} maps with Lipschitz < 1, {failures} failures")
    assert ok


def test_8_pigeonhole(certified):
    bad = []
    n_cert = 0
    for i, (space, f, cert) in enumerate(certified):
        if isinstance(cert, Exception):
            continue
        n_cert += 1
        d = oracles.value_matrix(space)
        targets = list(f.targets)
        problems = cert.check(space, f)
        if not len(cert.missed) >= cert.n_fine - cert.n_coarse >= 1:
            problems.append("counts")
        for b, e in cert.enclosures:
            if not {targets[x] for x in b.members} <= set(e.members):
                problems.append("enclosure")
        if cert.n_coarse != len(oracles.threshold_classes(d, space.ladder.value(cert.coarse))):
            problems.append("n_coarse")
        if cert.n_fine != len(oracles.threshold_classes(d, space.ladder.value(cert.fine))):
            problems.append("n_fine")
        if problems:
            bad.append((i, problems))
    ok = not bad and n_cert > 0
    record(8, "pigeonhole arithmetic", ok, f"{n_cert} certificates re-verified, {len(bad)} with problems")
    assert ok, bad[:5]
