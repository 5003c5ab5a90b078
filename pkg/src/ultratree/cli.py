"""Command-line interface.

Exit codes: 0 success, 1 a negative result (violation, no certificate,
failed round trip, fuzz disagreement), 2 unreadable or malformed input.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .contraction import (
    CertificationError,
    PartitionFailure,
    SelfMap,
    contractive_ball_partition,
    deficiency_certificate,
    lipschitz_constant,
    radial_report,
    surjectivity_oracle,
)
from .documents import (
    DocumentError,
    SpaceDocument,
    decode_map,
    decode_space,
    decode_tree,
    encode_certificate,
    encode_map,
    encode_space,
    encode_tree,
)
from .dynamics import eventual_image, minimality_check, orbit
from .fuzz import run_fuzz
from .maps import constant_map, identity_map, prepend_map, random_level_contractive, shift_map
from .metric import DistanceLadder, FiniteUltrametricSpace, MalformedInputError, ViolationWitness, check_ball_laws
from .rtree import build_tree, cantor, padic, random_perfect, realize_space

EXIT_OK, EXIT_NEGATIVE, EXIT_BAD_INPUT = 0, 1, 2


class BadInput(Exception):
    pass


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadInput(f"{path}: {exc.strerror}") from None


def _load_space_doc(path: str) -> SpaceDocument:
    try:
        return decode_space(_read(path))
    except DocumentError as exc:
        raise BadInput(f"{path}: {exc}") from None


def _load_space(path: str) -> FiniteUltrametricSpace:
    result = _load_space_doc(path).validate()
    if isinstance(result, ViolationWitness):
        raise BadInput(f"{path}: not an ultrametric ({result.kind} at points {list(result.points)})")
    return result


def _load_map(path: str, space: FiniteUltrametricSpace) -> SelfMap:
    try:
        f = decode_map(_read(path)).to_map()
        f.check(space)
    except (DocumentError, ValueError) as exc:
        raise BadInput(f"{path}: {exc}") from None
    return f


def _load_tree(path: str):
    try:
        return decode_tree(_read(path))
    except DocumentError as exc:
        raise BadInput(f"{path}: {exc}") from None


def cmd_validate(args) -> int:
    doc = _load_space_doc(args.space)
    result = doc.validate()
    if isinstance(result, ViolationWitness):
        print("violation " + result.describe(doc.ladder, doc.points))
        return EXIT_NEGATIVE
    report = check_ball_laws(result)
    print(f"valid ultrametric: {len(result)} points, ladder {result.ladder}")
    for line in report.lines():
        print("  " + line)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_gen(args) -> int:
    if args.kind == "cantor":
        tree = cantor(args.depth)
    elif args.kind == "padic":
        tree = padic(args.p, args.depth)
    else:
        if args.ladder:
            ladder = DistanceLadder(Fraction(v) for v in args.ladder.split(","))
        else:
            ladder = DistanceLadder(Fraction(1, 2**j) for j in range(args.depth))
        tree = random_perfect(ladder, args.max_branching, args.seed)
    if args.as_space:
        sys.stdout.write(encode_space(realize_space(tree)[0]))
    else:
        sys.stdout.write(encode_tree(tree))
    return EXIT_OK


def cmd_gen_map(args) -> int:
    tree = _load_tree(args.tree)
    n = len(tree.leaves)
    if args.kind == "identity":
        f = identity_map(n)
    elif args.kind == "constant":
        f = constant_map(n, args.value)
    elif args.kind == "prepend":
        f = prepend_map(tree, args.value)
    elif args.kind == "shift":
        try:
            f = shift_map(tree)
        except KeyError:
            raise BadInput("shift needs the same branching at every level") from None
    else:
        space, _ = realize_space(tree)
        f, _ = random_level_contractive(space, random.Random(args.seed))
    sys.stdout.write(encode_map(f))
    return EXIT_OK


def cmd_build_tree(args) -> int:
    space = _load_space(args.space)
    tree, iso = build_tree(space)
    if args.check:
        real, real_iso = realize_space(tree)
        ids = [real_iso.point(iso.leaf(x)) for x in space.points]
        ok = all(real.dist(ids[x], ids[y]) == space.dist(x, y) for x in space.points for y in space.points)
        _err("round trip " + ("ok" if ok else "MISMATCH"))
        if not ok:
            return EXIT_NEGATIVE
    sys.stdout.write(encode_tree(tree))
    return EXIT_OK


def cmd_realize(args) -> int:
    tree = _load_tree(args.tree)
    space, _ = realize_space(tree)
    if args.check:
        ok = build_tree(space)[0] == tree
        _err("round trip " + ("ok" if ok else "MISMATCH"))
        if not ok:
            return EXIT_NEGATIVE
    sys.stdout.write(encode_space(space))
    return EXIT_OK


def cmd_analyze(args) -> int:
    space = _load_space(args.space)
    f = _load_map(args.map, space)
    report = radial_report(space, f)
    print(f"points: {len(space)}")
    print(f"lipschitz constant: {lipschitz_constant(space, f)}")
    contractive = report.contractive_points()
    print(f"points with an f-contractive ball: {len(contractive)} of {len(space)}")
    if report.isolated:
        print(f"isolated at resolution: {', '.join(space.labels[x] for x in report.isolated)}")
    part = contractive_ball_partition(space, f)
    if isinstance(part, PartitionFailure):
        print(f"contractive partition: none (fails at {space.labels[part.point]}: {part.reason})")
    else:
        print(f"contractive partition: {len(part)} balls")
        for ball, alpha in part:
            print(f"  {ball.describe()}  radius {space.ladder.value(ball.radius)}  modulus {alpha}")
    return EXIT_OK


def cmd_certify(args) -> int:
    space = _load_space(args.space)
    f = _load_map(args.map, space)
    try:
        cert = deficiency_certificate(space, f)
    except CertificationError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return EXIT_NEGATIVE
    if args.json:
        sys.stdout.write(encode_certificate(cert, space, f))
        return EXIT_OK
    v = space.ladder.value
    print(f"not surjective: coarse value {v(cert.coarse)} ({cert.n_coarse} balls), "
          f"fine value {v(cert.fine)} ({cert.n_fine} balls), image diameter {v(cert.image_diameter)}")
    for b, e in cert.enclosures:
        print(f"  image of {b.describe()} inside {e.describe()}")
    for b, w in zip(cert.missed, cert.witnesses):
        print(f"  missed {b.describe()}  witness {space.labels[w]}")
    return EXIT_OK


def cmd_dynamics(args) -> int:
    space = _load_space(args.space)
    f = _load_map(args.map, space)
    name = lambda xs: "{" + ", ".join(space.labels[x] for x in sorted(xs)) + "}"
    verdict = minimality_check(space, f)
    surjective, _ = surjectivity_oracle(space, f)
    print(f"surjective: {surjective}")
    print(f"minimal: {verdict.minimal}")
    if not verdict.minimal:
        print(f"proper invariant set: {name(verdict.invariant_set)}")
    print(f"eventual image: {name(eventual_image(space, f))}")
    if args.orbit is not None:
        if args.orbit in space.labels:
            x = space.labels.index(args.orbit)
        else:
            try:
                x = int(args.orbit)
                space.labels[x]
            except (ValueError, IndexError):
                raise BadInput(f"unknown point {args.orbit!r}") from None
        rec = orbit(space, f, x)
        print(f"orbit of {space.labels[x]}: {' -> '.join(space.labels[p] for p in rec.iterates)}"
              f" (pre-period {rec.preperiod}, period {rec.period})")
    return EXIT_OK


def cmd_fuzz(args) -> int:
    results = run_fuzz(args.trials, args.seed, args.max_points, args.max_depth, args.jobs)
    bad = 0
    for r in results:
        if args.verbose or not r.ok:
            print(r.line())
        bad += not r.ok
    print(f"fuzz: {len(results)} trials, {sum(r.certified for r in results)} certified, {bad} disagreements")
    return EXIT_OK if bad == 0 else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ultratree", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="validate a space document and check the ball laws")
    s.add_argument("space")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("gen", help="generate a tree document")
    s.add_argument("kind", choices=["cantor", "padic", "random"])
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--ladder", help="comma-separated decreasing rationals (random only)")
    s.add_argument("--max-branching", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--as-space", action="store_true", help="emit the realized space instead of the tree")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("gen-map", help="emit a named map on the leaves of a tree")
    s.add_argument("kind", choices=["identity", "constant", "prepend", "shift", "random-contractive"])
    s.add_argument("tree")
    s.add_argument("--value", type=int, default=0, help="constant value or prepended symbol")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_gen_map)

    s = sub.add_parser("build-tree", help="build the R-tree of a space")
    s.add_argument("space")
    s.add_argument("--check", action="store_true")
    s.set_defaults(func=cmd_build_tree)

    s = sub.add_parser("realize", help="realize the end space of a tree")
    s.add_argument("tree")
    s.add_argument("--check", action="store_true")
    s.set_defaults(func=cmd_realize)

    for name, func, text in [
        ("analyze", cmd_analyze, "Lipschitz constant, radial moduli and contractive partition"),
        ("certify", cmd_certify, "non-surjectivity certificate"),
        ("dynamics", cmd_dynamics, "minimality verdict and invariant sets"),
    ]:
        s = sub.add_parser(name, help=text)
        s.add_argument("space")
        s.add_argument("map")
        if name == "certify":
            s.add_argument("--json", action="store_true")
        if name == "dynamics":
            s.add_argument("--orbit", help="point label or id")
        s.set_defaults(func=func)

    s = sub.add_parser("fuzz", help="certificate-vs-oracle agreement on random perfect truncations")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-points", type=int, default=200)
    s.add_argument("--max-depth", type=int, default=8)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_fuzz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BadInput as exc:
        _err(f"error: {exc}")
        return EXIT_BAD_INPUT
    except (MalformedInputError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
