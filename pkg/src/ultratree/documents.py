"""JSON documents for spaces, trees, maps and certificates.

Encodings are canonical: sorted keys, no insignificant whitespace, a
trailing newline, rationals as lowest-terms strings and distances as ladder
indices (``-1`` for ZERO).  Decoding reports the offending field (or the
JSON line and column) but leaves metric validation to the validators.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from . import __version__
from .contraction import DeficiencyCertificate, SelfMap
from .metric import (
    ZERO,
    Ball,
    Dist,
    DistanceLadder,
    FiniteUltrametricSpace,
    MalformedInputError,
    ViolationWitness,
    validate_ultrametric,
)
from .rtree import RTree

__all__ = [
    "CertificateDocument",
    "DocumentError",
    "MapDocument",
    "SpaceDocument",
    "TreeDocument",
    "decode_certificate",
    "decode_map",
    "decode_space",
    "decode_tree",
    "digest",
    "encode_certificate",
    "encode_map",
    "encode_space",
    "encode_tree",
]


class DocumentError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise DocumentError(where or "document", "expected a JSON object")
    if key not in obj:
        raise DocumentError(f"{where}.{key}" if where else key, "missing field")
    return obj[key]


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(where, f"expected an integer, got {value!r}")
    return value


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise DocumentError(where, f"expected a list, got {type(value).__name__}")
    return value


def _rational(value: Any, where: str) -> Fraction:
    if not isinstance(value, str):
        raise DocumentError(where, f"rationals are strings such as \"1/2\", got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise DocumentError(where, f"not a rational: {value!r}") from None


def _ladder(raw: Any, where: str) -> DistanceLadder:
    values = [_rational(v, f"{where}[{i}]") for i, v in enumerate(_list(raw, where))]
    try:
        return DistanceLadder(values)
    except MalformedInputError as exc:
        raise DocumentError(where, str(exc)) from None


def _encode_ladder(ladder: DistanceLadder) -> list[str]:
    return [str(v) for v in ladder.values]


@dataclass(frozen=True)
class SpaceDocument:
    ladder: DistanceLadder
    points: tuple[str, ...]
    dist: tuple[tuple[int, ...], ...]

    @classmethod
    def from_space(cls, space: FiniteUltrametricSpace) -> SpaceDocument:
        return cls(space.ladder, space.labels, tuple(tuple(r) for r in space.matrix()))

    def validate(self) -> FiniteUltrametricSpace | ViolationWitness:
        return validate_ultrametric(self.points, self.ladder, self.dist)


def encode_space(doc: SpaceDocument | FiniteUltrametricSpace) -> str:
    if isinstance(doc, FiniteUltrametricSpace):
        doc = SpaceDocument.from_space(doc)
    return _dump(
        {
            "dist": [list(r) for r in doc.dist],
            "ladder": _encode_ladder(doc.ladder),
            "points": list(doc.points),
        }
    )


def decode_space(text: str) -> SpaceDocument:
    obj = _load(text)
    ladder = _ladder(_field(obj, "ladder", ""), "ladder")
    points = _list(_field(obj, "points", ""), "points")
    for i, p in enumerate(points):
        if not isinstance(p, str):
            raise DocumentError(f"points[{i}]", f"labels are strings, got {p!r}")
    rows = _list(_field(obj, "dist", ""), "dist")
    n = len(points)
    if n == 0:
        raise DocumentError("points", "a space needs at least one point")
    if len(rows) != n:
        raise DocumentError("dist", f"{len(rows)} rows for {n} points")
    m = len(ladder)
    dist = []
    for i, row in enumerate(rows):
        row = _list(row, f"dist[{i}]")
        if len(row) != n:
            raise DocumentError(f"dist[{i}]", f"{len(row)} entries for {n} points")
        out = []
        for j, e in enumerate(row):
            k = _int(e, f"dist[{i}][{j}]")
            if not -1 <= k < m:
                raise DocumentError(f"dist[{i}][{j}]", f"index {k} out of range for a ladder of length {m}")
            out.append(k)
        dist.append(tuple(out))
    return SpaceDocument(ladder, tuple(points), tuple(dist))


@dataclass(frozen=True)
class TreeDocument:
    tree: RTree


def encode_tree(tree: RTree | TreeDocument) -> str:
    if isinstance(tree, TreeDocument):
        tree = tree.tree

    def node(path: tuple[int, ...]) -> dict:
        k = tree.child_count(path) if len(path) < tree.depth else 0
        return {
            "children": {str(c): node(path + (c,)) for c in range(k)},
            "level_index": len(path) - 1,
        }

    return _dump({"ladder": _encode_ladder(tree.ladder), "root": node(())})


def decode_tree(text: str) -> RTree:
    obj = _load(text)
    ladder = _ladder(_field(obj, "ladder", ""), "ladder")
    leaves: list[tuple[int, ...]] = []

    def walk(raw: Any, path: tuple[int, ...], where: str) -> None:
        level = _int(_field(raw, "level_index", where), f"{where}.level_index")
        if level != len(path) - 1:
            raise DocumentError(f"{where}.level_index", f"expected {len(path) - 1}, got {level}")
        children = _field(raw, "children", where)
        if not isinstance(children, dict):
            raise DocumentError(f"{where}.children", "expected an object keyed by child label")
        if not children:
            leaves.append(path)
            return
        for key in children:
            if not key.isdigit():
                raise DocumentError(f"{where}.children", f"child label {key!r} is not a natural number")
        for key in sorted(children, key=int):
            walk(children[key], path + (int(key),), f"{where}.children.{key}")

    walk(_field(obj, "root", ""), (), "root")
    try:
        return RTree(ladder, leaves)
    except MalformedInputError as exc:
        raise DocumentError("root", str(exc)) from None


@dataclass(frozen=True)
class MapDocument:
    targets: tuple[int, ...]

    def to_map(self) -> SelfMap:
        return SelfMap(self.targets)


def encode_map(f: SelfMap | MapDocument) -> str:
    return _dump({"targets": list(f.targets)})


def decode_map(text: str) -> MapDocument:
    obj = _load(text)
    raw = _list(_field(obj, "targets", ""), "targets")
    targets = tuple(_int(t, f"targets[{i}]") for i, t in enumerate(raw))
    for i, t in enumerate(targets):
        if t < 0:
            raise DocumentError(f"targets[{i}]", f"negative point id {t}")
    return MapDocument(targets)


@dataclass(frozen=True)
class CertificateDocument:
    certificate: DeficiencyCertificate
    space_sha256: str
    map_sha256: str
    tool_version: str = __version__


def _dist_index(d: Dist) -> int:
    return -1 if d.is_zero else d.index


def encode_certificate(
    cert: DeficiencyCertificate | CertificateDocument,
    space: FiniteUltrametricSpace | None = None,
    f: SelfMap | None = None,
) -> str:
    """Serialize a certificate together with digests of its inputs."""
    if isinstance(cert, DeficiencyCertificate):
        if space is None or f is None:
            raise ValueError("a bare certificate needs the space and map it certifies")
        cert = CertificateDocument(cert, digest(encode_space(space)), digest(encode_map(f)))
    c = cert.certificate
    ladder = c.enclosures[0][0].space.ladder
    body = {
        "coarse_index": _dist_index(c.coarse),
        "coarse_value": str(ladder.value(c.coarse)),
        "enclosures": [
            {"coarse": b.sorted_members(), "fine": e.sorted_members()} for b, e in c.enclosures
        ],
        "fine_index": _dist_index(c.fine),
        "fine_value": str(ladder.value(c.fine)),
        "image_diameter_index": _dist_index(c.image_diameter),
        "image_diameter_value": str(ladder.value(c.image_diameter)),
        "missed": [b.sorted_members() for b in c.missed],
        "missed_names": [b.describe() for b in c.missed],
        "n_coarse": c.n_coarse,
        "n_fine": c.n_fine,
        "witnesses": list(c.witnesses),
    }
    return _dump(
        {
            "certificate": body,
            "inputs": {"map_sha256": cert.map_sha256, "space_sha256": cert.space_sha256},
            "tool": "ultratree",
            "version": cert.tool_version,
        }
    )


def decode_certificate(text: str, space: FiniteUltrametricSpace) -> CertificateDocument:
    """Rebuild a certificate against the space it was issued for."""
    obj = _load(text)
    body = _field(obj, "certificate", "")
    inputs = _field(obj, "inputs", "")
    m = len(space.ladder)
    n = len(space)

    def dist(key: str) -> Dist:
        k = _int(_field(body, key, "certificate"), f"certificate.{key}")
        if not -1 <= k < m:
            raise DocumentError(f"certificate.{key}", f"index {k} out of range")
        return ZERO if k == -1 else Dist(k)

    def ball(raw: Any, radius: Dist, where: str) -> Ball:
        ids = [_int(x, f"{where}[{i}]") for i, x in enumerate(_list(raw, where))]
        if not ids or any(not 0 <= x < n for x in ids):
            raise DocumentError(where, "ball members must be nonempty valid point ids")
        return Ball(space, min(ids), radius, frozenset(ids))

    coarse, fine = dist("coarse_index"), dist("fine_index")
    enclosures = []
    for i, e in enumerate(_list(_field(body, "enclosures", "certificate"), "certificate.enclosures")):
        where = f"certificate.enclosures[{i}]"
        enclosures.append(
            (ball(_field(e, "coarse", where), coarse, f"{where}.coarse"), ball(_field(e, "fine", where), fine, f"{where}.fine"))
        )
    missed = tuple(
        ball(b, fine, f"certificate.missed[{i}]")
        for i, b in enumerate(_list(_field(body, "missed", "certificate"), "certificate.missed"))
    )
    witnesses = tuple(
        _int(w, f"certificate.witnesses[{i}]")
        for i, w in enumerate(_list(_field(body, "witnesses", "certificate"), "certificate.witnesses"))
    )
    cert = DeficiencyCertificate(
        coarse=coarse,
        fine=fine,
        image_diameter=dist("image_diameter_index"),
        n_coarse=_int(_field(body, "n_coarse", "certificate"), "certificate.n_coarse"),
        n_fine=_int(_field(body, "n_fine", "certificate"), "certificate.n_fine"),
        enclosures=tuple(enclosures),
        missed=missed,
        witnesses=witnesses,
    )
    version = _field(obj, "version", "")
    return CertificateDocument(
        cert,
        space_sha256=_field(inputs, "space_sha256", "inputs"),
        map_sha256=_field(inputs, "map_sha256", "inputs"),
        tool_version=version,
    )
