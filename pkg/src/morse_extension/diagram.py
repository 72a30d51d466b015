"""Signed Reeb diagrams of Morse germs along closed surfaces.

A germ diagram is a directed graph whose vertices are the critical points of
the boundary function, each carrying its height and the sign of the outward
normal derivative.  Edges run from an upper vertex to a lower one.  Only the
order of heights matters anywhere downstream; equal heights are rejected.

Germ files are JSON documents; full-line ``#`` comments are allowed so that
fixture files can carry a header.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Any, Literal, Union

from .unionfind import UnionFind

if TYPE_CHECKING:
    from .search import ExtensionDiagram

Sign = Literal["+", "-"]


class VertexKind(str, Enum):
    MAX = "Max"
    MIN = "Min"
    DOWN_SADDLE = "DownSaddle"
    UP_SADDLE = "UpSaddle"
    MOBIUS = "Mobius"


# (up-degree, down-degree) -> kind
KIND_BY_DEGREE: dict[tuple[int, int], VertexKind] = {
    (0, 1): VertexKind.MAX,
    (1, 0): VertexKind.MIN,
    (1, 2): VertexKind.DOWN_SADDLE,
    (2, 1): VertexKind.UP_SADDLE,
    (1, 1): VertexKind.MOBIUS,
}


class GermError(ValueError):
    """A germ diagram violates one of its invariants."""

    def __init__(self, message: str, invariant: str | None = None, ident: str | None = None):
        super().__init__(message)
        self.invariant = invariant
        self.ident = ident


class GermSyntaxError(GermError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where, invariant="syntax")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Vertex:
    id: str
    height: float
    sign: Sign


@dataclass(frozen=True)
class Edge:
    id: str
    upper: str
    lower: str


@dataclass(frozen=True)
class GermDiagram:
    """Validated, immutable germ diagram.

    Vertices are stored by decreasing height and edges by id, so two diagrams
    that differ only in list order compare equal.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        vertices = [
            Vertex(v.id, float(v.height), v.sign)
            if isinstance(v.height, int) and not isinstance(v.height, bool)
            else v
            for v in self.vertices
        ]
        object.__setattr__(self, "vertices", tuple(vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        _check_invariants(self)
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices, key=lambda v: -v.height)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))

    @cached_property
    def vertex(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def edge(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def up_edges(self) -> dict[str, tuple[str, ...]]:
        """Edges arriving at each vertex from above, sorted by id."""
        out: dict[str, list[str]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            out[e.lower].append(e.id)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def down_edges(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            out[e.upper].append(e.id)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def kinds(self) -> dict[str, VertexKind]:
        return {
            v.id: KIND_BY_DEGREE[(len(self.up_edges[v.id]), len(self.down_edges[v.id]))]
            for v in self.vertices
        }

    def kind(self, vertex_id: str) -> VertexKind:
        return self.kinds[vertex_id]

    def with_sign(self, vertex_id: str, sign: Sign) -> GermDiagram:
        return GermDiagram(
            tuple(Vertex(v.id, v.height, sign) if v.id == vertex_id else v for v in self.vertices),
            self.edges,
        )


def _check_invariants(d: GermDiagram) -> None:
    ids: set[str] = set()
    for v in d.vertices:
        if not isinstance(v.id, str) or not v.id:
            raise GermError(f"vertex id must be a non-empty string: {v.id!r}", "vertex ids", str(v.id))
        if v.id in ids:
            raise GermError(f"duplicate vertex id {v.id!r}", "vertex ids distinct", v.id)
        ids.add(v.id)
        if isinstance(v.height, bool) or not isinstance(v.height, (int, float)) or not math.isfinite(v.height):
            raise GermError(f"vertex {v.id!r}: height must be a finite number", "height", v.id)
        if v.sign not in ("+", "-"):
            raise GermError(f"vertex {v.id!r}: sign must be '+' or '-'", "sign", v.id)
    heights = Counter(v.height for v in d.vertices)
    for v in d.vertices:
        if heights[v.height] > 1:
            raise GermError(f"heights not distinct: {v.height} repeated", "heights distinct", v.id)

    edge_ids: set[str] = set()
    for e in d.edges:
        if not isinstance(e.id, str) or not e.id:
            raise GermError(f"edge id must be a non-empty string: {e.id!r}", "edge ids", str(e.id))
        if e.id in edge_ids:
            raise GermError(f"duplicate edge id {e.id!r}", "edge ids distinct", e.id)
        edge_ids.add(e.id)
        for end in (e.upper, e.lower):
            if end not in ids:
                raise GermError(f"edge {e.id!r} references unknown vertex {end!r}", "edge endpoints exist", e.id)
    heights_by_id = {v.id: v.height for v in d.vertices}
    for e in d.edges:
        if heights_by_id[e.upper] <= heights_by_id[e.lower]:
            raise GermError(
                f"edge {e.id!r}: upper vertex {e.upper!r} is not above lower vertex {e.lower!r}",
                "edge descends",
                e.id,
            )

    up = Counter(e.lower for e in d.edges)
    down = Counter(e.upper for e in d.edges)
    for v in d.vertices:
        degree = (up[v.id], down[v.id])
        if degree not in KIND_BY_DEGREE:
            what = "isolated vertex" if degree == (0, 0) else f"unsupported degree pattern (up={degree[0]}, down={degree[1]})"
            raise GermError(f"vertex {v.id!r}: {what}", "vertex degree", v.id)


# --------------------------------------------------------------------------
# germ files

_VERTEX_FIELDS = {"id", "height", "sign", "kind"}
_EDGE_FIELDS = {"id", "upper", "lower"}
_COMMENT_LINE = re.compile(r"^\s*#.*$", re.MULTILINE)


def strip_comments(text: str) -> str:
    """Blank out full-line ``#`` comments, keeping line numbers intact."""
    return _COMMENT_LINE.sub("", text)


def load_json_document(text: str) -> Any:
    try:
        return json.loads(strip_comments(text))
    except json.JSONDecodeError as exc:
        raise GermSyntaxError(exc.msg, exc.lineno, exc.colno) from None


def parse_germ(text: str) -> GermDiagram:
    return germ_from_json(load_json_document(text))


def germ_from_json(doc: Any) -> GermDiagram:
    if not isinstance(doc, dict):
        raise GermError("germ document must be an object", "schema")
    extra = set(doc) - {"vertices", "edges"}
    if extra:
        raise GermError(f"unknown top-level fields: {sorted(extra)}", "schema")
    for key in ("vertices", "edges"):
        if not isinstance(doc.get(key), list):
            raise GermError(f"{key!r} must be an array", "schema")

    vertices = []
    declared: dict[str, str] = {}
    for i, item in enumerate(doc["vertices"]):
        if not isinstance(item, dict):
            raise GermError(f"vertices[{i}] must be an object", "schema")
        extra = set(item) - _VERTEX_FIELDS
        if extra:
            raise GermError(f"vertices[{i}]: unknown fields {sorted(extra)}", "schema", item.get("id"))
        missing = {"id", "height", "sign"} - set(item)
        if missing:
            raise GermError(f"vertices[{i}]: missing fields {sorted(missing)}", "schema", item.get("id"))
        height = item["height"]
        if isinstance(height, bool) or not isinstance(height, (int, float)):
            raise GermError(f"vertices[{i}]: height must be a number", "schema", item.get("id"))
        vertices.append(Vertex(item["id"], float(height), item["sign"]))
        if "kind" in item:
            declared[item["id"]] = item["kind"]

    edges = []
    for i, item in enumerate(doc["edges"]):
        if not isinstance(item, dict):
            raise GermError(f"edges[{i}] must be an object", "schema")
        if set(item) != _EDGE_FIELDS:
            raise GermError(
                f"edges[{i}]: fields must be exactly {sorted(_EDGE_FIELDS)}, got {sorted(item)}",
                "schema",
                item.get("id"),
            )
        edges.append(Edge(item["id"], item["upper"], item["lower"]))

    d = GermDiagram(tuple(vertices), tuple(edges))
    for vid, kind in declared.items():
        if kind != d.kind(vid).value:
            raise GermError(
                f"vertex {vid!r}: declared kind {kind!r} but degrees give {d.kind(vid).value!r}",
                "declared kind",
                vid,
            )
    return d


def germ_to_json(d: GermDiagram) -> dict[str, Any]:
    return {
        "vertices": [
            {"id": v.id, "height": _json_height(v.height), "sign": v.sign, "kind": d.kind(v.id).value}
            for v in d.vertices
        ],
        "edges": [{"id": e.id, "upper": e.upper, "lower": e.lower} for e in d.edges],
    }


def _json_height(h: float) -> int | float:
    return int(h) if h.is_integer() else h


def serialize_germ(d: GermDiagram) -> str:
    return json.dumps(germ_to_json(d), indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class GermReport:
    euler: int
    betti1: int
    mobius_count: int
    components: int
    kind_counts: dict[str, int] = field(default_factory=dict)

    def lines(self) -> list[str]:
        counts = ", ".join(f"{k}={n}" for k, n in self.kind_counts.items())
        return [
            f"euler characteristic: {self.euler}",
            f"betti1: {self.betti1}",
            f"mobius points: {self.mobius_count}",
            f"components: {self.components}",
            f"vertex kinds: {counts}",
        ]


def count_components(d: GermDiagram) -> int:
    uf = UnionFind(v.id for v in d.vertices)
    for e in d.edges:
        uf.union(e.upper, e.lower)
    return uf.count()


def validate_germ(d: GermDiagram) -> GermReport:
    counts = Counter(d.kinds.values())
    components = count_components(d)
    euler = (
        counts[VertexKind.MAX]
        + counts[VertexKind.MIN]
        - counts[VertexKind.DOWN_SADDLE]
        - counts[VertexKind.UP_SADDLE]
        - counts[VertexKind.MOBIUS]
    )
    return GermReport(
        euler=euler,
        betti1=len(d.edges) - len(d.vertices) + components,
        mobius_count=counts[VertexKind.MOBIUS],
        components=components,
        kind_counts={k.value: counts[k] for k in VertexKind},
    )


@dataclass(frozen=True)
class KleinCheck:
    ok: bool
    report: GermReport
    failures: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def klein_pattern_holds(report: GermReport) -> bool:
    return (report.mobius_count == 0 and report.betti1 == 1) or (
        report.mobius_count == 2 and report.betti1 == 0
    )


def validate_klein_germ(d: GermDiagram, strict: bool = True) -> KleinCheck:
    """Necessary conditions for ``d`` to be a germ along a Klein bottle.

    With ``strict`` off, a failed Möbius/loop pattern is only a warning; the
    Euler characteristic and connectivity are always enforced.
    """
    report = validate_germ(d)
    failures = []
    warnings = []
    if report.euler != 0:
        failures.append(f"euler characteristic {report.euler} ≠ 0")
    if report.components != 1:
        failures.append(f"diagram not connected ({report.components} components)")
    if not klein_pattern_holds(report):
        msg = (
            f"Möbius/loop pattern (mobius={report.mobius_count}, betti1={report.betti1}) is neither "
            "(mobius=0, betti1=1) nor (mobius=2, betti1=0) [partially proven condition]"
        )
        (failures if strict else warnings).append(msg)
    return KleinCheck(not failures, report, tuple(failures), tuple(warnings))


# --------------------------------------------------------------------------
# DOT export


def _q(text: object) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_height(h: float) -> str:
    return str(int(h)) if float(h).is_integer() else repr(h)


def export_dot(d: Union[GermDiagram, "ExtensionDiagram"]) -> str:
    lines = []
    if isinstance(d, GermDiagram):
        lines.append("digraph germ {")
        for v in d.vertices:
            label = f"{v.id} {d.kind(v.id).value} {v.sign} {_fmt_height(v.height)}"
            lines.append(f"  {_q(v.id)} [label={_q(label)}];")
        for e in d.edges:
            lines.append(f"  {_q(e.upper)} -> {_q(e.lower)} [label={_q(e.id)}];")
    else:
        lines.append("digraph extension {")
        for v in d.vertices:
            label = f"{v.id} {v.event} {_fmt_height(v.height)}"
            lines.append(f"  {_q(v.id)} [label={_q(label)}];")
        for e in d.edges:
            label = f"({e.cls.g},{e.cls.o})"
            lines.append(f"  {_q(e.upper)} -> {_q(e.lower)} [label={_q(label)}, id={_q(e.id)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
