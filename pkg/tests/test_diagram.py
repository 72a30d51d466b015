from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, load_fixture
from morse_extension.diagram import (
    KIND_BY_DEGREE,
    Edge,
    GermDiagram,
    GermError,
    GermSyntaxError,
    Vertex,
    VertexKind,
    export_dot,
    parse_germ,
    serialize_germ,
    validate_germ,
    validate_klein_germ,
)
from morse_extension.oracle import GeneratorParams, random_germ
from morse_extension.search import decide_klein

SPHERE_TEXT = json.dumps(
    {
        "vertices": [{"id": "top", "height": 1, "sign": "+"}, {"id": "bottom", "height": 0, "sign": "-"}],
        "edges": [{"id": "e", "upper": "top", "lower": "bottom"}],
    }
)


def _doc(vertices, edges):
    return json.dumps({"vertices": vertices, "edges": edges})


def shuffled(d: GermDiagram, rng: random.Random) -> GermDiagram:
    vs, es = list(d.vertices), list(d.edges)
    rng.shuffle(vs)
    rng.shuffle(es)
    return GermDiagram(tuple(vs), tuple(es))


def test_parse_smallest_diagram():
    d = parse_germ(SPHERE_TEXT)
    assert [v.id for v in d.vertices] == ["top", "bottom"]
    assert d.kind("top") is VertexKind.MAX
    assert d.kind("bottom") is VertexKind.MIN


def test_equal_heights_rejected():
    text = _doc(
        [{"id": "a", "height": 1, "sign": "+"}, {"id": "b", "height": 1, "sign": "-"}],
        [{"id": "e", "upper": "a", "lower": "b"}],
    )
    with pytest.raises(GermError, match="heights not distinct") as info:
        parse_germ(text)
    assert info.value.invariant == "heights distinct"


def test_path_kinds(path4):
    assert [path4.kind(v.id).value for v in path4.vertices] == ["Max", "Mobius", "Mobius", "Min"]


def test_path_kinds_match_degree_count(path4):
    # hand count of (up, down) degrees for the path: (0,1), (1,1), (1,1), (1,0)
    degrees = [(len(path4.up_edges[v.id]), len(path4.down_edges[v.id])) for v in path4.vertices]
    assert degrees == [(0, 1), (1, 1), (1, 1), (1, 0)]
    assert [KIND_BY_DEGREE[x] for x in degrees] == [path4.kind(v.id) for v in path4.vertices]


def test_syntax_error_reports_position():
    with pytest.raises(GermSyntaxError) as info:
        parse_germ('{\n  "vertices": [\n    {"id": "a",, }\n]}')
    assert info.value.line == 3


@pytest.mark.parametrize(
    "vertices, edges, invariant",
    [
        ([{"id": "a", "height": 1, "sign": "+"}, {"id": "a", "height": 0, "sign": "-"}],
         [{"id": "e", "upper": "a", "lower": "a"}], "vertex ids distinct"),
        ([{"id": "a", "height": 1, "sign": "+"}, {"id": "b", "height": 0, "sign": "-"}],
         [{"id": "e", "upper": "a", "lower": "c"}], "edge endpoints exist"),
        ([{"id": "a", "height": 0, "sign": "+"}, {"id": "b", "height": 1, "sign": "-"}],
         [{"id": "e", "upper": "a", "lower": "b"}], "edge descends"),
        ([{"id": "a", "height": 1, "sign": "+"}, {"id": "b", "height": 0, "sign": "-"}, {"id": "c", "height": 2, "sign": "+"}],
         [{"id": "e", "upper": "a", "lower": "b"}], "vertex degree"),
        ([{"id": "a", "height": 1, "sign": "x"}, {"id": "b", "height": 0, "sign": "-"}],
         [{"id": "e", "upper": "a", "lower": "b"}], "sign"),
        ([{"id": "a", "height": 1, "sign": "+"}, {"id": "b", "height": 0, "sign": "-"}],
         [{"id": "e", "upper": "a", "lower": "b"}, {"id": "e", "upper": "a", "lower": "b"}], "edge ids distinct"),
    ],
)
def test_invariant_violations_named(vertices, edges, invariant):
    with pytest.raises(GermError) as info:
        parse_germ(_doc(vertices, edges))
    assert info.value.invariant == invariant


def test_three_way_split_is_not_a_vertex_kind():
    vertices = [{"id": "t", "height": 3, "sign": "+"}] + [
        {"id": f"m{i}", "height": i, "sign": "-"} for i in range(3)
    ]
    edges = [{"id": f"e{i}", "upper": "t", "lower": f"m{i}"} for i in range(3)]
    with pytest.raises(GermError, match="unsupported degree pattern"):
        parse_germ(_doc(vertices, edges))


def test_unknown_fields_rejected():
    doc = json.loads(SPHERE_TEXT)
    doc["vertices"][0]["colour"] = "red"
    with pytest.raises(GermError, match="unknown fields"):
        parse_germ(json.dumps(doc))
    doc = json.loads(SPHERE_TEXT)
    doc["extra"] = []
    with pytest.raises(GermError, match="unknown top-level"):
        parse_germ(json.dumps(doc))


def test_declared_kind_cross_checked():
    doc = json.loads(SPHERE_TEXT)
    doc["vertices"][0]["kind"] = "Max"
    parse_germ(json.dumps(doc))
    doc["vertices"][0]["kind"] = "Min"
    with pytest.raises(GermError, match="declared kind"):
        parse_germ(json.dumps(doc))


def test_comment_lines_ignored():
    d = parse_germ("# header\n# more\n" + SPHERE_TEXT)
    assert len(d.vertices) == 2


@pytest.mark.parametrize("name", ["sphere", "path4"])
def test_round_trip_fixture(name):
    d = load_fixture(name)
    assert parse_germ(serialize_germ(d)) == d


def test_serialization_is_canonical_under_reordering():
    rng = random.Random(7)
    for seed in range(30):
        d = random_germ(GeneratorParams(seed, 8))
        reference = serialize_germ(d)
        for _ in range(5):
            assert serialize_germ(shuffled(d, rng)) == reference


def test_serialized_order():
    d = random_germ(GeneratorParams(3, 8))
    doc = json.loads(serialize_germ(d))
    heights = [v["height"] for v in doc["vertices"]]
    assert heights == sorted(heights, reverse=True)
    ids = [e["id"] for e in doc["edges"]]
    assert ids == sorted(ids)


@given(st.integers(0, 10_000), st.integers(2, 10), st.randoms(use_true_random=False))
@settings(max_examples=150, deadline=None)
def test_parse_serialize_identity(seed, bound, rng):
    d = random_germ(GeneratorParams(seed, bound))
    # non-integer heights survive the round trip too
    scaled = GermDiagram(tuple(Vertex(v.id, v.height * 0.37 - 1.5, v.sign) for v in d.vertices), d.edges)
    for g in (d, scaled):
        assert parse_germ(serialize_germ(shuffled(g, rng))) == g


@given(st.integers(0, 10_000), st.integers(2, 12))
@settings(max_examples=150, deadline=None)
def test_generated_germs_have_even_euler(seed, bound):
    d = random_germ(GeneratorParams(seed, bound))
    report = validate_germ(d)
    assert report.euler % 2 == 0
    assert report.betti1 >= 0


@given(st.integers(0, 3), st.integers(0, 3))
def test_only_listed_degree_patterns_accepted(up, down):
    # vertex "x" gets the requested degrees towards fresh neighbours
    vertices = [Vertex("x", 0.0, "+")]
    edges = []
    for i in range(up):
        vertices.append(Vertex(f"u{i}", 10.0 + i, "+"))
        edges.append(Edge(f"eu{i}", f"u{i}", "x"))
    for i in range(down):
        vertices.append(Vertex(f"d{i}", -10.0 - i, "-"))
        edges.append(Edge(f"ed{i}", "x", f"d{i}"))
    if (up, down) in KIND_BY_DEGREE:
        d = GermDiagram(tuple(vertices), tuple(edges))
        assert d.kind("x") is KIND_BY_DEGREE[(up, down)]
    else:
        with pytest.raises(GermError):
            GermDiagram(tuple(vertices), tuple(edges))


def test_report_sphere(sphere):
    r = validate_germ(sphere)
    assert (r.euler, r.betti1, r.mobius_count, r.components) == (2, 0, 0, 1)


def test_report_path(path4):
    # euler = 1 + 1 - 2, betti1 = 3 - 4 + 1
    r = validate_germ(path4)
    assert (r.euler, r.betti1, r.mobius_count) == (0, 0, 2)


def test_report_cycle(cycle4):
    # euler = 1 + 1 - 1 - 1, betti1 = 4 - 4 + 1
    r = validate_germ(cycle4)
    assert (r.euler, r.betti1, r.mobius_count) == (0, 1, 0)


def test_klein_validation(sphere, path4, cycle4):
    assert validate_klein_germ(path4)
    assert validate_klein_germ(cycle4)
    check = validate_klein_germ(sphere)
    assert not check
    assert "euler characteristic 2 ≠ 0" in check.failures


@given(st.integers(0, 5_000), st.integers(4, 12), st.sampled_from([0, 2]))
@settings(max_examples=100, deadline=None)
def test_pattern_follows_from_euler_and_connectivity(seed, bound, mobius):
    # degree counting on a connected diagram with euler 0 gives betti1 = 1 - mobius/2
    d = random_germ(GeneratorParams(seed, bound, mobius=mobius, euler=0, connected=True))
    r = validate_germ(d)
    assert r.betti1 == 1 - r.mobius_count // 2
    assert validate_klein_germ(d, strict=True).ok == validate_klein_germ(d, strict=False).ok


@given(st.integers(0, 5_000), st.integers(2, 10), st.booleans())
@settings(max_examples=200, deadline=None)
def test_klein_validation_is_the_stated_formula(seed, bound, strict):
    d = random_germ(GeneratorParams(seed, bound))
    r = validate_germ(d)
    pattern = (r.mobius_count, r.betti1) in ((0, 1), (2, 0))
    expected = r.euler == 0 and r.components == 1 and (pattern or not strict)
    assert bool(validate_klein_germ(d, strict)) == expected


def test_dot_sphere(sphere):
    text = export_dot(sphere)
    assert text.count("->") == 1
    assert '"max" [label="max Max + 1"]' in text


def test_dot_path_witness_labels(path4):
    text = export_dot(decide_klein(path4).witness.extension)
    assert text.count('"(1,1)"') == 1


def test_dot_cycle_witness_labels(cycle4):
    text = export_dot(decide_klein(cycle4).witness.extension)
    assert text.count('label="(0,0)"') == 4


def test_all_fixtures_parse():
    names = sorted(p.stem for p in FIXTURES.glob("*.germ"))
    assert len(names) == 12
    for name in names:
        load_fixture(name)
