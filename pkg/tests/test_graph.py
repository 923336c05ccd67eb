import pytest
from hypothesis import given, settings

from mdagkit.graph import (
    ARROW,
    TAIL,
    GraphError,
    MarkedMixedGraph,
    MDag,
    ParseError,
    format_marked,
    format_mdag,
    induced_subgraph,
    maximal_sets,
    parse_marked,
    parse_mdag,
    topological_order,
    validate,
)

from conftest import mdags


def test_parse_basic():
    g = parse_mdag("# comment\nvertices a b c\nedge a b\nface b c  # trailing\n")
    assert g.names == ("a", "b", "c")
    assert g.directed == {("a", "b")}
    assert g.facets == {frozenset("bc")}
    assert g.pa("b") == {"a"} and g.sib("b") == {"c"}


def test_parse_reports_line_and_column():
    with pytest.raises(ParseError) as ei:
        parse_mdag("vertices a b\nedge a z\n")
    assert ei.value.line == 2
    assert ei.value.column is not None


@pytest.mark.parametrize(
    "text",
    [
        "edge a b\n",  # no vertices line
        "vertices a b\nedge a\n",
        "vertices a b\nfrob a b\n",
        "vertices a b\nedge a b\nedge b a\n",
        "vertices a b\nface a\n",
    ],
)
def test_parse_rejects(text):
    with pytest.raises(GraphError):
        parse_mdag(text)


def test_unchecked_parse_then_validate():
    g = parse_mdag("vertices a b c\nedge a b\nedge b a\nface a b c\nface a b\n", check=False)
    problems = validate(g)
    assert any("cycle" in p for p in problems)
    assert any("not maximal" in p for p in problems)


def test_context_rules():
    assert validate(MDag("ab", [("a", "b")], context={"a"}, check=False)) == []
    assert validate(MDag("ab", [("a", "b")], context={"b"}, check=False))
    assert validate(MDag("abc", [], [{"a", "b"}], context={"a"}, check=False))


def test_mdag_equality_ignores_facet_order():
    g = MDag("abc", [("a", "b")], [{"a", "c"}, {"b", "c"}])
    h = MDag("abc", [("a", "b")], [{"c", "b"}, {"c", "a"}])
    assert g == h and hash(g) == hash(h)


def test_relations(fig):
    g = fig["fig1i"]
    assert g.an("e") == {"a", "b", "d", "e"}
    assert g.de("b") == {"b", "d", "e", "f"}
    assert g.dis("e") == {"a", "b", "c", "e"}


def test_maximal_sets():
    out = maximal_sets([{"a", "b"}, {"a", "b", "c"}, {"c", "d"}, {"d"}])
    assert set(out) == {frozenset("abc"), frozenset("cd")}


def test_topological_order_respects_edges(fig):
    g = fig["fig1i"]
    order = topological_order(g)
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[a] < pos[b] for a, b in g.directed)


def test_induced_subgraph_restricts_faces(fig):
    h = induced_subgraph(fig["fig1i"], {"a", "c", "e", "f"})
    assert h.facets == {frozenset("ace")}
    assert h.directed == {("e", "f")}


@given(mdags())
@settings(max_examples=80, deadline=None)
def test_format_roundtrip(g):
    assert parse_mdag(format_mdag(g)) == g


def test_marked_roundtrip():
    m = MarkedMixedGraph.from_edges("abc", directed=[("a", "b")], bidirected=[("b", "c")])
    assert m.mark("a", "b") == ARROW and m.mark("b", "a") == TAIL
    assert m.is_bidirected("b", "c")
    for style in ("mag", "pag"):
        assert parse_marked(format_marked(m, style)) == m
