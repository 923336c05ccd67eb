import pytest
from hypothesis import given, settings

from mdagkit.generators import all_dags, all_mdags, vertex_names
from mdagkit.graph import GraphError, MDag
from mdagkit.nested import (
    CIStatement,
    IndependenceModel,
    NestedWitness,
    detect_nondag_pattern,
    find_nested_constraints,
    fix_graph,
    fix_sequence,
    reachable_graphs,
)
from mdagkit.separation import m_separated

from conftest import mdags


def test_fix_drops_incoming_and_marks_context(fig):
    h = fix_graph(fig["fig2i"], "c")
    assert h == fig["fig2ii"]
    assert h.context == {"c"} and h.pa("c") == frozenset()


def test_fix_shrinks_facets(fig):
    assert fix_graph(fig["fig1i"], "e") == fig["fig6"]


def test_fix_errors(fig):
    g = fig["fig2i"]
    with pytest.raises(GraphError):
        fix_graph(g, "b")  # d is a descendant in b's district
    with pytest.raises(GraphError):
        fix_graph(g, "zz")
    with pytest.raises(GraphError):
        fix_graph(fix_graph(g, "c"), "c")


def test_fix_sequence_order_matters_only_via_validity(fig):
    g = fig["fig2i"]
    assert fix_sequence(g, ["c", "d"]) == fix_sequence(g, ["d", "c"])


def test_reachable_graphs(fig):
    got = reachable_graphs(fig["fig2i"])
    assert got[0] == ((), fig["fig2i"])
    sigmas = [s for s, _ in got]
    assert ("c",) in sigmas and ("b",) not in sigmas
    assert len({h for _, h in got}) == len(got)
    assert [s for s, _ in reachable_graphs(fig["fig2i"], max_depth=1)] == [s for s in sigmas if len(s) <= 1]


def test_verma_witness(fig):
    ws = find_nested_constraints(fig["fig2i"])
    assert NestedWitness(("c",), frozenset("a"), frozenset("d"), frozenset("c")) in ws
    h = fix_graph(fig["fig2i"], "c")
    assert m_separated(h, "a", "d", "c")
    assert not m_separated(fig["fig2i"], "a", "d", "c")


def test_fig1_witness(fig):
    ws = find_nested_constraints(fig["fig1i"])
    assert NestedWitness(("e",), frozenset("b"), frozenset("f"), frozenset("e")) in ws


def test_witness_dict_and_text():
    w = NestedWitness(("c",), frozenset("a"), frozenset("d"), frozenset("c"))
    assert w.as_dict() == {"sigma": ["c"], "A": ["a"], "B": ["d"], "C": ["c"]}
    assert w.describe() == "X_a ⟂ X_d | X_c after fixing c"


def test_refuses_context_and_large(fig):
    with pytest.raises(GraphError):
        find_nested_constraints(fig["fig2ii"])
    with pytest.raises(GraphError):
        find_nested_constraints(MDag([f"v{i}" for i in range(13)], []))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dags_have_no_nested_constraints(n):
    names = vertex_names(n)
    for edges in all_dags(names):
        assert find_nested_constraints(MDag(names, edges)) == []


@given(mdags(max_n=5))
@settings(max_examples=40, deadline=None)
def test_witness_pairs_are_inseparable_in_g(g):
    for w in find_nested_constraints(g):
        (a,), (b,) = w.A, w.B
        rest = sorted(g.vertex_set - {a, b})
        assert all(
            not m_separated(g, a, b, [v for i, v in enumerate(rest) if mask >> i & 1])
            for mask in range(1 << len(rest))
        )
        assert m_separated(fix_sequence(g, w.sigma), w.A, w.B, w.C)
        assert set(w.sigma) <= w.C


# -- non-DAG pattern detector


def test_detector_on_fixed_verma_graph(fig):
    hit = detect_nondag_pattern(IndependenceModel.from_graph(fig["fig2ii_shape"]))
    assert hit is not None
    m = IndependenceModel.from_graph(fig["fig2ii_shape"])
    assert m.holds(hit.v, hit.s)
    assert m.holds(hit.a, hit.b, hit.D)
    assert not m.holds(hit.a, hit.b, hit.D | {hit.s})


def test_detector_from_statements():
    st = [
        CIStatement(frozenset("b"), frozenset("c")),
        CIStatement(frozenset("a"), frozenset("d"), frozenset("c")),
    ]
    hit = detect_nondag_pattern(IndependenceModel.from_statements("abcd", st))
    assert hit == ("c", "b", "a", "d", frozenset("c"))
    # without the marginal independence there is nothing to report
    assert detect_nondag_pattern(IndependenceModel.from_statements("abcd", st[1:])) is None


def test_detector_silent_on_small_dags():
    for n in (2, 3, 4):
        names = vertex_names(n)
        for edges in all_dags(names):
            assert detect_nondag_pattern(IndependenceModel.from_graph(MDag(names, edges))) is None


def test_detector_fires_after_every_nested_fixing_on_four_vertices():
    count = 0
    for g in all_mdags(4):
        ws = find_nested_constraints(g)
        if not ws:
            continue
        count += 1
        h = fix_sequence(g, ws[0].sigma)
        assert detect_nondag_pattern(IndependenceModel.from_graph(h)) is not None, g
    assert count > 0
