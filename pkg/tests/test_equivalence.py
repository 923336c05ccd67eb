import random
from itertools import combinations

import pytest
from hypothesis import given, settings

from mdagkit.equivalence import (
    build_pag,
    ci_dag_representable,
    enumerate_class,
    is_ancestral,
    is_maximal,
    markov_equivalent,
    separation_signature,
    skeleton_classes,
)
from mdagkit.graph import ARROW, CIRCLE, TAIL, GraphError, MarkedMixedGraph, MDag
from mdagkit.projection import mag_project

from conftest import mdags


def M(names, directed=(), bidirected=()):
    return MarkedMixedGraph.from_edges(names, directed=directed, bidirected=bidirected)


def test_ancestral():
    assert is_ancestral(M("abc", [("a", "b")], [("b", "c")]))
    # a is an ancestor of its sibling c
    assert not is_ancestral(M("abc", [("a", "b"), ("b", "c")], [("a", "c")]))
    assert not is_ancestral(M("abc", [("a", "b"), ("b", "c"), ("c", "a")]))


def test_maximal():
    assert is_maximal(M("abc", [("a", "b"), ("c", "b")]))
    # a <-> b <-> c <-> d is inducing since b -> d and c -> a
    m = M("abcd", [("b", "d"), ("c", "a")], [("a", "b"), ("b", "c"), ("c", "d")])
    assert is_ancestral(m) and not is_maximal(m)


def test_markov_equivalence_of_chain_and_fork():
    chain = M("abc", [("a", "b"), ("b", "c")])
    fork = M("abc", [("b", "a"), ("b", "c")])
    coll = M("abc", [("a", "b"), ("c", "b")])
    assert markov_equivalent(chain, fork)
    assert not markov_equivalent(chain, coll)


def test_class_of_chain():
    cls = enumerate_class(M("abc", [("a", "b"), ("b", "c")]))
    # every orientation without a collider at b, bidirected ones included
    assert len(cls.members) >= 3
    assert cls.pag.mark("a", "b") == CIRCLE and cls.pag.mark("b", "a") == CIRCLE
    assert len(cls.dag_members()) == 3


def test_class_of_collider_is_fixed_at_heads():
    cls = enumerate_class(M("abc", [("a", "b"), ("c", "b")]))
    assert cls.pag.mark("a", "b") == ARROW and cls.pag.mark("c", "b") == ARROW
    assert cls.pag.mark("b", "a") == CIRCLE


def test_non_mag_input_rejected():
    with pytest.raises(GraphError):
        enumerate_class(M("abcd", [("b", "d"), ("c", "a")], [("a", "b"), ("b", "c"), ("c", "d")]))


def test_edge_cap():
    m = mag_project(MDag("abcde", [(a, b) for a, b in combinations("abcde", 2)]))
    with pytest.raises(GraphError):
        enumerate_class(m, max_edges=5)


def test_dag_representable(fig):
    assert ci_dag_representable(fig["fig2i"]) is not None
    assert ci_dag_representable(fig["fig4i"]) is None
    d = ci_dag_representable(fig["fig3i"])
    assert d.is_dag() and markov_equivalent(d, fig["fig3iii"])


def test_pag_of_fig4i_has_bidirected(fig):
    assert build_pag(fig["fig4i"]).bidirected_edges() == [("b", "c")]


@given(mdags(max_n=5))
@settings(max_examples=30, deadline=None)
def test_pag_marks_shared_by_members(g):
    cls = enumerate_class(mag_project(g))
    for m in cls.members:
        assert markov_equivalent(m, cls.members[0])
        for (x, y), mark in cls.pag.marks.items():
            if mark != CIRCLE:
                assert m.mark(x, y) == mark


@pytest.mark.parametrize("seed", range(6))
def test_skeleton_classes_agree_with_enumeration(seed):
    rng = random.Random(seed)
    names = "abcd"
    edges = [e for e in combinations(names, 2) if rng.random() < 0.6]
    classes = skeleton_classes(names, edges)
    seen = set()
    for cls in classes:
        again = enumerate_class(cls.members[0])
        assert set(again.members) == set(cls.members)
        assert again.pag == cls.pag
        seen.update(cls.members)
    assert len(seen) == sum(len(c.members) for c in classes)


def test_skeleton_classes_empty_edges():
    classes = skeleton_classes("abc", [])
    assert len(classes) == 1 and len(classes[0].members) == 1


def test_signature_keys(fig):
    sig = separation_signature(fig["fig2i"])
    assert set(sig) == {tuple(p) for p in combinations("abcd", 2)}
