import random
from math import comb

import pytest

from mdagkit.generators import (
    all_dags,
    all_facet_sets,
    all_mdags,
    all_mixed_graphs,
    random_mdag,
    topological_orders,
    vertex_names,
)
from mdagkit.graph import MDag, validate


@pytest.mark.parametrize("n,count", [(1, 1), (2, 3), (3, 25), (4, 543)])
def test_labelled_dag_counts(n, count):
    # OEIS A003024
    assert sum(1 for _ in all_dags(vertex_names(n))) == count


@pytest.mark.parametrize("n,count", [(2, 2), (3, 9), (4, 114)])
def test_facet_set_counts(n, count):
    # antichains of subsets with at least two elements
    assert sum(1 for _ in all_facet_sets(vertex_names(n))) == count


def test_all_mdags_are_valid_and_distinct():
    gs = list(all_mdags(3))
    assert len(gs) == 25 * 9 == len(set(gs))
    assert all(validate(g) == [] for g in gs)


def test_mixed_graph_count():
    assert sum(1 for _ in all_mixed_graphs("abc")) == 4 ** comb(3, 2)


def test_random_mdag_is_seeded_and_valid():
    a = [random_mdag(6, random.Random(1)) for _ in range(3)]
    b = [random_mdag(6, random.Random(1)) for _ in range(3)]
    assert a == b
    rng = random.Random(2)
    assert all(validate(random_mdag(6, rng, p_face=0.8)) == [] for _ in range(200))


def test_topological_orders():
    g = MDag("abc", [("a", "c")])
    assert list(topological_orders(g)) == [("a", "b", "c"), ("a", "c", "b"), ("b", "a", "c")]
