"""Exhaustive and random generation of small graphs."""

from __future__ import annotations

import random
from itertools import combinations, product
from typing import Iterator, Sequence

from .graph import ARROW, TAIL, MDag, MarkedMixedGraph

__all__ = [
    "vertex_names",
    "all_dags",
    "all_facet_sets",
    "all_mdags",
    "random_mdag",
    "all_mixed_graphs",
    "topological_orders",
]


def vertex_names(n: int) -> tuple[str, ...]:
    return tuple("abcdefghijklmnopqrstuvwxyz"[:n]) if n <= 26 else tuple(f"v{i}" for i in range(n))


def all_dags(names: Sequence[str]) -> Iterator[frozenset[tuple[str, str]]]:
    """Every acyclic directed edge set over ``names``."""
    pairs = list(combinations(names, 2))
    idx = {v: i for i, v in enumerate(names)}
    for choice in product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), c in zip(pairs, choice):
            if c == 1:
                edges.append((a, b))
            elif c == 2:
                edges.append((b, a))
        if _acyclic(len(names), [(idx[a], idx[b]) for a, b in edges]):
            yield frozenset(edges)


def _acyclic(n: int, edges: list[tuple[int, int]]) -> bool:
    pa = [0] * n
    for a, b in edges:
        pa[b] |= 1 << a
    done = 0
    while done != (1 << n) - 1:
        ready = [v for v in range(n) if not (done >> v) & 1 and pa[v] & ~done == 0]
        if not ready:
            return False
        for v in ready:
            done |= 1 << v
    return True


def all_facet_sets(names: Sequence[str]) -> Iterator[frozenset[frozenset[str]]]:
    """Every antichain of subsets of size >= 2, i.e. every simplicial complex
    given by its facets."""
    subsets = [frozenset(c) for k in range(2, len(names) + 1) for c in combinations(names, k)]

    def rec(i: int, chosen: list[frozenset[str]]):
        if i == len(subsets):
            yield frozenset(chosen)
            return
        yield from rec(i + 1, chosen)
        s = subsets[i]
        if all(not (s <= c or c <= s) for c in chosen):
            yield from rec(i + 1, chosen + [s])

    yield from rec(0, [])


def all_mdags(n: int) -> Iterator[MDag]:
    names = vertex_names(n)
    facet_sets = list(all_facet_sets(names))
    for edges in all_dags(names):
        for facets in facet_sets:
            yield MDag(names, edges, facets, check=False)


def random_mdag(
    n: int,
    rng: random.Random,
    p_edge: float = 0.35,
    p_face: float = 0.3,
    max_face: int = 3,
) -> MDag:
    """A random mDAG: edges follow a random order, faces are random subsets
    reduced to their maximal elements."""
    names = list(vertex_names(n))
    order = names[:]
    rng.shuffle(order)
    edges = [(order[i], order[j]) for i, j in combinations(range(n), 2) if rng.random() < p_edge]
    faces = []
    for k in range(2, min(max_face, n) + 1):
        for c in combinations(names, k):
            if rng.random() < p_face / k:
                faces.append(frozenset(c))
    facets = [f for f in set(faces) if not any(f < h for h in faces)]
    return MDag(names, edges, facets, check=False)


def all_mixed_graphs(names: Sequence[str]) -> Iterator[MarkedMixedGraph]:
    """Every simple graph with edges in {none, ->, <-, <->} (not filtered)."""
    pairs = list(combinations(names, 2))
    for choice in product(range(4), repeat=len(pairs)):
        marks = {}
        for (a, b), c in zip(pairs, choice):
            if c == 1:
                marks[(a, b)], marks[(b, a)] = ARROW, TAIL
            elif c == 2:
                marks[(a, b)], marks[(b, a)] = TAIL, ARROW
            elif c == 3:
                marks[(a, b)] = marks[(b, a)] = ARROW
        yield MarkedMixedGraph(names, marks)


def topological_orders(g: MDag) -> Iterator[tuple[str, ...]]:
    """All topological orders of the directed part (exponential)."""
    pa = {v: g.pa(v) for v in g.names}

    def rec(placed: tuple[str, ...], left: frozenset[str]):
        if not left:
            yield placed
            return
        for v in sorted(left):
            if pa[v] <= set(placed):
                yield from rec(placed + (v,), left - {v})

    yield from rec((), frozenset(g.names))
