"""Canonical DAGs, latent projection and maximal ancestral projection."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .graph import ARROW, TAIL, GraphError, MDag, MarkedMixedGraph, bits, maximal_sets
from .separation import reach_mask

__all__ = [
    "CanonicalDag",
    "canonical_dag",
    "latent_project",
    "mag_project",
    "separable_pairs",
    "MAX_MAG_VERTICES",
]

#: pairwise separability is decided by enumerating 2**(n-2) candidate sets
MAX_MAG_VERTICES = 12


@dataclass(frozen=True)
class CanonicalDag:
    dag: MDag
    latent_map: dict[frozenset[str], str]
    observed: frozenset[str]

    @property
    def latents(self) -> frozenset[str]:
        return frozenset(self.latent_map.values())


def _fresh_names(taken: set[str], count: int, prefix: str = "h") -> list[str]:
    while True:
        names = [f"{prefix}{i}" for i in range(1, count + 1)]
        if not taken.intersection(names):
            return names
        prefix += "_"


def canonical_dag(g: MDag) -> CanonicalDag:
    """Replace every bidirected facet by a fresh latent parent of its members.

    Latents are named ``h1, h2, ...``, larger facets first and ties broken
    by the sorted member tuples; the prefix is extended with underscores
    if it would clash with an existing vertex name.
    """
    facets = sorted(g.facets, key=lambda f: (-len(f), sorted(f)))
    names = _fresh_names(set(g.vertices), len(facets))
    latent_map = dict(zip(facets, names))
    directed = set(g.directed)
    for f, h in latent_map.items():
        directed.update((h, v) for v in f)
    dag = MDag(list(g.vertices) + names, directed, (), g.context, check=False)
    return CanonicalDag(dag=dag, latent_map=latent_map, observed=g.vertex_set)


def latent_project(g: MDag, keep: Iterable[str]) -> MDag:
    """Project out every vertex not in ``keep``.

    ``a -> b`` whenever a directed walk from ``a`` to ``b`` has all internal
    vertices latent.  A set is a bidirected face when one source (a latent
    vertex or a bidirected facet of ``g``) reaches each member by a directed
    path whose vertices, other than the endpoint, are latent.
    """
    keep = frozenset(keep)
    unknown = keep - g.vertex_set
    if unknown:
        raise GraphError(f"unknown vertex {sorted(unknown)[0]!r}")
    kmask = g.mask(keep)
    lmask = g.full_mask & ~kmask
    ch = g.ch_masks

    def down(src: int) -> int:
        # observed vertices hit by directed paths from src through latents
        hit = 0
        seen = src
        frontier = src
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= ch[v]
            hit |= nxt & kmask
            frontier = nxt & lmask & ~seen
            seen |= frontier
        return hit

    directed = set()
    for a in bits(kmask):
        for b in bits(down(1 << a)):
            if b != a:
                directed.add((g.names[a], g.names[b]))

    faces = []
    for l in bits(lmask):
        faces.append(down(1 << l))
    for fm in g.facet_masks:
        faces.append((fm & kmask) | down(fm & lmask))
    facets = maximal_sets(g.unmask(m) for m in faces)
    return MDag(
        [v for v in g.vertices if v in keep], directed, facets, g.context & keep, check=False
    )


def separable_pairs(g: MDag) -> dict[tuple[str, str], frozenset[str]]:
    """For each pair ``a < b`` that some subset of the other vertices
    m-separates, one such set (the first found by increasing size)."""
    n = g.n
    if n > MAX_MAG_VERTICES:
        raise GraphError(
            f"separator search is exhaustive; graphs above {MAX_MAG_VERTICES} vertices are refused"
        )
    out: dict[tuple[str, str], frozenset[str]] = {}
    names = g.names
    for i, j in combinations(range(n), 2):
        rest = [k for k in range(n) if k != i and k != j]
        sep = _find_separator(g, i, j, rest)
        if sep is not None:
            out[(names[i], names[j])] = g.unmask(sep)
    return out


def _find_separator(g: MDag, i: int, j: int, rest: list[int]) -> int | None:
    # adjacent vertices are never separable; skip the subset sweep
    if (g.pa_masks[j] >> i) & 1 or (g.pa_masks[i] >> j) & 1 or (g.sib_masks[i] >> j) & 1:
        return None
    bj = 1 << j
    for size in range(len(rest) + 1):
        for combo in combinations(rest, size):
            c = 0
            for k in combo:
                c |= 1 << k
            if not reach_mask(g, 1 << i, c) & bj:
                return c
    return None


def mag_project(g: MDag) -> MarkedMixedGraph:
    """Maximal ancestral projection.

    Every pair that no subset of the remaining vertices m-separates becomes
    adjacent: ``a -> b`` if ``a`` is an ancestor of ``b``, ``b -> a`` if the
    reverse holds, ``a <-> b`` otherwise.  Context vertices are treated as
    ordinary (root) vertices.
    """
    seps = separable_pairs(g)
    marks: dict[tuple[str, str], str] = {}
    for a, b in combinations(g.names, 2):
        if (a, b) in seps:
            continue
        ia, ib = g.index[a], g.index[b]
        if (g.an_mask(1 << ib) >> ia) & 1:
            marks[(a, b)], marks[(b, a)] = ARROW, TAIL
        elif (g.an_mask(1 << ia) >> ib) & 1:
            marks[(a, b)], marks[(b, a)] = TAIL, ARROW
        else:
            marks[(a, b)] = marks[(b, a)] = ARROW
    return MarkedMixedGraph(g.names, marks)
