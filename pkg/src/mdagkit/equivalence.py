"""Ancestral graphs, Markov equivalence, class enumeration and PAGs.

Markov equivalence is decided by comparing separation sets directly.  A
*separation signature* maps every vertex pair to the set of conditioning
sets that m-separate it; because m-separation of sets is defined path by
path, two graphs agree on all disjoint triples iff their signatures agree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .graph import ARROW, CIRCLE, TAIL, GraphError, MDag, MarkedMixedGraph, bits
from .projection import MAX_MAG_VERTICES, _find_separator, mag_project
from .separation import reach_mask

__all__ = [
    "EquivalenceClass",
    "is_ancestral",
    "is_maximal",
    "separation_signature",
    "markov_equivalent",
    "enumerate_class",
    "ancestral_orientations",
    "skeleton_classes",
    "pag_from_members",
    "build_pag",
    "ci_dag_representable",
    "DEFAULT_MAX_EDGES",
]

DEFAULT_MAX_EDGES = 12


def _require_no_circles(m: MarkedMixedGraph) -> MDag:
    if m.has_circles():
        raise GraphError("graph contains circle marks")
    return m.as_mdag()


def _ancestral_masks(pa: Sequence[int], sib: Sequence[int]) -> bool:
    n = len(pa)
    an = list(pa)
    # transitive closure; n is small
    changed = True
    while changed:
        changed = False
        for v in range(n):
            acc = an[v]
            for p in bits(an[v]):
                acc |= an[p]
            if acc != an[v]:
                an[v] = acc
                changed = True
    for v in range(n):
        if (an[v] >> v) & 1:
            return False
        if an[v] & sib[v]:
            return False
    return True


def is_ancestral(m: MarkedMixedGraph) -> bool:
    """Acyclic directed part and no vertex an ancestor of a sibling."""
    g = _require_no_circles(m)
    return _ancestral_masks(g.pa_masks, g.sib_masks)


def is_maximal(m: MarkedMixedGraph) -> bool:
    """Every non-adjacent pair has some m-separating set."""
    if not is_ancestral(m):
        raise GraphError("is_maximal expects an ancestral graph")
    g = m.as_mdag()
    n = g.n
    for i, j in combinations(range(n), 2):
        if m.adjacent(g.names[i], g.names[j]):
            continue
        rest = [k for k in range(n) if k != i and k != j]
        if _find_separator(g, i, j, rest) is None:
            return False
    return True


def _subset_masks(rest: list[int]) -> list[int]:
    out = [0]
    for k in rest:
        out += [m | (1 << k) for m in out]
    return out


def separation_signature(g: MDag | MarkedMixedGraph) -> dict[tuple[str, str], frozenset[int]]:
    """Map each pair ``(a, b)``, ``a < b``, to the conditioning sets (as
    bitmasks over the sorted vertex names) that m-separate it."""
    if isinstance(g, MarkedMixedGraph):
        g = _require_no_circles(g)
    n = g.n
    if n > MAX_MAG_VERTICES:
        raise GraphError(f"signature is exhaustive; graphs above {MAX_MAG_VERTICES} vertices are refused")
    sig = {}
    for i, j in combinations(range(n), 2):
        sig[(g.names[i], g.names[j])] = frozenset(_pair_seps(g, i, j))
    return sig


def _pair_seps(g: MDag, i: int, j: int) -> list[int]:
    rest = [k for k in range(g.n) if k != i and k != j]
    bj = 1 << j
    return [c for c in _subset_masks(rest) if not reach_mask(g, 1 << i, c) & bj]


def markov_equivalent(m1: MarkedMixedGraph | MDag, m2: MarkedMixedGraph | MDag) -> bool:
    """Same m-separations over all disjoint triples."""
    v1 = set(m1.vertices)
    v2 = set(m2.vertices)
    if v1 != v2:
        raise GraphError("graphs have different vertex sets")
    return separation_signature(m1) == separation_signature(m2)


@dataclass(frozen=True)
class EquivalenceClass:
    skeleton: frozenset[frozenset[str]]
    members: tuple[MarkedMixedGraph, ...]
    pag: MarkedMixedGraph

    def dag_members(self) -> list[MarkedMixedGraph]:
        return [m for m in self.members if not m.bidirected_edges()]


def pag_from_members(members: Sequence[MarkedMixedGraph]) -> MarkedMixedGraph:
    """Arrowhead or tail where every member agrees, circle elsewhere."""
    first = members[0]
    marks = {}
    for key, mark in first.marks.items():
        same = all(m.mark(*key) == mark for m in members)
        marks[key] = mark if same else CIRCLE
    return MarkedMixedGraph(first.vertices, marks)


# edge orientation codes used by the search
_FWD, _BWD, _BI = 0, 1, 2


def _orientation_codes(
    names: tuple[str, ...],
    E: list[tuple[int, int]],
    colliders: dict[tuple[str, str, str], bool] | None = None,
) -> Iterator[tuple[int, ...]]:
    idx = {v: i for i, v in enumerate(names)}
    n = len(names)
    # unshielded-triple checks become due once both edges are assigned
    due: list[list[tuple[int, int, int, bool]]] = [[] for _ in E]
    if colliders:
        epos = {e: k for k, e in enumerate(E)}
        for (x, y, z), want in colliders.items():
            ix, iy, iz = idx[x], idx[y], idx[z]
            k1 = epos[(min(ix, iy), max(ix, iy))]
            k2 = epos[(min(iy, iz), max(iy, iz))]
            due[max(k1, k2)].append((k1, k2, iy, want))

    pa = [0] * n
    sib = [0] * n
    choice = [0] * len(E)

    def head_at(k: int, v: int) -> bool:
        a, b = E[k]
        c = choice[k]
        if c == _BI:
            return True
        return (c == _FWD and v == b) or (c == _BWD and v == a)

    def rec(k: int):
        if k == len(E):
            yield tuple(choice)
            return
        a, b = E[k]
        for c in (_FWD, _BWD, _BI):
            choice[k] = c
            if c == _FWD:
                pa[b] |= 1 << a
            elif c == _BWD:
                pa[a] |= 1 << b
            else:
                sib[a] |= 1 << b
                sib[b] |= 1 << a
            ok = all(
                (head_at(k1, y) and head_at(k2, y)) == want for k1, k2, y, want in due[k]
            ) and _ancestral_masks(pa, sib)
            if ok:
                yield from rec(k + 1)
            if c == _FWD:
                pa[b] &= ~(1 << a)
            elif c == _BWD:
                pa[a] &= ~(1 << b)
            else:
                sib[a] &= ~(1 << b)
                sib[b] &= ~(1 << a)

    yield from rec(0)


def _edge_list(names: tuple[str, ...], edges: Sequence[tuple[str, str]]) -> list[tuple[int, int]]:
    idx = {v: i for i, v in enumerate(names)}
    E = [(idx[a], idx[b]) if idx[a] < idx[b] else (idx[b], idx[a]) for a, b in edges]
    E.sort()
    return E


def _graph_from_codes(names: tuple[str, ...], E: list[tuple[int, int]], codes: Sequence[int]) -> MarkedMixedGraph:
    marks = {}
    for (a, b), c in zip(E, codes):
        na, nb = names[a], names[b]
        if c == _FWD:
            marks[(na, nb)], marks[(nb, na)] = ARROW, TAIL
        elif c == _BWD:
            marks[(na, nb)], marks[(nb, na)] = TAIL, ARROW
        else:
            marks[(na, nb)] = marks[(nb, na)] = ARROW
    return MarkedMixedGraph(names, marks)


def ancestral_orientations(
    vertices: Sequence[str],
    edges: Sequence[tuple[str, str]],
    colliders: dict[tuple[str, str, str], bool] | None = None,
) -> Iterator[MarkedMixedGraph]:
    """Depth-first search over the 3**|E| orientations of a skeleton.

    Yields only ancestral graphs.  Partial assignments are abandoned as soon
    as they contain a directed cycle or an ancestor-sibling pair (both are
    monotone in the edge set).  ``colliders`` optionally fixes, for
    unshielded triples ``(x, y, z)``, whether ``y`` must be a collider.
    """
    names = tuple(sorted(vertices))
    E = _edge_list(names, edges)
    for codes in _orientation_codes(names, E, colliders):
        yield _graph_from_codes(names, E, codes)


def _batch_separated(pa: np.ndarray, sib: np.ndarray, an: np.ndarray, i: int, j: int, cond: int) -> np.ndarray:
    """Vectorised :func:`reach_mask`: one row per graph, all on ``n`` vertices."""
    N, n = pa.shape
    ch = np.zeros_like(pa)
    for v in range(n):
        for w in range(n):
            ch[:, v] |= ((pa[:, w] >> v) & 1) << w
    ancond = np.full(N, cond, dtype=np.int64)
    for v in bits(cond):
        ancond |= an[:, v]
    head = ch[:, i] | sib[:, i]
    tail = pa[:, i].copy()
    seen_h = np.zeros(N, dtype=np.int64)
    seen_t = np.zeros(N, dtype=np.int64)
    while (head | tail).any():
        head &= ~seen_h
        tail &= ~seen_t
        seen_h |= head
        seen_t |= tail
        nh = np.zeros(N, dtype=np.int64)
        nt = np.zeros(N, dtype=np.int64)
        for v in range(n):
            hv = ((head >> v) & 1).astype(bool)
            tv = ((tail >> v) & 1).astype(bool)
            coll = hv & ((ancond >> v) & 1).astype(bool)
            nt |= np.where(coll, pa[:, v], 0)
            nh |= np.where(coll, sib[:, v], 0)
            if not (cond >> v) & 1:
                nh |= np.where(hv | tv, ch[:, v], 0)
                nh |= np.where(tv, sib[:, v], 0)
                nt |= np.where(tv, pa[:, v], 0)
        head, tail = nh, nt
    return ((seen_h | seen_t) >> j) & 1 == 0


def skeleton_classes(vertices: Sequence[str], edges: Sequence[tuple[str, str]]) -> list[EquivalenceClass]:
    """Every Markov equivalence class of maximal ancestral graphs with the
    given skeleton.

    All ancestral orientations are enumerated, their separation signatures
    computed in one vectorised pass, non-maximal ones dropped and the rest
    grouped by signature.  Exponential in the number of edges.
    """
    names = tuple(sorted(vertices))
    n = len(names)
    if n > MAX_MAG_VERTICES:
        raise GraphError(f"graphs above {MAX_MAG_VERTICES} vertices are refused")
    E = _edge_list(names, edges)
    rows = list(_orientation_codes(names, E))
    N = len(rows)
    codes = np.array(rows, dtype=np.int8).reshape(N, len(E))
    pa = np.zeros((N, n), dtype=np.int64)
    sib = np.zeros((N, n), dtype=np.int64)
    for k, (a, b) in enumerate(E):
        c = codes[:, k]
        pa[:, b] |= np.where(c == _FWD, 1 << a, 0)
        pa[:, a] |= np.where(c == _BWD, 1 << b, 0)
        sib[:, a] |= np.where(c == _BI, 1 << b, 0)
        sib[:, b] |= np.where(c == _BI, 1 << a, 0)
    an = pa.copy()
    for _ in range(n):
        nxt = an.copy()
        for v in range(n):
            for w in range(n):
                nxt[:, v] |= np.where((an[:, v] >> w) & 1 == 1, an[:, w], 0)
        an = nxt
    adj = {(a, b) for a, b in E}
    columns = []
    maximal = np.ones(N, dtype=bool)
    for i, j in combinations(range(n), 2):
        if (i, j) in adj:
            continue
        rest = [k for k in range(n) if k != i and k != j]
        any_sep = np.zeros(N, dtype=bool)
        for cond in _subset_masks(rest):
            col = _batch_separated(pa, sib, an, i, j, cond)
            columns.append(col)
            any_sep |= col
        maximal &= any_sep
    sig = np.stack(columns, axis=1) if columns else np.zeros((N, 0), dtype=bool)
    sig, codes = sig[maximal], codes[maximal]
    if not len(codes):
        return []
    _, group = np.unique(sig, axis=0, return_inverse=True)
    group = group.ravel()
    skeleton = frozenset(frozenset((names[a], names[b])) for a, b in E)
    out = []
    for gid in range(group.max() + 1):
        members = sorted(
            (_graph_from_codes(names, E, row) for row in codes[group == gid]), key=lambda m: m.key()
        )
        out.append(EquivalenceClass(skeleton, tuple(members), pag_from_members(members)))
    out.sort(key=lambda c: c.members[0].key())
    return out


def _unshielded_colliders(m: MarkedMixedGraph) -> dict[tuple[str, str, str], bool]:
    out = {}
    for y in m.vertices:
        nb = sorted(m.neighbors(y))
        for x, z in combinations(nb, 2):
            if not m.adjacent(x, z):
                out[(x, y, z)] = m.mark(x, y) == ARROW and m.mark(z, y) == ARROW
    return out


def enumerate_class(
    m: MarkedMixedGraph, max_edges: int = DEFAULT_MAX_EDGES
) -> EquivalenceClass:
    """All maximal ancestral graphs Markov equivalent to ``m``.

    Candidates are the orientations of ``m``'s skeleton; each survivor must
    be ancestral, maximal and have ``m``'s separation signature.  The search
    skips orientations whose unshielded colliders differ from ``m``'s,
    since separation sets force those (a non-collider lies in every
    separator of its endpoints, a collider in none).
    """
    g = _require_no_circles(m)
    edges = [(u, v) for u, v, _, _ in m.edges()]
    if len(edges) > max_edges:
        raise GraphError(f"skeleton has {len(edges)} edges; the cap is {max_edges}")
    if len(edges) > DEFAULT_MAX_EDGES:
        warnings.warn(f"enumerating 3**{len(edges)} orientations", stacklevel=2)
    target = separation_signature(g)
    nonadj = [
        (g.index[a], g.index[b]) for (a, b) in target if not m.adjacent(a, b)
    ]
    members = []
    for cand in ancestral_orientations(m.vertices, edges, _unshielded_colliders(m)):
        cg = cand.as_mdag()
        if all(frozenset(_pair_seps(cg, i, j)) == target[(cg.names[i], cg.names[j])] for i, j in nonadj):
            if is_maximal(cand):
                members.append(cand)
    if m not in members:
        raise GraphError("input is not a maximal ancestral graph")
    members.sort(key=lambda x: x.key())
    return EquivalenceClass(m.skeleton, tuple(members), pag_from_members(members))


def build_pag(g: MDag, max_edges: int = DEFAULT_MAX_EDGES) -> MarkedMixedGraph:
    return enumerate_class(mag_project(g), max_edges).pag


def ci_dag_representable(g: MDag, max_edges: int = DEFAULT_MAX_EDGES) -> MDag | None:
    """A DAG with the same m-separations as ``g``, or None if none exists."""
    cls = enumerate_class(mag_project(g), max_edges)
    if cls.pag.bidirected_edges():
        return None
    dags = cls.dag_members()
    if not dags:
        raise AssertionError("bidirected-free PAG without a DAG member")
    return MDag(g.names, dags[0].directed_edges(), (), check=False)
