"""Sorting mDAGs into the four constraint classes, with witnesses.

The search runs in a fixed order and stops at the first class that has a
witness:

1. nested conditional independences (``NESTED``);
2. a bidirected edge in the PAG (``NONDAG_CI``), explained by a collider
   path of length three or by a discriminating path;
3. a Fritz triangle or a non-trivial e-separation (``INEQUALITY_ONLY``);
4. otherwise ``DAG_EQUIVALENT``.

The last step is not a proof: the graphical criteria for inequalities are
sufficient, not necessary, so ``decided`` is False there unless the input
is itself a DAG.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterator, Union

from .equivalence import DEFAULT_MAX_EDGES, enumerate_class
from .graph import ARROW, TAIL, GraphError, MDag, MarkedMixedGraph, induced_subgraph
from .nested import NestedWitness, find_nested_constraints, reachable_graphs
from .projection import mag_project
from .separation import e_separated, m_separated, reach_mask

__all__ = [
    "ClassTag",
    "PagBidirectedEdge",
    "Collider3Path",
    "DiscriminatingPath",
    "DiscriminatingCore",
    "FritzTriangle",
    "ChshInstance",
    "ESepWitness",
    "ClassificationReport",
    "find_collider_3paths",
    "find_discriminating_paths",
    "reduce_discriminating_path",
    "matches_fig5_core",
    "find_fritz_triangles",
    "find_esep_witnesses",
    "chsh_from_path",
    "classify",
    "emit_witness",
]


class ClassTag(str, enum.Enum):
    DAG_EQUIVALENT = "DAG_EQUIVALENT"
    INEQUALITY_ONLY = "INEQUALITY_ONLY"
    NONDAG_CI = "NONDAG_CI"
    NESTED = "NESTED"

    @property
    def exit_code(self) -> int:
        return {"DAG_EQUIVALENT": 10, "INEQUALITY_ONLY": 11, "NONDAG_CI": 12, "NESTED": 13}[self.value]


def _names(xs) -> list[str]:
    return sorted(xs)


@dataclass(frozen=True)
class PagBidirectedEdge:
    a: str
    b: str
    kind = "pag_bidirected"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "edge": [self.a, self.b]}


@dataclass(frozen=True)
class Collider3Path:
    """``<v0, v1, v2, v3>`` with colliders at ``v1`` and ``v2``.

    ``shape`` names the edge between the endpoints: ``"i"`` none, ``"ii"``
    no arrowheads, ``"iii"`` one arrowhead, ``"iv"`` two.
    """

    path: tuple[str, str, str, str]
    shape: str
    kind = "collider_3path"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "path": list(self.path), "shape": self.shape}


@dataclass(frozen=True)
class DiscriminatingPath:
    """``<a, v1, ..., vk, b, c>`` discriminating for ``b``."""

    path: tuple[str, ...]
    collider: bool  # whether b is a collider on the path in the PAG
    kind = "discriminating_path"

    @property
    def target(self) -> str:
        return self.path[-2]

    def as_dict(self) -> dict:
        return {"kind": self.kind, "path": list(self.path), "target": self.target, "collider": self.collider}


@dataclass(frozen=True)
class DiscriminatingCore:
    """An induced ``a *-> v <-> b <-> c`` with ``v -> c`` and ``a`` adjacent to ``v`` only."""

    a: str
    v: str
    b: str
    c: str
    subgraph: MarkedMixedGraph = field(compare=False, repr=False)
    kind = "discriminating_core"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "roles": {"a": self.a, "v": self.v, "b": self.b, "c": self.c}}


@dataclass(frozen=True)
class FritzTriangle:
    vertices: tuple[str, str, str]
    kind = "fritz_triangle"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "vertices": list(self.vertices)}


@dataclass(frozen=True)
class ChshInstance:
    """CHSH roles: ``a`` and ``c`` are settings, ``b`` and ``d`` outcomes.

    For binary +-1 variables and ``E(x, y) = E[X_b X_d | X_a = x, X_c = y]``::

        -2 <= E(-1,+1) + E(+1,-1) + E(-1,-1) - E(+1,+1) <= 2

    ``reduction`` is set when the path's endpoints are adjacent (shapes iii
    and iv): restricting to distributions where ``X_c`` copies everything
    ``X_d`` receives through the edge between them removes the endpoint
    edge and leaves shape (i).
    """

    a: str
    b: str
    c: str
    d: str
    shape: str
    source: tuple[str, str, str, str]
    reduction: tuple[str, str] | None = None
    kind = "chsh"
    bound = 2

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "roles": {"a": self.a, "b": self.b, "c": self.c, "d": self.d},
            "shape": self.shape,
            "source": list(self.source),
            "reduction": None if self.reduction is None else {"drop_edge": list(self.reduction)},
            "bound": self.bound,
        }


@dataclass(frozen=True)
class ESepWitness:
    """``A`` and ``B`` are m-separated by ``C`` once ``D`` is deleted."""

    A: frozenset[str]
    B: frozenset[str]
    C: frozenset[str]
    D: frozenset[str]
    kind = "esep"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "A": _names(self.A), "B": _names(self.B), "C": _names(self.C), "D": _names(self.D)}


Witness = Union[
    NestedWitness,
    PagBidirectedEdge,
    Collider3Path,
    DiscriminatingPath,
    DiscriminatingCore,
    FritzTriangle,
    ChshInstance,
    ESepWitness,
]


@dataclass
class ClassificationReport:
    class_tag: ClassTag
    witnesses: list = field(default_factory=list)
    decided: bool = False
    dag: MDag | None = None
    pag: MarkedMixedGraph | None = None

    def __post_init__(self):
        kinds = {type(w) for w in self.witnesses}
        if self.class_tag is ClassTag.NESTED and NestedWitness not in kinds:
            raise AssertionError("NESTED needs a nested witness")
        if self.class_tag is ClassTag.NONDAG_CI and PagBidirectedEdge not in kinds:
            raise AssertionError("NONDAG_CI needs a PAG bidirected edge")
        if self.class_tag is ClassTag.INEQUALITY_ONLY and not kinds & {FritzTriangle, ESepWitness, ChshInstance}:
            raise AssertionError("INEQUALITY_ONLY needs an inequality witness")

    def as_dict(self) -> dict:
        out = {
            "schema": 1,
            "class": self.class_tag.value,
            "decided": self.decided,
            "witnesses": [emit_witness(w) for w in self.witnesses],
        }
        if self.dag is not None:
            out["dag"] = sorted([a, b] for a, b in self.dag.directed)
        return out


# ---------------------------------------------------------------------------
# PAG patterns


def _arrow_at(p: MarkedMixedGraph, x: str, y: str) -> bool:
    """Edge between ``x`` and ``y`` has an arrowhead at ``y``."""
    return p.mark(x, y) == ARROW


def _shape(p: MarkedMixedGraph, a: str, d: str) -> str:
    if not p.adjacent(a, d):
        return "i"
    heads = _arrow_at(p, a, d) + _arrow_at(p, d, a)
    return ("ii", "iii", "iv")[heads]


def find_collider_3paths(p: MarkedMixedGraph) -> list[Collider3Path]:
    """Locally unshielded collider paths of length three.

    Each path is listed once, in the direction whose vertex tuple is
    lexicographically smaller.
    """
    out = []
    for v1, v2 in permutations(p.vertices, 2):
        if not (p.adjacent(v1, v2) and _arrow_at(p, v2, v1) and _arrow_at(p, v1, v2)):
            continue
        for v0 in p.neighbors(v1):
            if v0 == v2 or p.adjacent(v0, v2) or not _arrow_at(p, v0, v1):
                continue
            for v3 in p.neighbors(v2):
                if v3 in (v0, v1) or p.adjacent(v1, v3) or not _arrow_at(p, v3, v2):
                    continue
                path = (v0, v1, v2, v3)
                if path <= path[::-1]:
                    out.append(Collider3Path(path, _shape(p, v0, v3)))
    return sorted(out, key=lambda w: w.path)


def _parent_of(p: MarkedMixedGraph, x: str, y: str) -> bool:
    return p.adjacent(x, y) and p.mark(y, x) == TAIL and p.mark(x, y) == ARROW


def find_discriminating_paths(p: MarkedMixedGraph) -> list[DiscriminatingPath]:
    """Every path ``<a, v1, ..., vk, b, c>``, ``k >= 1``: ``a`` and ``c``
    non-adjacent, each ``vi`` a collider on the path and a parent of ``c``."""
    out = []
    for c in p.vertices:
        for b in p.neighbors(c):
            # grow backwards from b: rev = [b, vk, ..., v1]
            def extend(rev: list[str]) -> Iterator[tuple[str, ...]]:
                last = rev[-1]
                prev = rev[-2]
                for x in sorted(p.neighbors(last)):
                    if x == c or x in rev:
                        continue
                    if not _arrow_at(p, x, last):
                        continue
                    if not p.adjacent(x, c):
                        yield tuple(reversed(rev + [x])) + (c,)
                    if _parent_of(p, x, c) and _arrow_at(p, last, x):
                        yield from extend(rev + [x])

            for v in sorted(p.neighbors(b)):
                if v == c or not _parent_of(p, v, c) or not _arrow_at(p, b, v):
                    continue
                for path in extend([b, v]):
                    bb = path[-2]
                    coll = _arrow_at(p, path[-3], bb) and _arrow_at(p, c, bb)
                    out.append(DiscriminatingPath(path, coll))
    return sorted(set(out), key=lambda w: (len(w.path), w.path))


def matches_fig5_core(p: MarkedMixedGraph, a: str, v: str, b: str, c: str) -> bool:
    """``a *-> v``, ``v <-> b``, ``v -> c``, ``b <-> c``; ``a`` adjacent to neither ``b`` nor ``c``."""
    if p.adjacent(a, b) or p.adjacent(a, c):
        return False
    return (
        p.adjacent(a, v)
        and _arrow_at(p, a, v)
        and p.is_bidirected(v, b)
        and _parent_of(p, v, c)
        and p.is_bidirected(b, c)
    )


def reduce_discriminating_path(p: MarkedMixedGraph) -> DiscriminatingCore | None:
    """Shrink a discriminating path to an induced four-vertex core.

    Any discriminating path of higher order forces shields between its
    colliders, and those shields carry discriminating paths of strictly
    lower order, so it suffices to look at first-order paths
    ``<a, v, b, c>`` and return the first whose induced subgraph is the
    core shape.
    """
    if find_collider_3paths(p):
        raise GraphError("PAG has a locally unshielded collider path of length 3")
    paths = find_discriminating_paths(p)
    if not paths:
        return None
    for w in paths:
        if len(w.path) != 4:
            continue
        a, v, b, c = w.path
        if matches_fig5_core(p, a, v, b, c):
            return DiscriminatingCore(a, v, b, c, p.induced({a, v, b, c}))
    return None


def find_fritz_triangles(g: MDag) -> list[FritzTriangle]:
    """Triples pairwise joined by bidirected faces, with no directed edge
    among them and no single face holding all three."""
    out = []
    for x, y, z in combinations(g.names, 3):
        tri = {x, y, z}
        if any(a in tri and b in tri for a, b in g.directed):
            continue
        if any(tri <= f for f in g.facets):
            continue
        if all(any({u, w} <= f for f in g.facets) for u, w in ((x, y), (x, z), (y, z))):
            out.append(FritzTriangle((x, y, z)))
    return out


def chsh_from_path(w: Collider3Path) -> ChshInstance:
    """Settings at the ends of the path, outcomes at the two colliders."""
    v0, v1, v2, v3 = w.path
    reduction = (v0, v3) if w.shape in ("iii", "iv") else None
    return ChshInstance(v0, v1, v3, v2, w.shape, w.path, reduction)


def _subsets(xs: list[str]) -> Iterator[frozenset[str]]:
    for k in range(len(xs) + 1):
        for c in combinations(xs, k):
            yield frozenset(c)


def find_esep_witnesses(g: MDag, max_vertices: int = 8) -> list[ESepWitness]:
    """Non-trivial e-separations ``{a} _||_ B | C`` after deleting ``D``.

    ``D`` must not be a set of vertices that can be fixed (those give
    equalities), ``B`` is the largest set separated from ``a``, and no
    ``C + D'`` with ``D'`` a subset of ``D`` m-separates ``a`` from ``B`` in
    ``g`` itself.  Only witnesses with inclusion-minimal ``(C, D)`` for their
    ``a`` are kept.
    """
    if g.n > max_vertices:
        raise GraphError(f"e-separation search is exhaustive; capped at {max_vertices} vertices")
    fixable_sets = {frozenset(s) for s, _ in reachable_graphs(g)}
    names = list(g.names)
    found: list[ESepWitness] = []
    for D in _subsets(names):
        if not D or D in fixable_sets or len(D) > len(names) - 2:
            continue
        h = induced_subgraph(g, g.vertex_set - D)
        left = [v for v in names if v not in D]
        for a in left:
            others = [v for v in left if v != a]
            for C in _subsets(others):
                if any(w.A == {a} and w.C <= C and w.D <= D for w in found):
                    continue
                reach = h.unmask(reach_mask(h, h.mask({a}), h.mask(C)))
                B = frozenset(others) - C - reach
                if not B:
                    continue
                if any(m_separated(g, {a}, B, C | Dp) for Dp in _subsets(sorted(D))):
                    continue
                found.append(ESepWitness(frozenset((a,)), B, C, D))
    return sorted(found, key=lambda w: (len(w.D), _names(w.D), _names(w.A), len(w.C), _names(w.C)))


# ---------------------------------------------------------------------------


def classify(g: MDag, max_edges: int = DEFAULT_MAX_EDGES) -> ClassificationReport:
    if g.context:
        raise GraphError("classify expects a graph without context vertices")
    nested = find_nested_constraints(g)
    cls = enumerate_class(mag_project(g), max_edges)
    pag = cls.pag
    if nested:
        return ClassificationReport(ClassTag.NESTED, list(nested), True, pag=pag)

    bidi = [PagBidirectedEdge(a, b) for a, b in pag.bidirected_edges()]
    if bidi:
        witnesses: list = list(bidi)
        paths = find_collider_3paths(pag)
        witnesses += paths
        witnesses += [chsh_from_path(w) for w in paths]
        if not paths:
            witnesses += find_discriminating_paths(pag)
            core = reduce_discriminating_path(pag)
            if core is not None:
                witnesses.append(core)
                w = ESepWitness(frozenset((core.a,)), frozenset((core.b, core.c)), frozenset(), frozenset((core.v,)))
                if e_separated(g, w.A, w.B, w.C, w.D):
                    witnesses.append(w)
        return ClassificationReport(ClassTag.NONDAG_CI, witnesses, True, pag=pag)

    fritz = find_fritz_triangles(g)
    esep = find_esep_witnesses(g) if g.n <= 8 else []
    if fritz or esep:
        return ClassificationReport(ClassTag.INEQUALITY_ONLY, fritz + esep, bool(fritz), pag=pag)

    dags = cls.dag_members()
    dag = MDag(g.names, dags[0].directed_edges(), (), check=False)
    return ClassificationReport(ClassTag.DAG_EQUIVALENT, [], g.is_dag(), dag=dag, pag=pag)


def _xs(s) -> str:
    return ", ".join(f"X_{v}" for v in sorted(s))


def emit_witness(w) -> dict:
    """Machine-checkable rendering of one witness, plus a readable line."""
    d = w.as_dict()
    if isinstance(w, NestedWitness):
        d["kind"] = "nested"
        d["text"] = w.describe()
    elif isinstance(w, ChshInstance):
        d["text"] = (
            f"-2 <= E[X_{w.b}X_{w.d}|-1,+1] + E[X_{w.b}X_{w.d}|+1,-1] + E[X_{w.b}X_{w.d}|-1,-1]"
            f" - E[X_{w.b}X_{w.d}|+1,+1] <= 2, conditioning on (X_{w.a}, X_{w.c})"
        )
    elif isinstance(w, ESepWitness):
        cond = f" | {_xs(w.C)}" if w.C else ""
        d["text"] = f"{_xs(w.A)} e-separated from {_xs(w.B)}{cond} after deleting {_xs(w.D)}"
    elif isinstance(w, FritzTriangle):
        d["text"] = "triangle " + ", ".join(w.vertices)
    elif isinstance(w, PagBidirectedEdge):
        d["text"] = f"{w.a} <-> {w.b} in every Markov equivalent MAG"
    elif isinstance(w, Collider3Path):
        d["text"] = "collider path " + " ".join(w.path) + f" (shape {w.shape})"
    elif isinstance(w, DiscriminatingPath):
        d["text"] = "discriminating path " + " ".join(w.path) + f" for {w.target}"
    elif isinstance(w, DiscriminatingCore):
        d["text"] = f"{w.a} *-> {w.v} <-> {w.b} <-> {w.c}, {w.v} -> {w.c}"
    return d
