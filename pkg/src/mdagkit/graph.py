"""Marginal DAGs (mDAGs) and marked mixed graphs.

An mDAG is a DAG together with a simplicial complex of bidirected faces.
Only the facets (maximal faces) are stored; every subset of a facet is an
implicit face.  Vertices fixed by the fixing operation are kept in the
vertex set and flagged as *context* vertices.

Internally every graph indexes its vertices in lexicographic order so that
vertex sets can be handled as integer bitmasks.  The public API speaks in
vertex names and frozensets.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

__all__ = [
    "GraphError",
    "ParseError",
    "MDag",
    "VertexRelations",
    "MarkedMixedGraph",
    "TAIL",
    "ARROW",
    "CIRCLE",
    "parse_mdag",
    "format_mdag",
    "validate",
    "relations",
    "topological_order",
    "induced_subgraph",
    "maximal_sets",
    "parse_marked",
    "format_marked",
]

TAIL = "tail"
ARROW = "arrow"
CIRCLE = "circle"
MARKS = (TAIL, ARROW, CIRCLE)


class GraphError(ValueError):
    """Raised for invalid graphs, unknown vertices and malformed queries."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def maximal_sets(sets: Iterable[Iterable[str]], min_size: int = 2) -> frozenset[frozenset[str]]:
    """Return the inclusion-maximal members of ``sets`` having at least ``min_size`` elements."""
    cands = {frozenset(s) for s in sets}
    cands = {s for s in cands if len(s) >= min_size}
    return frozenset(s for s in cands if not any(s < t for t in cands))


class MDag:
    """An mDAG ``(V, D, B)`` with optional context (fixed) vertices.

    Parameters
    ----------
    vertices:
        Vertex names, in declaration order.
    directed:
        Ordered pairs ``(a, b)`` meaning ``a -> b``.
    facets:
        Bidirected facets, each an iterable of at least two vertex names.
    context:
        Vertices that have been fixed.
    check:
        If true (the default) raise :class:`GraphError` when the graph
        violates any invariant reported by :func:`validate`.
    """

    __slots__ = ("_vertices", "_directed", "_facets", "_context", "__dict__")

    def __init__(
        self,
        vertices: Iterable[str],
        directed: Iterable[tuple[str, str]] = (),
        facets: Iterable[Iterable[str]] = (),
        context: Iterable[str] = (),
        *,
        check: bool = True,
    ):
        self._vertices = tuple(vertices)
        self._directed = frozenset((a, b) for a, b in directed)
        self._facets = frozenset(frozenset(f) for f in facets)
        self._context = frozenset(context)
        if check:
            problems = validate(self)
            if problems:
                raise GraphError("invalid mDAG: " + "; ".join(problems))

    # -- basic accessors -------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def directed(self) -> frozenset[tuple[str, str]]:
        return self._directed

    @property
    def facets(self) -> frozenset[frozenset[str]]:
        return self._facets

    @property
    def context(self) -> frozenset[str]:
        return self._context

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self._vertices)

    @cached_property
    def random_vertices(self) -> tuple[str, ...]:
        """Non-context vertices, sorted."""
        return tuple(v for v in self.names if v not in self._context)

    @property
    def n(self) -> int:
        return len(self._vertices)

    def is_dag(self) -> bool:
        return not self._facets

    def key(self) -> tuple:
        """Canonical hashable description used for equality and sorting."""
        return (
            tuple(sorted(self.vertex_set)),
            tuple(sorted(self._directed)),
            tuple(sorted(tuple(sorted(f)) for f in self._facets)),
            tuple(sorted(self._context)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MDag):
            return NotImplemented
        return (
            self.vertex_set == other.vertex_set
            and self._directed == other._directed
            and self._facets == other._facets
            and self._context == other._context
        )

    def __hash__(self) -> int:
        return hash((self.vertex_set, self._directed, self._facets, self._context))

    def __repr__(self) -> str:
        parts = [" ".join(self.names)]
        parts += [f"{a}->{b}" for a, b in sorted(self._directed)]
        parts += ["<" + ",".join(sorted(f)) + ">" for f in sorted(self._facets, key=sorted)]
        if self._context:
            parts.append("ctx:" + ",".join(sorted(self._context)))
        return f"MDag({'; '.join(parts)})"

    # -- bitmask machinery -----------------------------------------------

    @cached_property
    def names(self) -> tuple[str, ...]:
        """Vertex names sorted lexicographically; position = bit index."""
        return tuple(sorted(self.vertex_set))

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.names)}

    @cached_property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1

    @cached_property
    def pa_masks(self) -> tuple[int, ...]:
        pa = [0] * len(self.names)
        idx = self.index
        for a, b in self._directed:
            pa[idx[b]] |= 1 << idx[a]
        return tuple(pa)

    @cached_property
    def ch_masks(self) -> tuple[int, ...]:
        ch = [0] * len(self.names)
        idx = self.index
        for a, b in self._directed:
            ch[idx[a]] |= 1 << idx[b]
        return tuple(ch)

    @cached_property
    def facet_masks(self) -> tuple[int, ...]:
        return tuple(sorted(self.mask(f) for f in self._facets))

    @cached_property
    def sib_masks(self) -> tuple[int, ...]:
        sib = [0] * len(self.names)
        for fm in self.facet_masks:
            for i in bits(fm):
                sib[i] |= fm
        return tuple(s & ~(1 << i) for i, s in enumerate(sib))

    def mask(self, vs: Iterable[str]) -> int:
        idx = self.index
        m = 0
        try:
            for v in vs:
                m |= 1 << idx[v]
        except KeyError as exc:
            raise GraphError(f"unknown vertex {exc.args[0]!r}") from None
        return m

    def unmask(self, mask: int) -> frozenset[str]:
        names = self.names
        return frozenset(names[i] for i in bits(mask))

    def an_mask(self, mask: int) -> int:
        return _closure(mask, self.pa_masks)

    def de_mask(self, mask: int) -> int:
        return _closure(mask, self.ch_masks)

    def dis_mask(self, mask: int) -> int:
        return _closure(mask, self.sib_masks)

    # -- name-level relations --------------------------------------------

    def _check(self, v: str) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def pa(self, v: str) -> frozenset[str]:
        return self.unmask(self.pa_masks[self._check(v)])

    def ch(self, v: str) -> frozenset[str]:
        return self.unmask(self.ch_masks[self._check(v)])

    def sib(self, v: str) -> frozenset[str]:
        return self.unmask(self.sib_masks[self._check(v)])

    def an(self, vs: Iterable[str] | str) -> frozenset[str]:
        return self.unmask(self.an_mask(self.mask(_as_set(vs))))

    def de(self, vs: Iterable[str] | str) -> frozenset[str]:
        return self.unmask(self.de_mask(self.mask(_as_set(vs))))

    def dis(self, v: str) -> frozenset[str]:
        return self.unmask(self.dis_mask(1 << self._check(v)))

    def is_acyclic(self) -> bool:
        try:
            topological_order(self)
        except GraphError:
            return False
        return True


def _as_set(vs: Iterable[str] | str) -> Iterable[str]:
    return (vs,) if isinstance(vs, str) else vs


def _closure(mask: int, step: tuple[int, ...]) -> int:
    out = mask
    frontier = mask
    while frontier:
        nxt = 0
        for i in bits(frontier):
            nxt |= step[i]
        frontier = nxt & ~out
        out |= nxt
    return out


# ---------------------------------------------------------------------------
# validation and elementary operations


def validate(g: MDag) -> list[str]:
    """Return a list of violated mDAG invariants; empty when ``g`` is valid."""
    problems: list[str] = []
    seen: set[str] = set()
    for v in g.vertices:
        if v in seen:
            problems.append(f"duplicate vertex {v!r}")
        seen.add(v)
        if not v or any(ch.isspace() for ch in v) or v.startswith("#"):
            problems.append(f"bad vertex name {v!r}")
    vs = g.vertex_set
    for a, b in sorted(g.directed):
        if a not in vs or b not in vs:
            problems.append(f"edge {a}->{b} uses an undeclared vertex")
        elif a == b:
            problems.append(f"self-loop at {a!r}")
    for f in sorted(g.facets, key=sorted):
        if len(f) < 2:
            problems.append(f"facet {sorted(f)} has fewer than two vertices")
        if not f <= vs:
            problems.append(f"facet {sorted(f)} uses an undeclared vertex")
    for f in sorted(g.facets, key=sorted):
        for h in g.facets:
            if f < h:
                problems.append(f"facet {sorted(f)} is not maximal (contained in {sorted(h)})")
                break
    for c in sorted(g.context):
        if c not in vs:
            problems.append(f"context vertex {c!r} is undeclared")
            continue
        if any(b == c for _, b in g.directed):
            problems.append(f"context vertex {c!r} has an incoming edge")
        if any(c in f for f in g.facets):
            problems.append(f"context vertex {c!r} belongs to a facet")
    if all(a in vs and b in vs for a, b in g.directed) and len(seen) == len(g.vertices):
        if _kahn(g) is None:
            problems.append("directed part has a cycle")
    return problems


def _kahn(g: MDag) -> list[str] | None:
    indeg = {v: 0 for v in g.vertex_set}
    children: dict[str, list[str]] = {v: [] for v in g.vertex_set}
    for a, b in g.directed:
        indeg[b] += 1
        children[a].append(b)
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in children[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return order if len(order) == len(indeg) else None


def topological_order(g: MDag) -> tuple[str, ...]:
    """Kahn's algorithm, breaking ties lexicographically."""
    order = _kahn(g)
    if order is None:
        raise GraphError("directed part has a cycle")
    return tuple(order)


@dataclass(frozen=True)
class VertexRelations:
    pa: frozenset[str]
    an: frozenset[str]
    de: frozenset[str]
    sib: frozenset[str]
    dis: frozenset[str]


def relations(g: MDag, v: str) -> VertexRelations:
    return VertexRelations(pa=g.pa(v), an=g.an(v), de=g.de(v), sib=g.sib(v), dis=g.dis(v))


def induced_subgraph(g: MDag, keep: Iterable[str]) -> MDag:
    keep = frozenset(keep)
    unknown = keep - g.vertex_set
    if unknown:
        raise GraphError(f"unknown vertex {sorted(unknown)[0]!r}")
    return MDag(
        [v for v in g.vertices if v in keep],
        [(a, b) for a, b in g.directed if a in keep and b in keep],
        maximal_sets(f & keep for f in g.facets),
        g.context & keep,
        check=False,
    )


# ---------------------------------------------------------------------------
# text format


def _tokens(text: str) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = []
        col = 0
        for part in line.split():
            col = line.index(part, col)
            toks.append((col + 1, part))
            col += len(part)
        if toks:
            yield lineno, toks


def parse_mdag(text: str, check: bool = True) -> MDag:
    """Parse the line-oriented mDAG format.

    ``vertices`` must come first; ``edge a b`` adds ``a -> b``; ``face``
    declares a bidirected facet; ``context`` marks fixed vertices.  With
    ``check=False`` the graph is returned even if :func:`validate` objects.
    """
    vertices: list[str] | None = None
    directed: list[tuple[str, str]] = []
    facets: list[frozenset[str]] = []
    context: list[str] = []

    def known(lineno: int, col: int, name: str) -> str:
        if name not in declared:
            raise ParseError(f"undeclared vertex {name!r}", lineno, col)
        return name

    declared: set[str] = set()
    for lineno, toks in _tokens(text):
        col, kw = toks[0]
        args = toks[1:]
        if vertices is None:
            if kw != "vertices":
                raise ParseError("expected 'vertices' as the first statement", lineno, col)
            vertices = [name for _, name in args]
            declared = set(vertices)
            if len(declared) != len(vertices):
                raise ParseError("duplicate vertex in 'vertices'", lineno, col)
            continue
        if kw == "vertices":
            raise ParseError("'vertices' may appear only once", lineno, col)
        if kw == "edge":
            if len(args) != 2:
                raise ParseError("'edge' takes exactly two vertices", lineno, col)
            directed.append((known(lineno, *args[0]), known(lineno, *args[1])))
        elif kw == "face":
            if len(args) < 2:
                raise ParseError("'face' needs at least two vertices", lineno, col)
            facets.append(frozenset(known(lineno, *a) for a in args))
        elif kw == "context":
            context.extend(known(lineno, *a) for a in args)
        else:
            raise ParseError(f"unknown statement {kw!r}", lineno, col)
    if vertices is None:
        raise ParseError("missing 'vertices' statement")
    g = MDag(vertices, directed, facets, context, check=False)
    problems = validate(g) if check else []
    if problems:
        raise GraphError("invalid mDAG: " + "; ".join(problems))
    return g


def format_mdag(g: MDag) -> str:
    lines = ["vertices " + " ".join(g.names)]
    lines += [f"edge {a} {b}" for a, b in sorted(g.directed)]
    lines += ["face " + " ".join(sorted(f)) for f in sorted(g.facets, key=sorted)]
    if g.context:
        lines.append("context " + " ".join(sorted(g.context)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# marked mixed graphs (MAGs and PAGs)


class MarkedMixedGraph:
    """A simple graph whose edge ends carry a mark in {tail, arrow, circle}.

    ``marks`` maps an ordered pair ``(x, y)`` to the mark at the ``y`` end of
    the edge between ``x`` and ``y``; both orientations are stored.
    """

    __slots__ = ("_vertices", "_marks", "__dict__")

    def __init__(self, vertices: Iterable[str], marks: dict[tuple[str, str], str] | None = None):
        self._vertices = tuple(sorted(set(vertices)))
        self._marks: dict[tuple[str, str], str] = {}
        vs = set(self._vertices)
        for (x, y), m in (marks or {}).items():
            if x not in vs or y not in vs:
                raise GraphError(f"edge {x}-{y} uses an unknown vertex")
            if x == y:
                raise GraphError(f"self-loop at {x!r}")
            if m not in MARKS:
                raise GraphError(f"unknown mark {m!r}")
            self._marks[(x, y)] = m
        for x, y in self._marks:
            if (y, x) not in self._marks:
                raise GraphError(f"edge {x}-{y} is missing the mark at {x!r}")

    @classmethod
    def from_edges(
        cls,
        vertices: Iterable[str],
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[tuple[str, str]] = (),
        circles: Iterable[tuple[str, str, str, str]] = (),
    ) -> "MarkedMixedGraph":
        """Build from ``a -> b`` pairs, ``a <-> b`` pairs and explicit
        ``(a, b, mark_at_a, mark_at_b)`` tuples."""
        marks: dict[tuple[str, str], str] = {}

        def put(a, b, ma, mb):
            if (a, b) in marks:
                raise GraphError(f"more than one edge between {a!r} and {b!r}")
            marks[(b, a)] = ma
            marks[(a, b)] = mb

        for a, b in directed:
            put(a, b, TAIL, ARROW)
        for a, b in bidirected:
            put(a, b, ARROW, ARROW)
        for a, b, ma, mb in circles:
            put(a, b, ma, mb)
        return cls(vertices, marks)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def marks(self) -> dict[tuple[str, str], str]:
        return dict(self._marks)

    def mark(self, x: str, y: str) -> str | None:
        """Mark at ``y`` on the edge ``x - y`` (None when not adjacent)."""
        return self._marks.get((x, y))

    def adjacent(self, x: str, y: str) -> bool:
        return (x, y) in self._marks

    def neighbors(self, x: str) -> frozenset[str]:
        return self._adj.get(x, frozenset())

    @cached_property
    def _adj(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self._vertices}
        for x, y in self._marks:
            adj[x].add(y)
        return {v: frozenset(s) for v, s in adj.items()}

    def edges(self) -> list[tuple[str, str, str, str]]:
        """Edges as ``(u, v, mark_at_u, mark_at_v)`` with ``u < v``, sorted."""
        return sorted(
            (x, y, self._marks[(y, x)], self._marks[(x, y)]) for x, y in self._marks if x < y
        )

    @cached_property
    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(p) for p in self._marks)

    def is_directed(self, x: str, y: str) -> bool:
        """True for ``x -> y``."""
        return self._marks.get((x, y)) == ARROW and self._marks.get((y, x)) == TAIL

    def is_bidirected(self, x: str, y: str) -> bool:
        return self._marks.get((x, y)) == ARROW and self._marks.get((y, x)) == ARROW

    def has_circles(self) -> bool:
        return CIRCLE in self._marks.values()

    def bidirected_edges(self) -> list[tuple[str, str]]:
        return [(u, v) for u, v, mu, mv in self.edges() if mu == ARROW and mv == ARROW]

    def directed_edges(self) -> list[tuple[str, str]]:
        out = []
        for u, v, mu, mv in self.edges():
            if mu == TAIL and mv == ARROW:
                out.append((u, v))
            elif mu == ARROW and mv == TAIL:
                out.append((v, u))
        return sorted(out)

    def key(self) -> tuple:
        return (self._vertices, tuple(self.edges()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MarkedMixedGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._marks == other._marks

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        sym = {TAIL: "-", ARROW: ">", CIRCLE: "o"}
        left = {TAIL: "-", ARROW: "<", CIRCLE: "o"}
        es = [f"{u}{left[mu]}-{sym[mv]}{v}" for u, v, mu, mv in self.edges()]
        return f"MarkedMixedGraph({' '.join(self._vertices)}; {' '.join(es)})"

    def induced(self, keep: Iterable[str]) -> "MarkedMixedGraph":
        keep = set(keep)
        return MarkedMixedGraph(
            keep, {(x, y): m for (x, y), m in self._marks.items() if x in keep and y in keep}
        )

    def as_mdag(self) -> MDag:
        """Read a circle-free graph with only -> and <-> edges as an mDAG.

        Bidirected edges become two-element facets.  No acyclicity check is
        made here; callers decide whether cyclic input is an error.
        """
        directed, facets = [], []
        for u, v, mu, mv in self.edges():
            if mu == TAIL and mv == ARROW:
                directed.append((u, v))
            elif mu == ARROW and mv == TAIL:
                directed.append((v, u))
            elif mu == ARROW and mv == ARROW:
                facets.append((u, v))
            else:
                raise GraphError(f"edge {u}-{v} is neither directed nor bidirected")
        return MDag(self._vertices, directed, facets, check=False)


def format_marked(m: MarkedMixedGraph, style: str = "mag") -> str:
    """Serialize a marked graph.

    ``style='mag'`` writes ``edge``/``biedge`` lines and requires a circle-free
    graph of directed and bidirected edges; ``style='pag'`` writes one
    ``mark a b <end-a> <end-b>`` line per edge.
    """
    lines = ["vertices " + " ".join(m.vertices)]
    if style == "mag":
        lines += [f"edge {a} {b}" for a, b in m.directed_edges()]
        lines += [f"biedge {a} {b}" for a, b in m.bidirected_edges()]
        if len(m.directed_edges()) + len(m.bidirected_edges()) != len(m.edges()):
            raise GraphError("graph has edges that are neither directed nor bidirected")
    elif style == "pag":
        lines += [f"mark {u} {v} {mu} {mv}" for u, v, mu, mv in m.edges()]
    else:
        raise ValueError(f"unknown style {style!r}")
    return "\n".join(lines) + "\n"


def parse_marked(text: str) -> MarkedMixedGraph:
    """Parse the output of :func:`format_marked` (either style)."""
    vertices: list[str] | None = None
    directed, bidirected, general = [], [], []
    for lineno, toks in _tokens(text):
        col, kw = toks[0]
        args = [t for _, t in toks[1:]]
        if vertices is None:
            if kw != "vertices":
                raise ParseError("expected 'vertices' as the first statement", lineno, col)
            vertices = args
            continue
        if kw in ("edge", "biedge"):
            if len(args) != 2:
                raise ParseError(f"'{kw}' takes exactly two vertices", lineno, col)
            (directed if kw == "edge" else bidirected).append(tuple(args))
        elif kw == "mark":
            if len(args) != 4 or args[2] not in MARKS or args[3] not in MARKS:
                raise ParseError("'mark' takes two vertices and two marks", lineno, col)
            general.append(tuple(args))
        else:
            raise ParseError(f"unknown statement {kw!r}", lineno, col)
    if vertices is None:
        raise ParseError("missing 'vertices' statement")
    return MarkedMixedGraph.from_edges(vertices, directed, bidirected, general)
