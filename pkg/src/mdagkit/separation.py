"""m-separation, e-separation, Markov blankets, districts and fixability."""

from __future__ import annotations

from typing import Iterable

from .graph import GraphError, MDag, bits, induced_subgraph

__all__ = [
    "m_separated",
    "e_separated",
    "d_separated",
    "d_separated_mask",
    "open_path",
    "reach_mask",
    "markov_blanket",
    "markov_blanket_formula",
    "is_fixable",
    "fixable_by_walks",
    "districts",
]

VertexSet = Iterable[str] | str


def _vs(x: VertexSet | None) -> frozenset[str]:
    if x is None:
        return frozenset()
    if isinstance(x, str):
        return frozenset((x,))
    return frozenset(x)


def _query_masks(g: MDag, *sets: frozenset[str]) -> list[int]:
    masks = [g.mask(s) for s in sets]
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if masks[i] & masks[j]:
                overlap = sorted(g.unmask(masks[i] & masks[j]))
                raise GraphError(f"query sets overlap in {overlap}")
    return masks


def reach_mask(g: MDag, src: int, cond: int) -> int:
    """Vertices reachable from ``src`` by a walk that is open given ``cond``.

    States are (vertex, arrived-with-arrowhead).  An internal vertex is a
    collider when both the arriving and leaving edge carry an arrowhead at
    it; a facet traversal counts as an arrowhead at both ends.
    """
    pa, ch, sib = g.pa_masks, g.ch_masks, g.sib_masks
    ancond = g.an_mask(cond)
    head = 0
    tail = 0
    for v in bits(src):
        head |= ch[v] | sib[v]
        tail |= pa[v]
    seen_h = 0
    seen_t = 0
    while head or tail:
        head &= ~seen_h
        tail &= ~seen_t
        seen_h |= head
        seen_t |= tail
        nh = 0
        nt = 0
        for v in bits(head & ancond):
            nt |= pa[v]
            nh |= sib[v]
        for v in bits(head & ~cond):
            nh |= ch[v]
        for v in bits(tail & ~cond):
            nh |= ch[v] | sib[v]
            nt |= pa[v]
        head, tail = nh, nt
    return seen_h | seen_t


def m_separated(g: MDag, a: VertexSet, b: VertexSet, c: VertexSet | None = None) -> bool:
    """True iff every path from ``a`` to ``b`` is blocked by ``c``."""
    A, B, C = _vs(a), _vs(b), _vs(c)
    ma, mb, mc = _query_masks(g, A, B, C)
    return not (reach_mask(g, ma, mc) & mb)


def e_separated(
    g: MDag, a: VertexSet, b: VertexSet, c: VertexSet | None = None, d: VertexSet | None = None
) -> bool:
    """m-separation after deleting ``d`` and every edge incident to it."""
    A, B, C, D = _vs(a), _vs(b), _vs(c), _vs(d)
    _query_masks(g, A, B, C, D)
    if not D:
        return m_separated(g, A, B, C)
    return m_separated(induced_subgraph(g, g.vertex_set - D), A, B, C)


def d_separated(dag: MDag, a: VertexSet, b: VertexSet, c: VertexSet | None = None) -> bool:
    """d-separation in a DAG by the moralisation criterion.

    Kept deliberately separate from :func:`reach_mask` so the two can check
    each other: restrict to the ancestral set of ``a | b | c``, marry
    parents, drop directions, delete ``c`` and test connectivity.
    """
    if dag.facets:
        raise GraphError("d_separated expects a DAG without bidirected facets")
    A, B, C = _vs(a), _vs(b), _vs(c)
    ma, mb, mc = _query_masks(dag, A, B, C)
    return d_separated_mask(dag, ma, mb, mc)


def d_separated_mask(dag: MDag, ma: int, mb: int, mc: int) -> bool:
    anc = dag.an_mask(ma | mb | mc)
    pa = dag.pa_masks
    adj = [0] * dag.n
    for v in bits(anc):
        ps = pa[v] & anc
        adj[v] |= ps
        for p in bits(ps):
            adj[p] |= (1 << v) | (ps & ~(1 << p))
    allowed = anc & ~mc
    seen = ma
    frontier = ma
    while frontier:
        nxt = 0
        for v in bits(frontier):
            nxt |= adj[v]
        frontier = nxt & allowed & ~seen
        seen |= frontier
    return not (seen & mb)


def open_path(
    g: MDag, a: VertexSet, b: VertexSet, c: VertexSet | None = None
) -> list[tuple[str, str]] | None:
    """Return one open path from ``a`` to ``b`` given ``c``, or None.

    The path is a list of ``(vertex, edge)`` steps; the edge string
    describes how the vertex was entered (``'->'``, ``'<-'`` or ``'<->'``)
    and is empty for the first vertex.  Depth-first over simple paths, so
    intended for small graphs.
    """
    A, B, C = _vs(a), _vs(b), _vs(c)
    ma, mb, mc = _query_masks(g, A, B, C)
    if not (reach_mask(g, ma, mc) & mb):
        return None
    names = g.names
    pa, ch, sib = g.pa_masks, g.ch_masks, g.sib_masks
    ancond = g.an_mask(mc)

    def moves(v: int):
        for w in bits(ch[v]):
            yield w, "->", False, True  # tail at v, head at w
        for w in bits(pa[v]):
            yield w, "<-", True, False
        for w in bits(sib[v]):
            yield w, "<->", True, True

    def dfs(v: int, head_in: bool | None, used: int, trail: list):
        if (1 << v) & mb and head_in is not None:
            return trail
        for w, sym, head_at_v, head_at_w in moves(v):
            if used & (1 << w):
                continue
            if head_in is not None:
                collider = head_in and head_at_v
                if collider and not (ancond >> v) & 1:
                    continue
                if not collider and (mc >> v) & 1:
                    continue
            found = dfs(w, head_at_w, used | (1 << w), trail + [(names[w], sym)])
            if found:
                return found
        return None

    for s in bits(ma):
        found = dfs(s, None, 1 << s, [(names[s], "")])
        if found:
            return found
    raise AssertionError("reachability and path search disagree")


def _random_vertex(g: MDag, v: str) -> int:
    i = g._check(v)
    if v in g.context:
        raise GraphError(f"{v!r} is a context vertex")
    return i


def markov_blanket(g: MDag, v: str) -> frozenset[str]:
    """Vertices reachable from ``v`` by a walk whose internal vertices are all
    colliders and whose first edge has an arrowhead at ``v``."""
    i = _random_vertex(g, v)
    pa, sib = g.pa_masks, g.sib_masks
    found = pa[i]
    # vertices entered through a bidirected edge may continue: they are
    # colliders as long as the next edge also has an arrowhead there
    through = sib[i]
    seen = 0
    while through:
        seen |= through
        nxt = 0
        for w in bits(through):
            found |= pa[w]
            nxt |= sib[w]
        through = nxt & ~seen
    return g.unmask((found | seen) & ~(1 << i))


def markov_blanket_formula(g: MDag, v: str) -> frozenset[str]:
    """``(dis(v) - {v}) | pa(dis(v))``, with ``v`` itself removed."""
    _random_vertex(g, v)
    dis = g.dis(v)
    parents = frozenset().union(*(g.pa(w) for w in dis))
    return ((dis - {v}) | parents) - {v}


def is_fixable(g: MDag, v: str) -> bool:
    """``de(v) & dis(v) == {v}``.  Context vertices are never fixable again."""
    i = g._check(v)
    if v in g.context:
        return False
    return g.de_mask(1 << i) & g.dis_mask(1 << i) == 1 << i


def fixable_by_walks(g: MDag, v: str) -> bool:
    """Fixability read literally: no strict descendant of ``v`` is reachable
    from ``v`` by a walk over bidirected edges only.  Written with plain sets
    as a check on :func:`is_fixable`."""
    g._check(v)
    if v in g.context:
        return False
    children: dict[str, set[str]] = {w: set() for w in g.vertices}
    for a, b in g.directed:
        children[a].add(b)
    strict_de: set[str] = set()
    stack = list(children[v])
    while stack:
        w = stack.pop()
        if w not in strict_de:
            strict_de.add(w)
            stack.extend(children[w])
    red: set[str] = set()
    stack = [v]
    while stack:
        w = stack.pop()
        for f in g.facets:
            if w in f:
                for x in f:
                    if x not in red:
                        red.add(x)
                        stack.append(x)
    return not (strict_de & red)


def districts(g: MDag) -> list[frozenset[str]]:
    """Partition of the random vertices into bidirected-connected components."""
    out = []
    left = g.mask(g.random_vertices)
    while left:
        low = left & -left
        comp = g.dis_mask(low)
        out.append(g.unmask(comp))
        left &= ~comp
    return sorted(out, key=sorted)
