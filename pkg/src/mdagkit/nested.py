"""Fixing, fixing-sequence search and nested (Verma) constraint discovery."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Iterator, NamedTuple

from .graph import GraphError, MDag, maximal_sets
from .projection import MAX_MAG_VERTICES, _find_separator
from .separation import is_fixable, reach_mask

__all__ = [
    "NestedWitness",
    "CIStatement",
    "IndependenceModel",
    "NonDagPattern",
    "fix_graph",
    "fix_sequence",
    "reachable_graphs",
    "find_nested_constraints",
    "detect_nondag_pattern",
]


def fix_graph(g: MDag, v: str) -> MDag:
    """Fix ``v``: drop every edge with an arrowhead at ``v`` and mark it context."""
    if v not in g.vertex_set:
        raise GraphError(f"unknown vertex {v!r}")
    if v in g.context:
        raise GraphError(f"{v!r} is already fixed")
    if not is_fixable(g, v):
        raise GraphError(f"{v!r} is not fixable")
    return MDag(
        g.vertices,
        [(a, b) for a, b in g.directed if b != v],
        maximal_sets(f - {v} for f in g.facets),
        g.context | {v},
        check=False,
    )


def fix_sequence(g: MDag, sigma: Iterable[str]) -> MDag:
    for v in sigma:
        g = fix_graph(g, v)
    return g


def reachable_graphs(g: MDag, max_depth: int | None = None) -> list[tuple[tuple[str, ...], MDag]]:
    """Every graph reachable by a sequence of valid fixings.

    Breadth first, so each graph is reported with a shortest sequence (ties
    go to the lexicographically smallest).  Includes ``((), g)``.
    """
    seen = {g: ()}
    queue = deque([g])
    while queue:
        h = queue.popleft()
        sigma = seen[h]
        if max_depth is not None and len(sigma) >= max_depth:
            continue
        for v in h.random_vertices:
            if is_fixable(h, v):
                nxt = fix_graph(h, v)
                if nxt not in seen:
                    seen[nxt] = sigma + (v,)
                    queue.append(nxt)
    return sorted(((s, h) for h, s in seen.items()), key=lambda t: (len(t[0]), t[0]))


@dataclass(frozen=True, order=True)
class NestedWitness:
    """``A _||_ B | C`` holds in the graph obtained by fixing ``sigma``.

    ``C`` always contains the fixed vertices.
    """

    sigma: tuple[str, ...]
    A: frozenset[str]
    B: frozenset[str]
    C: frozenset[str]

    def as_dict(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "A": sorted(self.A),
            "B": sorted(self.B),
            "C": sorted(self.C),
        }

    def describe(self) -> str:
        def xs(s):
            return ", ".join(f"X_{v}" for v in sorted(s))

        cond = f" | {xs(self.C)}" if self.C else ""
        return f"{xs(self.A)} ⟂ {xs(self.B)}{cond} after fixing {', '.join(self.sigma)}"


class _Seps:
    """Memoised open-walk reachability for one graph."""

    def __init__(self, g: MDag):
        self.g = g
        self.cache: dict[tuple[int, int], int] = {}

    def reach(self, a: int, c: int) -> int:
        key = (a, c)
        r = self.cache.get(key)
        if r is None:
            r = self.cache[key] = reach_mask(self.g, a, c)
        return r

    def sep(self, a: int, b: int, c: int) -> bool:
        return not self.reach(a, c) & b


def _submasks(m: int) -> Iterator[int]:
    """All submasks of ``m``, starting with ``m`` itself and ending with 0."""
    s = m
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & m


def _inseparable(g: MDag, i: int, j: int) -> bool:
    rest = [k for k in range(g.n) if k != i and k != j]
    return _find_separator(g, i, j, rest) is None


def find_nested_constraints(g: MDag, max_depth: int | None = None) -> list[NestedWitness]:
    """Separations that appear only after fixing.

    A witness ``({a}, {b}, C)`` for a reachable ``(sigma, G*)`` requires

    * ``a`` and ``b`` outside ``sigma`` and m-separated in ``G*`` given
      ``C = sigma + C0``, with ``C0`` inclusion-minimal for that;
    * no subset of the other vertices m-separates ``a`` and ``b`` in ``g``.

    The second condition makes the constraint impossible to obtain from an
    ordinary conditional independence between ``a`` and ``b``, whatever the
    conditioning set.  Pairs are singletons, which is what inclusion
    minimality leaves once the pair itself is inseparable in ``g``.
    """
    if g.context:
        raise GraphError("find_nested_constraints expects a graph without context vertices")
    if g.n > MAX_MAG_VERTICES:
        raise GraphError(f"graphs above {MAX_MAG_VERTICES} vertices are refused")
    pairs = [(i, j) for i, j in combinations(range(g.n), 2) if _inseparable(g, i, j)]
    out = []
    if not pairs:
        return out
    for sigma, h in reachable_graphs(g, max_depth):
        if not sigma:
            continue
        seps = _Seps(h)
        smask = g.mask(sigma)
        free = g.full_mask & ~smask
        for i, j in pairs:
            if (smask >> i) & 1 or (smask >> j) & 1:
                continue
            pool = free & ~(1 << i) & ~(1 << j)
            hits = [c0 for c0 in _submasks(pool) if seps.sep(1 << i, 1 << j, c0 | smask)]
            for c0 in hits:
                if any(c0 & other == other and other != c0 for other in hits):
                    continue
                out.append(
                    NestedWitness(sigma, frozenset((g.names[i],)), frozenset((g.names[j],)), g.unmask(c0 | smask))
                )
    out.sort(key=lambda w: (len(w.sigma), w.sigma, sorted(w.A), sorted(w.B), len(w.C), sorted(w.C)))
    return out


# ---------------------------------------------------------------------------
# independence models


@dataclass(frozen=True)
class CIStatement:
    A: frozenset[str]
    B: frozenset[str]
    C: frozenset[str] = frozenset()


class IndependenceModel:
    """A set of conditional independences that can be queried by membership."""

    def __init__(self, vertices: Iterable[str], holds: Callable[[frozenset, frozenset, frozenset], bool]):
        self.vertices = tuple(sorted(set(vertices)))
        self._holds = holds

    def holds(self, a: Iterable[str] | str, b: Iterable[str] | str, c: Iterable[str] = ()) -> bool:
        A = frozenset((a,)) if isinstance(a, str) else frozenset(a)
        B = frozenset((b,)) if isinstance(b, str) else frozenset(b)
        return self._holds(A, B, frozenset(c))

    @classmethod
    def from_graph(cls, g: MDag) -> "IndependenceModel":
        seps = _Seps(g)
        return cls(g.names, lambda A, B, C: seps.sep(g.mask(A), g.mask(B), g.mask(C)))

    @classmethod
    def from_statements(cls, vertices: Iterable[str], statements: Iterable[CIStatement]) -> "IndependenceModel":
        """Exactly the listed statements, closed only under symmetry."""
        known = set()
        for s in statements:
            known.add((s.A, s.B, s.C))
            known.add((s.B, s.A, s.C))
        return cls(vertices, lambda A, B, C: (A, B, C) in known)


class NonDagPattern(NamedTuple):
    v: str
    s: str
    a: str
    b: str
    D: frozenset[str]


def detect_nondag_pattern(model: IndependenceModel) -> NonDagPattern | None:
    """Search for ``v _||_ s``, ``a _||_ b | D``, not ``a _||_ b | D + s``.

    Either ``v`` is one of ``a, b``, or ``v`` lies in ``D`` and no proper
    subset of ``D`` separates ``a`` and ``b``.  A hit certifies that no DAG
    represents the model faithfully.
    """
    vs = model.vertices
    for a, b in combinations(vs, 2):
        rest = [x for x in vs if x not in (a, b)]
        for size in range(len(rest) + 1):
            for D in combinations(rest, size):
                Dset = frozenset(D)
                if not model.holds(a, b, Dset):
                    continue
                minimal = not any(
                    model.holds(a, b, frozenset(E))
                    for k in range(size)
                    for E in combinations(D, k)
                )
                for s in rest:
                    if s in Dset or model.holds(a, b, Dset | {s}):
                        continue
                    cands = [a, b] + (sorted(Dset) if minimal else [])
                    for v in cands:
                        if model.holds(v, s, ()):
                            return NonDagPattern(v, s, a, b, Dset)
    return None

