"""Exact discrete distributions for checking graphical claims numerically.

Tables are dense numpy arrays, one axis per variable in ``variables`` order.
For binary variables state 0 stands for -1 and state 1 for +1.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .graph import GraphError, MDag
from .projection import canonical_dag
from .separation import is_fixable, markov_blanket

__all__ = [
    "TOL_EXACT",
    "TOL_REWEIGHT",
    "MAX_CELLS",
    "OracleError",
    "DiscreteDistribution",
    "StructuralModel",
    "joint",
    "marginalize",
    "ci_holds",
    "ci_gap",
    "sample_model",
    "sample_marginal",
    "fix_distribution",
    "chsh_value",
    "chsh_variants",
    "example1_distribution",
]

#: constraints that hold exactly by construction
TOL_EXACT = 1e-10
#: constraints checked after the fixing reweighting
TOL_REWEIGHT = 1e-9
#: refuse joint tables larger than this
MAX_CELLS = 10**7


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteDistribution:
    variables: tuple[str, ...]
    cards: tuple[int, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        if len(set(self.variables)) != len(self.variables):
            raise OracleError("duplicate variable")
        if t.shape != self.cards:
            raise OracleError(f"table shape {t.shape} does not match cards {self.cards}")
        if any(c < 1 for c in self.cards):
            raise OracleError("cardinalities must be positive")
        if (t < 0).any():
            raise OracleError("negative probability")
        # summation error grows with the table; 1e-12 per sqrt(cell)
        if abs(t.sum() - 1.0) > 1e-12 * max(1.0, t.size**0.5):
            raise OracleError(f"total mass {t.sum()!r} differs from 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def axis(self, v: str) -> int:
        try:
            return self.variables.index(v)
        except ValueError:
            raise OracleError(f"unknown variable {v!r}") from None

    def to_json(self) -> dict:
        return {
            "vars": list(self.variables),
            "cards": list(self.cards),
            "probs": [float(x) for x in self.table.ravel()],
        }

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "DiscreteDistribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        cards = tuple(obj["cards"])
        return cls(tuple(obj["vars"]), cards, np.array(obj["probs"], dtype=float).reshape(cards))


@dataclass
class StructuralModel:
    """A DAG with one conditional table per vertex.

    ``cpts[v]`` has one axis per parent (sorted by name) followed by the
    axis of ``v``; the last axis sums to one.
    """

    dag: MDag
    cards: dict[str, int]
    cpts: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dag.facets:
            raise OracleError("structural models need a DAG without facets")
        for v in self.dag.names:
            pa = sorted(self.dag.pa(v))
            want = tuple(self.cards[p] for p in pa) + (self.cards[v],)
            t = self.cpts.get(v)
            if t is None or t.shape != want:
                raise OracleError(f"table for {v!r} should have shape {want}")
            if not np.allclose(t.sum(axis=-1), 1.0, atol=1e-12, rtol=0):
                raise OracleError(f"rows of the table for {v!r} do not sum to 1")


def joint(model: StructuralModel, max_cells: int = MAX_CELLS) -> DiscreteDistribution:
    """Product of the conditional tables, axes in sorted vertex order."""
    names = model.dag.names
    cards = tuple(model.cards[v] for v in names)
    if int(np.prod(cards, dtype=float)) > max_cells:
        raise OracleError(f"joint table would have {int(np.prod(cards, dtype=float))} cells (cap {max_cells})")
    pos = {v: i for i, v in enumerate(names)}
    table = np.ones(cards)
    for v in names:
        axes = [pos[p] for p in sorted(model.dag.pa(v))] + [pos[v]]
        t = model.cpts[v]
        # move the cpt's axes into their place in the full table
        order = np.argsort(axes)
        t = np.transpose(t, order)
        shape = [1] * len(names)
        for ax in axes:
            shape[ax] = cards[ax]
        table = table * t.reshape(shape)
    return DiscreteDistribution(names, cards, table)


def marginalize(p: DiscreteDistribution, keep: Iterable[str]) -> DiscreteDistribution:
    keep = set(keep)
    for v in keep:
        p.axis(v)
    drop = tuple(i for i, v in enumerate(p.variables) if v not in keep)
    kept = [i for i, v in enumerate(p.variables) if v in keep]
    return DiscreteDistribution(
        tuple(p.variables[i] for i in kept),
        tuple(p.cards[i] for i in kept),
        p.table.sum(axis=drop) if drop else p.table,
    )


def _grouped(p: DiscreteDistribution, groups: list[list[str]]) -> np.ndarray:
    """Marginal table with one flattened axis per group."""
    flat = [v for g in groups for v in g]
    m = marginalize(p, flat)
    t = np.transpose(m.table, [m.axis(v) for v in flat])
    shape = [int(np.prod([p.cards[p.axis(v)] for v in g])) for g in groups]
    return t.reshape(shape)


def _names(x: Iterable[str] | str) -> list[str]:
    return [x] if isinstance(x, str) else sorted(set(x))


def ci_gap(p: DiscreteDistribution, A: Iterable[str], B: Iterable[str], C: Iterable[str] = ()) -> float:
    """``max |p(a,b|c) - p(a|c) p(b|c)|`` over states with ``p(c) > 0``.

    A bare string names a single variable."""
    A, B, C = _names(A), _names(B), _names(C)
    if not A or not B:
        return 0.0
    if set(A) & set(B) or set(A) & set(C) or set(B) & set(C):
        raise OracleError("query sets must be disjoint")
    t = _grouped(p, [A, B, C])
    pc = t.sum(axis=(0, 1))
    live = pc > 0
    if not live.any():
        return 0.0
    t = t[:, :, live] / pc[live]
    pa = t.sum(axis=1, keepdims=True)
    pb = t.sum(axis=0, keepdims=True)
    return float(np.abs(t - pa * pb).max())


def ci_holds(
    p: DiscreteDistribution, A: Iterable[str], B: Iterable[str], C: Iterable[str] = (), tol: float = TOL_EXACT
) -> bool:
    return ci_gap(p, A, B, C) <= tol


def _cards_for(g: MDag, cards: int | Mapping[str, int]) -> dict[str, int]:
    if isinstance(cards, int):
        out = {v: cards for v in g.names}
    else:
        out = dict(cards)
        missing = set(g.names) - set(out)
        if missing:
            raise OracleError(f"no cardinality for {sorted(missing)}")
    if any(c < 2 for c in out.values()):
        raise OracleError("cardinalities must be at least 2")
    return out


def sample_model(
    g: MDag,
    cards: int | Mapping[str, int] = 2,
    seed: int | None = 0,
    latent_cards: Mapping[frozenset[str], int] | None = None,
    context: str = "uniform",
) -> StructuralModel:
    """Random conditional tables on the canonical DAG of ``g``.

    Each latent gets the product of its children's cardinalities unless
    ``latent_cards`` (keyed by facet) says otherwise.  Rows are drawn from
    the flat Dirichlet.  Context vertices are roots whose marginal is
    uniform, or drawn like any other row with ``context="sample"``.
    """
    if context not in ("uniform", "sample"):
        raise OracleError("context must be 'uniform' or 'sample'")
    cd = canonical_dag(g)
    ca = _cards_for(g, cards)
    latent_cards = dict(latent_cards or {})
    for facet, h in cd.latent_map.items():
        ca[h] = latent_cards.get(facet, int(np.prod([ca[v] for v in facet])))
    rng = np.random.default_rng(seed)
    cpts = {}
    for v in cd.dag.names:
        pa = sorted(cd.dag.pa(v))
        shape = tuple(ca[p] for p in pa)
        if v in g.context and context == "uniform":
            cpts[v] = np.full(shape + (ca[v],), 1.0 / ca[v])
        else:
            cpts[v] = rng.dirichlet(np.ones(ca[v]), size=shape)
    return StructuralModel(cd.dag, ca, cpts)


def sample_marginal(
    g: MDag,
    cards: int | Mapping[str, int] = 2,
    seed: int | None = 0,
    latent_cards: Mapping[frozenset[str], int] | None = None,
    context: str = "uniform",
    max_cells: int = MAX_CELLS,
) -> DiscreteDistribution:
    """A random member of the marginal model of ``g`` over its vertices."""
    model = sample_model(g, cards, seed, latent_cards, context)
    return marginalize(joint(model, max_cells), g.names)


def fix_distribution(
    p: DiscreteDistribution,
    g: MDag,
    v: str,
    qv: Iterable[float] | None = None,
    tol: float = TOL_REWEIGHT,
) -> DiscreteDistribution:
    """Reweight ``p`` by ``q(x_v) / p(x_v | x_mb(v))``.

    ``qv`` defaults to uniform.  The reweighted table must have mass one
    within ``tol`` (otherwise :class:`OracleError`); it is then divided by
    that mass so rounding does not accumulate.
    """
    if not is_fixable(g, v):
        raise GraphError(f"{v!r} is not fixable")
    mb = sorted(markov_blanket(g, v))
    k = p.cards[p.axis(v)]
    q = np.full(k, 1.0 / k) if qv is None else np.asarray(list(qv), dtype=float)
    if q.shape != (k,) or (q <= 0).any() or abs(q.sum() - 1) > TOL_EXACT:
        raise OracleError("qv must be a strictly positive distribution over the states of v")
    vm = marginalize(p, [v] + mb)
    order = [vm.axis(v)] + [vm.axis(w) for w in mb]
    t = np.transpose(vm.table, order)
    pmb = t.sum(axis=0, keepdims=True)
    if (t <= 0).any():
        raise OracleError(f"p(x_{v} | x_mb) vanishes on some state")
    cond = t / pmb
    # broadcast cond and q onto p's axes
    axes = [p.axis(v)] + [p.axis(w) for w in mb]
    shape = [1] * len(p.variables)
    for ax in axes:
        shape[ax] = p.cards[ax]
    perm = np.argsort(axes)
    cond_full = np.transpose(cond, perm).reshape(shape)
    qshape = [1] * len(p.variables)
    qshape[p.axis(v)] = k
    new = p.table * q.reshape(qshape) / cond_full
    mass = new.sum()
    if abs(mass - 1.0) > tol:
        raise OracleError(f"reweighted mass {mass!r} is not 1; p is outside the model")
    return DiscreteDistribution(p.variables, p.cards, new / mass)


def _bd_expectations(p: DiscreteDistribution, a: str, b: str, c: str, d: str) -> np.ndarray:
    roles = [a, b, c, d]
    if len(set(roles)) != 4:
        raise OracleError("CHSH roles must be four distinct variables")
    for r in roles:
        if p.cards[p.axis(r)] != 2:
            raise OracleError(f"{r!r} is not binary")
    t = _grouped(p, [[a], [b], [c], [d]])
    pac = t.sum(axis=(1, 3))
    if (pac <= 0).any():
        raise OracleError("a setting context has zero probability")
    s = np.array([-1.0, 1.0])
    num = np.einsum("abcd,b,d->ac", t, s, s)
    return num / pac


def chsh_value(p: DiscreteDistribution, a: str, b: str, c: str, d: str) -> float:
    """``E[-1,+1] + E[+1,-1] + E[-1,-1] - E[+1,+1]`` where ``E[x_a, x_c]``
    is the conditional expectation of ``X_b X_d``."""
    E = _bd_expectations(p, a, b, c, d)
    return float(E[0, 1] + E[1, 0] + E[0, 0] - E[1, 1])


def chsh_variants(p: DiscreteDistribution, a: str, b: str, c: str, d: str) -> list[float]:
    """The CHSH expression under all 16 relabelings of the four variables'
    signs.  Flipping ``b`` or ``d`` negates the value; flipping ``a`` or
    ``c`` moves the minus sign to another setting pair."""
    E = _bd_expectations(p, a, b, c, d)
    out = []
    for fa, fb, fc, fd in itertools.product((0, 1), repeat=4):
        F = E[:: -1 if fa else 1, :: -1 if fc else 1] * (-1) ** (fb + fd)
        out.append(float(F[0, 1] + F[1, 0] + F[0, 0] - F[1, 1]))
    return out


def example1_distribution() -> DiscreteDistribution:
    """Settings ``a, c`` uniform; ``b = -d`` when ``a = c = +1`` and
    ``b = d`` otherwise, with the pair uniform over the allowed states.

    Variables are ordered ``(a, b, c, d)``.
    """
    t = np.zeros((2, 2, 2, 2))
    for xa, xc in itertools.product((0, 1), repeat=2):
        anti = xa == 1 and xc == 1
        for xb in (0, 1):
            xd = 1 - xb if anti else xb
            t[xa, xb, xc, xd] = 1 / 8
    return DiscreteDistribution(("a", "b", "c", "d"), (2, 2, 2, 2), t)
