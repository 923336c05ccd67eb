import json
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdagkit.checks import shipped_gallery
from mdagkit.graph import GraphError, MDag, parse_mdag
from mdagkit.nested import find_nested_constraints, fix_graph
from mdagkit.oracle import (
    MAX_CELLS,
    TOL_EXACT,
    TOL_REWEIGHT,
    DiscreteDistribution,
    OracleError,
    StructuralModel,
    chsh_value,
    chsh_variants,
    ci_gap,
    ci_holds,
    example1_distribution,
    fix_distribution,
    joint,
    marginalize,
    sample_marginal,
    sample_model,
)
from mdagkit.separation import is_fixable, m_separated

from conftest import mdags


def uniform(names, k=2):
    shape = (k,) * len(names)
    return DiscreteDistribution(tuple(names), shape, np.full(shape, 1 / k ** len(names)))


class TestDistribution:
    def test_rejects_bad_tables(self):
        with pytest.raises(OracleError):
            DiscreteDistribution(("a",), (2,), np.array([0.5, 0.6]))
        with pytest.raises(OracleError):
            DiscreteDistribution(("a",), (2,), np.array([1.5, -0.5]))
        with pytest.raises(OracleError):
            DiscreteDistribution(("a", "a"), (2, 2), np.full((2, 2), 0.25))
        with pytest.raises(OracleError):
            DiscreteDistribution(("a",), (3,), np.array([0.5, 0.5]))

    def test_table_is_read_only(self):
        p = uniform("ab")
        with pytest.raises(ValueError):
            p.table[0, 0] = 1.0

    def test_json_roundtrip(self):
        p = example1_distribution()
        q = DiscreteDistribution.from_json(json.dumps(p.to_json()))
        assert q.variables == p.variables and np.array_equal(q.table, p.table)

    def test_marginalize(self):
        p = example1_distribution()
        m = marginalize(p, ["a", "c"])
        assert m.variables == ("a", "c")
        assert np.allclose(m.table, 0.25)
        with pytest.raises(OracleError):
            marginalize(p, ["zz"])


def test_ci_gap_detects_dependence():
    t = np.array([[0.5, 0.0], [0.0, 0.5]])
    p = DiscreteDistribution(("x", "y"), (2, 2), t)
    assert ci_gap(p, "x", "y") == pytest.approx(0.25)
    assert ci_holds(uniform("xy"), "x", "y")
    with pytest.raises(OracleError):
        ci_gap(p, "x", "x")


def test_ci_gap_multiletter_names():
    p = uniform(["ab", "cd"])
    assert ci_gap(p, "ab", "cd") == 0.0


def test_structural_model_validation():
    dag = MDag("ab", [("a", "b")])
    good = {"a": np.array([0.3, 0.7]), "b": np.array([[0.5, 0.5], [0.1, 0.9]])}
    p = joint(StructuralModel(dag, {"a": 2, "b": 2}, good))
    assert p.table[1, 1] == pytest.approx(0.63)
    with pytest.raises(OracleError):
        StructuralModel(dag, {"a": 2, "b": 2}, {"a": good["a"], "b": good["a"]})
    with pytest.raises(OracleError):
        StructuralModel(MDag("ab", [], [{"a", "b"}]), {"a": 2, "b": 2}, good)


def test_cell_cap():
    g = MDag([f"v{i}" for i in range(8)], [])
    with pytest.raises(OracleError):
        sample_marginal(g, cards=10, max_cells=MAX_CELLS)


def test_sampling_is_seeded(fig):
    p = sample_marginal(fig["fig2i"], seed=3)
    q = sample_marginal(fig["fig2i"], seed=3)
    r = sample_marginal(fig["fig2i"], seed=4)
    assert np.array_equal(p.table, q.table) and not np.array_equal(p.table, r.table)


def test_latent_cardinality_default(fig):
    m = sample_model(fig["fig2i"], cards=2)
    assert m.cards["h1"] == 4
    m = sample_model(fig["fig2i"], cards=2, latent_cards={frozenset("bd"): 3})
    assert m.cards["h1"] == 3


def test_context_marginal(fig):
    g = fig["fig2ii"]
    p = sample_marginal(g, seed=0)
    assert np.allclose(marginalize(p, ["c"]).table, 0.5)
    q = sample_marginal(g, seed=0, context="sample")
    assert not np.allclose(marginalize(q, ["c"]).table, 0.5)
    with pytest.raises(OracleError):
        sample_model(g, context="bogus")


@given(mdags(max_n=4), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_samples_satisfy_every_m_separation(g, seed):
    p = sample_marginal(g, cards=2, seed=seed)
    for a, b in combinations(g.names, 2):
        rest = [v for v in g.names if v not in (a, b)]
        for k in range(len(rest) + 1):
            for c in combinations(rest, k):
                if m_separated(g, a, b, c):
                    assert ci_gap(p, [a], [b], c) <= TOL_EXACT


def test_generic_samples_break_unseparated_pairs(fig):
    p = sample_marginal(fig["fig2i"], seed=0)
    assert ci_gap(p, "a", "d", "c") > 1e-4


class TestFixing:
    def test_verma_constraint_after_fixing(self, fig):
        g = fig["fig2i"]
        for seed in range(20):
            p = sample_marginal(g, seed=seed)
            q = fix_distribution(p, g, "c")
            assert ci_gap(q, "a", "d", "c") <= TOL_REWEIGHT
            assert abs(q.table.sum() - 1) < 1e-12

    def test_custom_qv(self, fig):
        g = fig["fig2i"]
        q = fix_distribution(sample_marginal(g, seed=1), g, "c", qv=[0.2, 0.8])
        assert np.allclose(marginalize(q, ["c"]).table, [0.2, 0.8])

    def test_rejects_unfixable_vertex(self, fig):
        with pytest.raises(GraphError):
            fix_distribution(sample_marginal(fig["fig2i"]), fig["fig2i"], "b")

    def test_rejects_bad_qv(self, fig):
        g = fig["fig2i"]
        with pytest.raises(OracleError):
            fix_distribution(sample_marginal(g), g, "c", qv=[0.5, 0.6])

    def test_reweighting_keeps_unit_mass_for_any_positive_table(self):
        g = MDag("abc", [("a", "b")], [{"b", "c"}])
        t = np.random.default_rng(0).dirichlet(np.ones(8)).reshape(2, 2, 2)
        q = fix_distribution(DiscreteDistribution(("a", "b", "c"), (2, 2, 2), t), g, "b")
        assert abs(q.table.sum() - 1) < 1e-12

    def test_rejects_vanishing_conditional(self):
        g = MDag("ab", [("a", "b")])
        t = np.array([[0.5, 0.0], [0.25, 0.25]])
        with pytest.raises(OracleError):
            fix_distribution(DiscreteDistribution(("a", "b"), (2, 2), t), g, "b")


class TestChsh:
    def test_example1_reaches_four(self):
        p = example1_distribution()
        assert chsh_value(p, "a", "b", "c", "d") == pytest.approx(4, abs=1e-12)
        assert ci_holds(p, "a", "c")
        # outcome b does not depend on the remote setting c given a
        assert ci_holds(p, "b", "c", "a") and ci_holds(p, "d", "a", "c")

    def test_variants_cover_sign_flips(self):
        vals = chsh_variants(example1_distribution(), "a", "b", "c", "d")
        assert len(vals) == 16 and max(vals) == pytest.approx(4) and min(vals) == pytest.approx(-4)

    def test_uniform_is_zero(self):
        assert chsh_value(uniform("abcd"), "a", "b", "c", "d") == 0.0

    def test_roles_checked(self):
        with pytest.raises(OracleError):
            chsh_value(uniform("abcd"), "a", "a", "c", "d")
        with pytest.raises(OracleError):
            chsh_value(uniform("abcd", k=3), "a", "b", "c", "d")

    @pytest.mark.parametrize("seed", range(25))
    def test_local_model_respects_bound(self, fig, seed):
        p = sample_marginal(fig["fig2ii_shape"], seed=seed)
        assert max(chsh_variants(p, "a", "b", "c", "d")) <= 2 + TOL_REWEIGHT


# -- properties over the shipped gallery

GALLERY = {p.stem: parse_mdag(p.read_text()) for p in sorted(shipped_gallery().glob("*.mdag"))}


def _all_triples(names):
    """Every disjoint (A, B, C) with A and B non-empty, unordered in A/B."""
    for assign in product(range(4), repeat=len(names)):
        A = [v for v, x in zip(names, assign) if x == 1]
        B = [v for v, x in zip(names, assign) if x == 2]
        C = [v for v, x in zip(names, assign) if x == 3]
        if A and B and A[0] < B[0]:
            yield A, B, C


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_gallery_markov_soundness(name):
    g = GALLERY[name]
    seps = [t for t in _all_triples(g.names) if m_separated(g, *t)]
    for seed in range(50):
        p = sample_marginal(g, seed=seed)
        for A, B, C in seps:
            assert ci_gap(p, A, B, C) <= TOL_EXACT, (seed, A, B, C)


@pytest.mark.parametrize("name", [n for n, g in sorted(GALLERY.items()) if not g.context and g.n <= 6])
def test_gallery_nested_constraints_hold(name):
    g = GALLERY[name]
    ws = find_nested_constraints(g)
    for seed in range(10):
        p = sample_marginal(g, seed=seed)
        for w in ws:
            h, q = g, p
            for v in w.sigma:
                q = fix_distribution(q, h, v)
                h = fix_graph(h, v)
            assert ci_gap(q, w.A, w.B, w.C) <= TOL_REWEIGHT, (seed, w)


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_gallery_fixing_preserves_model(name):
    g = GALLERY[name]
    for v in g.random_vertices:
        if not is_fixable(g, v):
            continue
        h = fix_graph(g, v)
        seps = [t for a, b in combinations(h.names, 2) for t in _pair_triples(h, a, b)]
        for seed in range(5):
            q = fix_distribution(sample_marginal(g, seed=seed), g, v)
            for A, B, C in seps:
                assert ci_gap(q, A, B, C) <= TOL_REWEIGHT, (v, seed, A, B, C)


def _pair_triples(h, a, b):
    rest = [x for x in h.names if x not in (a, b)]
    for k in range(len(rest) + 1):
        for C in combinations(rest, k):
            if m_separated(h, a, b, C):
                yield [a], [b], list(C)
