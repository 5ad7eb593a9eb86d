import random

import pytest
from hypothesis import given
import hypothesis.strategies as st

from app.algebra.errors import BoundsExceededError
from app.algebra.operad import (
    DEFAULT_SYSTEM,
    LEAF,
    MU,
    AssociativeOperad,
    ExteriorOperad,
    PathSequence,
    PlanarTree,
    WTildeOperad,
    bar_homology,
    corolla,
    enumerate_free,
    graft,
    irreducible_trees,
    normal_form,
    path_order_key,
    pbw_certificate,
    tree_to_path_sequence,
    wtilde_basis,
    wtilde_compose,
)


def t(i, child=LEAF):
    return PlanarTree(f"t{i}", (child,))


def mu(left=LEAF, right=LEAF):
    return PlanarTree(MU, (left, right))


def free_trees():
    """(r, tree) with a tree drawn from the free operad at small weight and arity"""
    return st.tuples(
        st.integers(min_value=1, max_value=2),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=3),
        st.integers(min_value=0, max_value=10 ** 6),
    ).map(lambda v: (v[0], enumerate_free(v[0], v[1], v[2]), v[3])).filter(lambda v: v[1]).map(
        lambda v: (v[0], v[1][v[2] % len(v[1])])
    )


def test_tree_basics():
    tree = mu(t(1), mu())
    assert tree.arity == 3
    assert tree.weight == 3
    assert str(tree) == "mu(t1(|),mu(|,|))"
    assert tree.leaf_words() == [(MU, "t1"), (MU, MU), (MU, MU)]
    assert corolla(MU, 2) == mu()


def test_graft_counts_leaves_left_to_right():
    assert graft(mu(), 1, t(2)) == mu(LEAF, t(2))
    assert graft(mu(mu(), LEAF), 1, t(1)) == mu(mu(LEAF, t(1)), LEAF)
    with pytest.raises(BoundsExceededError):
        graft(mu(), 2, LEAF)


def test_free_enumeration_sizes():
    # binary planar trees with three leaves
    assert len(enumerate_free(0, 2, 3)) == 2
    # words of length two in t1, t2
    assert len(enumerate_free(2, 2, 1)) == 4
    with pytest.raises(BoundsExceededError):
        enumerate_free(1, 99, 1)


def test_path_sequence_text():
    assert [str(p) for p in wtilde_basis(2, 1)] == [
        "(mu, mu)", "(mu, mu t{1})", "(mu t{1}, mu)", "(mu t{1}, mu t{1})",
    ]
    assert str(PathSequence(1, (0,))) == "1"
    assert str(PathSequence(3, (0, 0, 0b11))) == "(mu, mu^2, mu^2 t{1,2})"
    assert PathSequence(1, (0,)).is_identity
    assert PathSequence(3, (0b01, 0, 0b11)).weight == 5


@pytest.mark.parametrize("n, r", [(1, 1), (2, 1), (3, 1), (1, 3), (2, 2), (3, 2)])
def test_basis_size_and_order(n, r):
    basis = wtilde_basis(n, r)
    assert len(basis) == 2 ** (r * n)
    assert basis == sorted(basis)


@pytest.mark.parametrize("n, r", [(1, 2), (2, 1), (2, 2), (3, 1)])
def test_irreducible_trees_are_the_path_sequences(n, r):
    trees = irreducible_trees(n, r)
    sequences = {tree_to_path_sequence(tree) for tree in trees}
    assert None not in sequences
    assert len(trees) == len(sequences)
    assert sequences == set(wtilde_basis(n, r))


def test_path_sequence_tree_roundtrip():
    for p in wtilde_basis(3, 2):
        assert tree_to_path_sequence(p.to_tree()) == p
    assert tree_to_path_sequence(mu(mu(), LEAF)) is None
    assert tree_to_path_sequence(t(1, t(2))) is None


def test_unary_compositions():
    t1, t2 = PathSequence(1, (0b01,)), PathSequence(1, (0b10,))
    assert wtilde_compose(t2, 0, t1) == frozenset({PathSequence(1, (0b11,))})
    assert wtilde_compose(t1, 0, t2) == frozenset({PathSequence(1, (0b11,))})
    assert wtilde_compose(t1, 0, t1) == frozenset()


def test_t_distributes_over_the_product():
    t1 = PathSequence(1, (0b1,))
    product = PathSequence(2, (0, 0))
    (result,) = wtilde_compose(t1, 0, product)
    assert str(result) == "(mu t{1}, mu t{1})"
    # weight grows from 2 to 3, so the graded composition drops it
    assert WTildeOperad(1).compose(t1, 0, product) == frozenset()


def test_products_reassociate():
    product = PathSequence(2, (0, 0))
    assert wtilde_compose(product, 0, product) == frozenset({PathSequence(3, (0, 0, 0))})
    with pytest.raises(BoundsExceededError):
        wtilde_compose(product, 2, product)


@given(sample=free_trees(), seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_rewriting_is_confluent(sample, seed):
    _, tree = sample
    assert DEFAULT_SYSTEM.reduce(tree, random.Random(seed)) == DEFAULT_SYSTEM.reduce(tree)


@given(sample=free_trees(), seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_every_rewrite_lowers_the_path_order(sample, seed):
    r, tree = sample
    rng = random.Random(seed)
    current = tree
    while current is not None:
        found = DEFAULT_SYSTEM.redexes(current)
        if not found:
            break
        position, rule = rng.choice(found)
        following = DEFAULT_SYSTEM.step(current, position, rule)
        if following is not None:
            assert path_order_key(following, r) < path_order_key(current, r)
        current = following


def test_normal_form_of_a_nilpotent_chain():
    assert normal_form(mu(t(1, t(1)), LEAF)) == frozenset()
    assert normal_form(t(1, mu(t(2), LEAF))) == frozenset({PathSequence(2, (0b11, 0b01))})


@pytest.mark.parametrize("n, r", [(2, 1), (3, 1), (2, 2)])
def test_pbw_certificate_passes(n, r):
    report = pbw_certificate(n, r)
    assert report.passed
    assert report.pairs_checked > 0


@pytest.mark.parametrize("rule", ["associate", "commute"])
def test_pbw_certificate_fails_without_a_rule(rule):
    report = pbw_certificate(2, 2, DEFAULT_SYSTEM.without(rule))
    assert not report.passed
    assert report.failures


def test_pbw_certificate_composes_products_with_products():
    # arities 1 and 2 at r=1 have 2 and 4 basis elements; every pair, every slot
    report = pbw_certificate(2, 1)
    assert report.pairs_checked == 2 * 2 + 2 * 4 + 4 * 2 * 2 + 4 * 4 * 2
    unassociated = pbw_certificate(2, 1, DEFAULT_SYSTEM.without("associate"))
    assert any("(mu, mu) ∘1 (mu, mu)" in f for f in unassociated.failures)


def test_pbw_bounds():
    with pytest.raises(BoundsExceededError):
        pbw_certificate(5, 2)
    with pytest.raises(BoundsExceededError):
        wtilde_basis(0, 1)
    with pytest.raises(BoundsExceededError):
        wtilde_basis(5, 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_associative_operad_is_koszul(n):
    result = bar_homology(AssociativeOperad(), n, n + 1)
    assert result.koszul_dual_dim == 1
    assert sum(result.dims.values()) == 1


def test_bar_complex_of_as_in_weight_two():
    result = bar_homology(AssociativeOperad(), 2, 3)
    assert result.basis_sizes == {1: 1, 2: 2}
    assert result.dims == {1: 0, 2: 1}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exterior_operad_dual_is_polynomial(n):
    assert bar_homology(ExteriorOperad(1), n, 1).koszul_dual_dim == 1


@pytest.mark.parametrize("r, n", [(1, 1), (1, 3), (2, 2), (2, 3)])
def test_arity_one_of_wtilde_is_the_exterior_algebra(r, n):
    wtilde = bar_homology(WTildeOperad(r), n, 1)
    exterior = bar_homology(ExteriorOperad(r), n, 1)
    assert wtilde.dims == exterior.dims
    assert wtilde.basis_sizes == exterior.basis_sizes


def test_wtilde_bar_in_weight_two_arity_two():
    result = bar_homology(WTildeOperad(1), 2, 2)
    assert result.basis_sizes == {1: 2, 2: 3}
    assert result.dims == {1: 0, 2: 1}


def test_bar_bounds():
    with pytest.raises(BoundsExceededError):
        bar_homology(AssociativeOperad(), 9, 2)
