import pytest

from app.algebra.dg_module import certify_free, euler_identity_check, homology_of_lambda_module
from app.algebra.errors import InvalidComplexError, NotFreeError, SchemaError
from app.algebra.gf2 import Gf2Matrix, homology_ranks
from app.algebra.equivariant import (
    aw_coproduct,
    builtin,
    cochain_algebra,
    interchange_defects,
    parse_complex,
    quotient_complex,
    random_free_complex,
    serialize_complex,
    to_lambda_module,
)


def test_parse_circle_completes_the_orbit(circle_doc):
    x = parse_complex(circle_doc)
    assert [c.name for c in x.cells] == ["e0", "g1.e0", "e1", "g1.e1"]
    assert x.boundary["g1.e1"] == frozenset({"e0", "g1.e0"})
    assert x.orbit_representatives() == ["e0", "e1"]


def test_circle_homology_and_quotient(circle_doc):
    x = parse_complex(circle_doc)
    module, certificate = to_lambda_module(x)
    assert homology_of_lambda_module(module).dims == {0: 1, 1: 1}
    assert certificate.orbit_names == {0: ("e0",), 1: ("e1",)}
    # the quotient is the real projective line
    q = quotient_complex(x)
    assert q.dims == {0: 1, 1: 1}
    assert q.differential(1).is_zero()


def test_action_does_not_depend_on_the_orbit_representative(circle_doc):
    moved = {**circle_doc, "boundary": {"g1.e1": [["1", "e0"], ["g1", "e0"]]}}
    first, _ = to_lambda_module(parse_complex(circle_doc))
    second, _ = to_lambda_module(parse_complex(moved))
    assert homology_of_lambda_module(second).dims == homology_of_lambda_module(first).dims
    assert second.complex.differential(1) == first.complex.differential(1)
    for n in (0, 1):
        assert second.t_action[0][n] == first.t_action[0][n]


@pytest.mark.parametrize("name, r, n, homology, quotient", [
    ("orbit", 2, 1, {0: 4}, {0: 1}),
    ("orbit", 3, 1, {0: 8}, {0: 1}),
    ("sphere", 1, 2, {0: 1, 1: 0, 2: 1}, {0: 1, 1: 1, 2: 1}),
    ("torus", 2, 1, {0: 1, 1: 2, 2: 1}, {0: 1, 1: 2, 2: 1}),
    ("simplicial-circle", 1, 1, {0: 1, 1: 1}, {0: 1, 1: 1}),
])
def test_builtins(name, r, n, homology, quotient):
    x = builtin(name, r, n)
    module, certificate = to_lambda_module(x)
    assert homology_ranks(module.complex) == homology
    assert homology_ranks(quotient_complex(x)) == quotient
    assert certify_free(module).representatives.keys() == certificate.representatives.keys()


def test_builtin_arguments():
    with pytest.raises(InvalidComplexError):
        builtin("sphere", 2, 1)
    with pytest.raises(InvalidComplexError):
        builtin("klein-bottle")


def test_fixed_point_is_not_free():
    doc = {"r": 1, "cells": [{"name": "a", "dim": 0}], "action": {"g1": {"a": "a"}}}
    with pytest.raises(NotFreeError):
        parse_complex(doc)


def test_missing_action_is_a_schema_error(circle_doc):
    del circle_doc["action"]
    with pytest.raises(SchemaError):
        parse_complex(circle_doc)


def test_boundary_must_square_to_zero():
    doc = {
        "r": 1,
        "cells": [
            {"name": "v", "dim": 0}, {"name": "g1.v", "dim": 0},
            {"name": "e", "dim": 1}, {"name": "g1.e", "dim": 1},
            {"name": "f", "dim": 2}, {"name": "g1.f", "dim": 2},
        ],
        "action": {"g1": {"v": "g1.v", "e": "g1.e", "f": "g1.f"}},
        "boundary": {"e": [["1", "v"]], "f": [["1", "e"]]},
    }
    with pytest.raises(InvalidComplexError):
        parse_complex(doc)


def test_serialize_then_parse(circle_doc):
    x = parse_complex(circle_doc)
    again = parse_complex(serialize_complex(x))
    assert again.cells == x.cells
    assert again.boundary == x.boundary


def test_alexander_whitney_on_the_simplicial_circle():
    x = builtin("simplicial-circle")
    delta = aw_coproduct(x)
    assert delta.shape == (64, 8)
    checks = interchange_defects(x)
    assert checks.coassociative
    assert checks.chain_map
    assert checks.group_equivariant == [True]
    # t = 1 + g is not grouplike, so the coproduct does not commute with it
    assert checks.t_equivariant == [False]


def test_aw_needs_vertices(circle_doc):
    with pytest.raises(InvalidComplexError):
        aw_coproduct(parse_complex(circle_doc))


def test_cup_product_is_associative():
    algebra = cochain_algebra(builtin("simplicial-circle"))
    mu = algebra.product
    identity = Gf2Matrix.identity(mu.rows)
    assert mu.shape == (8, 64)
    assert mu @ mu.kron(identity) == mu @ identity.kron(mu)
    assert algebra.complex.dims == {0: 4, -1: 4}


@pytest.mark.parametrize("r, seed", [(1, 0), (1, 5), (2, 3), (2, 11)])
def test_random_free_complexes_satisfy_the_euler_identity(r, seed):
    module, certificate = random_free_complex(r, seed, max_cells=16)
    report = euler_identity_check(module, certificate)
    assert report.identity_holds
    assert report.group_order == 2 ** r
