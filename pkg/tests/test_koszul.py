from dataclasses import replace

import pytest

from app.algebra.dg_module import (
    DgSModule,
    default_window,
    homology_dims_in_window,
    homology_of_lambda_module,
    homology_of_s_module,
    s_module_from_dict,
)
from app.algebra.equivariant import (
    builtin,
    cochain_algebra,
    parse_complex,
    random_free_complex,
    to_lambda_module,
)
from app.algebra.errors import (
    BoundsExceededError,
    DimensionMismatchError,
    InternalAssertionError,
    InvalidModuleError,
    TerminationBoundExceeded,
)
from app.algebra.gf2 import Contraction, Gf2Matrix, build_contraction
from app.algebra.graded import parse_poly
from app.algebra import koszul
from app.algebra.koszul import (
    CoalgebraTensor,
    Perturbation,
    bar_beta,
    carlsson_minimal,
    check_ainfty_relations,
    cobar_omega,
    compare_model_with_oracle,
    cup_product_oracle,
    lift_map,
    lift_sigma,
    minimal_hirsch_brown,
    model_homology_dims,
    perturbed_transfer,
    transfer_ainfty_products,
)


def hirsch_brown(x):
    module, certificate = to_lambda_module(x)
    return module, minimal_hirsch_brown(module, certificate)


def test_antipodal_circle(circle_doc):
    module, model = hirsch_brown(parse_complex(circle_doc))
    assert model.rank == 2
    assert model.is_minimal()
    assert model.twist_weights() == [2]
    # the model computes the homology of the real projective line
    assert sum(model_homology_dims(model).values()) == 2
    assert compare_model_with_oracle(model, module).agree


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_sphere_ladder(n):
    module, model = hirsch_brown(builtin("sphere", 1, n))
    assert model.rank == 2
    assert sum(model_homology_dims(model).values()) == n + 1
    if n:
        assert model.twist_weights() == [n + 1]
    assert compare_model_with_oracle(model, module).agree


@pytest.mark.parametrize("name, r", [("orbit", 1), ("orbit", 2), ("torus", 1), ("torus", 2)])
def test_models_agree_with_the_bar_construction(name, r):
    module, model = hirsch_brown(builtin(name, r))
    assert model.is_minimal()
    comparison = compare_model_with_oracle(model, module)
    assert comparison.degrees
    assert comparison.agree


@pytest.mark.slow
def test_models_of_random_free_complexes_agree_with_the_bar_construction():
    for seed in range(50):
        r = 1 + seed % 2
        module, certificate = random_free_complex(r, seed, max_cells=16)
        model = minimal_hirsch_brown(module, certificate)
        assert model.is_minimal()
        assert compare_model_with_oracle(model, module).agree, f"seed {seed}"


@pytest.mark.parametrize("r", [2, 3])
def test_free_orbit_gives_the_koszul_complex(r):
    module, model = hirsch_brown(builtin("orbit", r))
    assert model.rank == 2 ** r
    assert compare_model_with_oracle(model, module).agree
    assert model.twist_weights() == [1]
    assert sum(model_homology_dims(model).values()) == 1


def test_provenance_records_the_run(circle_doc):
    _, model = hirsch_brown(parse_complex(circle_doc))
    provenance = model.provenance
    assert provenance.construction == "hirsch-brown"
    assert provenance.weight_bound == 3
    assert provenance.source_homology == {0: 1, 1: 1}
    assert 1 <= provenance.series_length <= provenance.filtration_bound


def test_carlsson_on_the_koszul_complex(koszul2_doc):
    m = s_module_from_dict(koszul2_doc)
    window = default_window(m)
    model = carlsson_minimal(m, window)
    assert model.rank == 4
    assert model.is_minimal()
    assert model.provenance.extra["omega_differential_zero"]
    assert compare_model_with_oracle(model, m, window).agree


def test_carlsson_on_a_cone():
    cone = DgSModule.build(1, [("e0", 0), ("e1", -1)], {(0, 1): parse_poly("x1^2", 1)})
    window = default_window(cone)
    model = carlsson_minimal(cone, window)
    assert model.rank == 2
    assert not model.provenance.extra["omega_differential_zero"]
    assert homology_dims_in_window(model.module, window) == homology_dims_in_window(cone, window)


def test_cobar_needs_the_s_side(circle_doc):
    module, _ = to_lambda_module(parse_complex(circle_doc))
    with pytest.raises(DimensionMismatchError):
        cobar_omega(homology_of_lambda_module(module))


def test_cobar_of_the_ground_field(koszul2_doc):
    h = homology_of_s_module(s_module_from_dict(koszul2_doc), [-3, 2])
    omega = cobar_omega(h)
    assert omega.complex.dims == {0: 4}


def test_bar_construction_squares_to_zero(circle_doc):
    module, _ = to_lambda_module(parse_complex(circle_doc))
    tensor = bar_beta(module, 4)
    assert tensor.complex.square_zero_failures() == []
    assert tensor.weight_zero_part().dims == module.complex.dims
    with pytest.raises(BoundsExceededError):
        bar_beta(module, -1)


def test_perturbation_bound_is_enforced(circle_doc):
    module, _ = to_lambda_module(parse_complex(circle_doc))
    base = build_contraction(module.complex)
    big = CoalgebraTensor.build(1, 4, module.complex)
    small = CoalgebraTensor.build(1, 4, base.small)
    lifted = Contraction(
        big=big.complex,
        small=small.complex,
        i=lift_map(small, big, base.i, 0),
        p=lift_map(big, small, base.p, 0),
        h=lift_map(big, big, base.h, 1),
    )
    delta = lift_sigma(big, module.t_action)
    result = perturbed_transfer(lifted, Perturbation(big.complex, delta, 16))
    assert result.verify() == []
    with pytest.raises(TerminationBoundExceeded):
        perturbed_transfer(lifted, Perturbation(big.complex, delta, 1))


def test_products_on_the_simplicial_circle():
    algebra = cochain_algebra(builtin("simplicial-circle"))
    products = transfer_ainfty_products(algebra.complex, algebra.product)
    assert products.m2 == cup_product_oracle(algebra.complex, algebra.product)
    assert products.m2_associative
    assert products.stasheff_arity4
    assert products.m2.shape == (2, 4)


def test_products_reject_wrong_shape():
    algebra = cochain_algebra(builtin("simplicial-circle"))
    with pytest.raises(InvalidModuleError):
        transfer_ainfty_products(algebra.complex, Gf2Matrix.zeros(8, 8))
    with pytest.raises(BoundsExceededError):
        transfer_ainfty_products(algebra.complex, algebra.product, max_arity=4)


def circle_products():
    """Transferred products on H*(S^1) = k{1, a} with the index of 1 and of a"""
    algebra = cochain_algebra(builtin("simplicial-circle"))
    products = transfer_ainfty_products(algebra.complex, algebra.product)
    m2 = products.m2.to_array()
    n = m2.shape[0]
    unit = next(
        u for u in range(n)
        if all(m2[:, u * n + x].tolist() == [int(y == x) for y in range(n)] for x in range(n))
    )
    return products, unit, 1 - unit


def test_corrupted_m3_violates_the_stasheff_relation():
    products, unit, other = circle_products()
    n = 2
    check_ainfty_relations(products.m2, products.m3)
    # m3(1, 1, 1) = a makes the relation on (1, 1, 1, 1) an odd sum of a
    corruption = Gf2Matrix.from_entries(n, n ** 3, [(other, unit * n * n + unit * n + unit)])
    with pytest.raises(InternalAssertionError, match="Stasheff"):
        check_ainfty_relations(products.m2, products.m3 + corruption)


def test_non_associative_m2_is_rejected():
    products, unit, other = circle_products()
    # 1 · a = a + 1 breaks (1 · 1) · a = 1 · (1 · a)
    corruption = Gf2Matrix.from_entries(2, 4, [(unit, unit * 2 + other)])
    with pytest.raises(InternalAssertionError, match="associative"):
        check_ainfty_relations(products.m2 + corruption, products.m3)


def test_perturbation_series_longer_than_the_window_is_rejected(monkeypatch, circle_doc):
    module, certificate = to_lambda_module(parse_complex(circle_doc))

    def stretched(base, delta):
        return replace(perturbed_transfer(base, delta), series_length=99)

    monkeypatch.setattr(koszul, "perturbed_transfer", stretched)
    with pytest.raises(InternalAssertionError, match="window height"):
        minimal_hirsch_brown(module, certificate)


def test_carlsson_series_fits_in_the_window(koszul2_doc):
    m = s_module_from_dict(koszul2_doc)
    window = default_window(m)
    model = carlsson_minimal(m, window)
    assert 1 <= model.provenance.series_length <= window.height
