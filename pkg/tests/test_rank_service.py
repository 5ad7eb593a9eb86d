import pytest

from app.algebra.dg_module import DgSModule, validate_s_module
from app.algebra.errors import InvalidModuleError
from app.algebra.graded import GradedPoly
from app.services.model_service import ModelService
from app.services.rank_service import (
    PARITY_VIOLATED,
    SATISFIED,
    WINDOW_FAILURE,
    ZERO_HOMOLOGY,
    RankService,
    cone_module,
    generate_instance,
    generate_regular,
    generate_semifree,
    koszul_module,
    parity_equality_check,
    quotient_homology_dim,
    rank_check,
    render_reports,
)


def test_koszul_complex_meets_the_bound():
    report = rank_check(koszul_module(3))
    assert report.verdict == SATISFIED
    assert report.rank == report.bound == 8
    assert report.homology == {0: 1}
    assert report.parity == "even"
    assert report.quotient_homology_dim == 8
    assert report.omega_dim == 8


def test_cone_violates_the_parity_hypothesis():
    report = rank_check(cone_module(1, [2]))
    assert report.verdict == PARITY_VIOLATED
    assert report.parity == "mixed"
    assert report.homology == {-1: 1, 0: 1}
    assert report.rank == 2


def test_cone_on_a_variable_is_the_residue_field():
    report = rank_check(cone_module(1, [1]))
    assert report.verdict == SATISFIED
    assert report.homology == {0: 1}


def test_contractible_module_has_zero_homology():
    m = DgSModule.build(2, [("u", 0), ("v", 1)], {(0, 1): GradedPoly.one(2)})
    report = rank_check(m)
    assert report.verdict == ZERO_HOMOLOGY
    assert report.homology == {}
    assert quotient_homology_dim(m) == 0


def test_free_module_fails_the_window():
    m = DgSModule.build(1, [("e", 0)])
    report = rank_check(m)
    assert report.verdict == WINDOW_FAILURE
    assert "window too small" in report.detail


def test_parity_equality_on_the_koszul_complex():
    report = parity_equality_check(koszul_module(2))
    assert report.holds
    assert report.omega_dim == 4 == report.quotient_homology_dim
    assert report.to_dict()["holds"] is True


def test_parity_equality_needs_one_parity():
    with pytest.raises(InvalidModuleError):
        parity_equality_check(cone_module(1, [2]))
    with pytest.raises(InvalidModuleError):
        parity_equality_check(DgSModule.build(1, [("u", 0), ("v", 1)], {(0, 1): GradedPoly.one(1)}))


def test_cone_needs_matching_exponents():
    with pytest.raises(InvalidModuleError):
        cone_module(2, [1])


@pytest.mark.parametrize("r, m, seed", [(1, 4, 0), (2, 6, 3), (3, 8, 11)])
def test_semifree_instances_are_valid_and_seeded(r, m, seed):
    module = generate_semifree(r, m, seed=seed)
    assert module.rank == m
    assert validate_s_module(module).valid
    assert generate_semifree(r, m, seed=seed) == module


@pytest.mark.parametrize("seed", range(8))
def test_semifree_homology_is_one_copy_of_k_per_koszul_block(seed):
    report = rank_check(generate_semifree(2, 8, seed=seed), seed=seed)
    assert report.verdict in (SATISFIED, PARITY_VIOLATED)
    assert report.quotient_homology_dim == 4 * report.homology_dim
    assert report.rank >= report.quotient_homology_dim


def test_semifree_odd_remainder_leaves_a_free_generator():
    module = generate_semifree(1, 3, seed=5)
    assert module.rank == 3
    assert rank_check(module).verdict == WINDOW_FAILURE


def test_semifree_below_one_block_is_contractible():
    report = rank_check(generate_semifree(3, 6, seed=2))
    assert report.verdict == ZERO_HOMOLOGY
    assert report.quotient_homology_dim == 0


def test_unknown_family():
    with pytest.raises(InvalidModuleError):
        generate_instance("lattice", 2, 4, 0)
    with pytest.raises(InvalidModuleError):
        generate_semifree(2, 0)
    with pytest.raises(InvalidModuleError):
        generate_semifree(0, 4)


@pytest.mark.parametrize("seed", range(12))
def test_regular_instances(seed):
    module = generate_regular(2, seed)
    assert validate_s_module(module).valid
    report = rank_check(module, seed=seed)
    assert report.verdict in (SATISFIED, PARITY_VIOLATED)
    assert report.rank >= report.quotient_homology_dim >= report.bound
    if report.verdict == SATISFIED:
        assert report.omega_dim == report.quotient_homology_dim


@pytest.mark.slow
def test_regular_suite_in_three_variables():
    reports = RankService().batch(range(20), r=3, m=0, family="regular")
    assert [row["seed"] for row in reports] == list(range(20))
    assert all(row["verdict"] in (SATISFIED, PARITY_VIOLATED) for row in reports)
    assert any(row["verdict"] == SATISFIED for row in reports)


def test_batch_does_not_depend_on_workers():
    service = RankService()
    serial = service.batch([3, 1, 2, 1], r=2, m=0, family="regular", jobs=1)
    parallel = service.batch([3, 1, 2, 1], r=2, m=0, family="regular", jobs=4)
    assert serial == parallel
    assert [row["seed"] for row in serial] == [1, 2, 3]


def test_render_reports():
    text = render_reports([rank_check(koszul_module(1), seed=7)])
    lines = text.splitlines()
    assert "verdict" in lines[0]
    assert lines[2].split()[0] == "7"
    assert lines[2].endswith(SATISFIED)


@pytest.mark.slow
def test_semifree_suite_meets_the_bound():
    service = RankService()
    reports = (
        service.batch(range(200), r=1, m=6)
        + service.batch(range(200), r=2, m=8)
        + service.batch(range(100), r=3, m=10)
    )
    assert len(reports) == 500
    verdicts = [row["verdict"] for row in reports]
    assert set(verdicts) <= {SATISFIED, PARITY_VIOLATED}
    assert verdicts.count(SATISFIED) > 400
    for row in reports:
        assert row["rank"] >= row["quotient_homology_dim"] >= row["bound"]


@pytest.mark.slow
def test_carlsson_model_agrees_on_semifree_instances():
    service = ModelService()
    for seed in range(100):
        r = 1 + seed % 2
        module = generate_semifree(r, 2 ** r + 2, seed=seed)
        _, comparison = service.carlsson(module)
        assert comparison.agree, f"seed {seed}: {comparison.model} != {comparison.oracle}"
