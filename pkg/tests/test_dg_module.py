import pytest

from app.algebra.errors import InvalidModuleError, NotFreeError, SchemaError, WindowError, WindowTooSmallError
from app.algebra.gf2 import Gf2Matrix, GradedKComplex
from app.algebra.graded import ExtElement, parse_poly
from app.algebra.dg_module import (
    DgLambdaModule,
    DgSModule,
    Window,
    certify_free,
    default_window,
    dual_homology,
    euler_identity_check,
    expand_in_window,
    free_lambda_module,
    homology_dims_in_window,
    homology_of_lambda_module,
    homology_of_s_module,
    lambda_module_from_dict,
    lambda_module_to_dict,
    reduce_mod_augmentation,
    s_module_from_dict,
    s_module_to_dict,
    validate_s_module,
)


@pytest.fixture
def cone():
    return DgSModule.build(1, [("e0", 0), ("e1", -1)], {(0, 1): parse_poly("x1^2", 1)})


def test_koszul_homology_is_the_ground_field(koszul2_doc):
    m = s_module_from_dict(koszul2_doc)
    assert validate_s_module(m).valid
    h = homology_of_s_module(m, [-4, 3])
    assert h.total_dim == 1
    assert h.degrees == [0]
    assert homology_dims_in_window(m, [-4, 3]) == h.dims


def test_cone_homology_and_action(cone):
    h = homology_of_s_module(cone, default_window(cone))
    assert h.degrees == [-1, 0]
    assert h.parity_classes() == [0, 1]
    # x1 sends the class of e0 to the class of x1·e0
    assert h.action(1, 0) == Gf2Matrix.from_rows([[1]])
    assert h.action_problems() == []


def test_margin_check(koszul2_doc):
    m = s_module_from_dict(koszul2_doc)
    with pytest.raises(WindowTooSmallError) as exc:
        homology_of_s_module(m, [-1, 1])
    assert exc.value.degree == 0
    assert exc.value.exit_code == 2


def test_window_without_interior():
    with pytest.raises(WindowError):
        Window(0, 1)
    assert Window(-2, 2).interior == [-1, 0, 1]
    assert Window(-2, 2).margins == (-1, 1)


def test_default_window_covers_reach(cone, koszul2_doc):
    assert default_window(cone, padding=2) == Window(-5, 2)
    assert default_window(s_module_from_dict(koszul2_doc), padding=1) == Window(-2, 1)


def test_expansion_dimensions(koszul2_doc):
    m = s_module_from_dict(koszul2_doc)
    c = expand_in_window(m, -2, 0)
    # four generators times the monomials of weight -n in two variables
    assert c.dims == {-2: 12, -1: 8, 0: 4}
    assert c.square_zero_failures() == []


def test_expansion_restricts_to_sub_windows(cone, koszul2_doc):
    for m in (cone, s_module_from_dict(koszul2_doc)):
        wide = expand_in_window(m, -5, 2)
        narrow = expand_in_window(m, -3, 1)
        for n in range(-3, 2):
            assert narrow.dim(n) == wide.dim(n)
        for n in range(-2, 2):
            assert narrow.differential(n) == wide.differential(n)


def test_validation_reports_every_problem():
    bad_degree = DgSModule.build(1, [("a", 0), ("b", 0)], {(0, 1): parse_poly("x1^2", 1)})
    report = validate_s_module(bad_degree)
    assert not report.valid
    assert "must have degree -1" in report.problems[0]

    not_square_zero = DgSModule.build(
        1, [("a", 0), ("b", 0), ("c", 0)],
        {(0, 1): parse_poly("x1", 1), (1, 2): parse_poly("x1", 1)},
    )
    assert any("∂²" in p for p in validate_s_module(not_square_zero).problems)


def test_json_document_roundtrip(koszul2_doc):
    assert s_module_to_dict(s_module_from_dict(koszul2_doc)) == koszul2_doc


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("generators"),
    lambda d: d["differential"].pop(),
    lambda d: d["generators"].append({"name": "e{}", "degree": 0}),
])
def test_malformed_documents(koszul2_doc, mutate):
    mutate(koszul2_doc)
    with pytest.raises(SchemaError):
        s_module_from_dict(koszul2_doc)


def test_reduction_mod_augmentation(cone, koszul2_doc):
    reduced = reduce_mod_augmentation(s_module_from_dict(koszul2_doc))
    assert reduced.dims == {0: 4}
    assert reduced.differential(0).is_zero()
    assert reduce_mod_augmentation(cone).dims == {0: 1, -1: 1}


def test_dual_homology_negates_degrees(cone):
    h = homology_of_s_module(cone, default_window(cone))
    dual = dual_homology(h)
    assert dual.degrees == [0, 1]
    assert dual.action(1, 1) == Gf2Matrix.from_rows([[1]])


def circle_lambda():
    return free_lambda_module(1, [("c0", 0), ("c1", 1)], {(0, 1): ExtElement.t(1, [1])})


def test_free_lambda_module_homology():
    module, certificate = circle_lambda()
    assert module.complex.dims == {0: 2, 1: 2}
    h = homology_of_lambda_module(module)
    assert h.dims == {0: 1, 1: 1}
    assert h.action_problems() == []
    assert certificate.rank(0) == certificate.rank(1) == 1
    assert certify_free(module).rank(1) == 1


def test_lambda_document_matches_builder():
    doc = {
        "r": 1,
        "generators": [{"name": "c0", "degree": 0}, {"name": "c1", "degree": 1}],
        "differential": [["0", "t{1}"], ["0", "0"]],
    }
    module, _ = lambda_module_from_dict(doc)
    assert module.names[1] == ("c1", "t{1}.c1")


def regular_representation_doc():
    return {
        "r": 1,
        "generators": [{"name": "a", "degree": 0}, {"name": "b", "degree": 0}],
        "differential": [["0", "0"], ["0", "0"]],
        "action": {"g1": {"a": "b", "b": "a"}},
    }


def circle_action_doc():
    return {
        "r": 1,
        "generators": [
            {"name": "e0", "degree": 0},
            {"name": "g1.e0", "degree": 0},
            {"name": "e1", "degree": 1},
            {"name": "g1.e1", "degree": 1},
        ],
        "differential": [
            ["0", "0", "1", "1"],
            ["0", "0", "1", "1"],
            ["0", "0", "0", "0"],
            ["0", "0", "0", "0"],
        ],
        "action": {"g1": {"e0": "g1.e0", "g1.e0": "e0", "e1": "g1.e1", "g1.e1": "e1"}},
    }


@pytest.mark.parametrize("make_doc", [regular_representation_doc, circle_action_doc])
def test_action_document_roundtrip(make_doc):
    doc = make_doc()
    module, certificate = lambda_module_from_dict(doc)
    assert certificate is not None
    assert lambda_module_to_dict(module) == doc


def test_action_document_uses_the_given_permutation():
    module, certificate = lambda_module_from_dict(regular_representation_doc())
    assert module.t(1, 0) == Gf2Matrix.from_rows([[1, 1], [1, 1]])
    assert certificate.rank(0) == 1
    assert homology_of_lambda_module(module).dims == {0: 2}

    circle, _ = lambda_module_from_dict(circle_action_doc())
    h = homology_of_lambda_module(circle)
    assert h.dims == {0: 1, 1: 1}
    assert h.action_problems() == []


def test_action_document_without_a_free_action():
    doc = {
        "r": 1,
        "generators": [{"name": "v", "degree": 0}],
        "differential": [["0"]],
        "action": {"g1": {}},
    }
    module, certificate = lambda_module_from_dict(doc)
    assert certificate is None
    assert module.t(1, 0).is_zero()
    with pytest.raises(NotFreeError):
        certify_free(module)


@pytest.mark.parametrize("mutate, error", [
    (lambda d: d.__setitem__("action", {"g2": {"e0": "g1.e0"}}), SchemaError),
    (lambda d: d["differential"][0].__setitem__(2, "t{1}"), SchemaError),
    (lambda d: d["action"]["g1"].update({"e0": "e1", "e1": "e0"}), InvalidModuleError),
    (lambda d: d["differential"][0].__setitem__(3, "0"), InvalidModuleError),
])
def test_malformed_action_documents(mutate, error):
    doc = circle_action_doc()
    mutate(doc)
    with pytest.raises(error):
        lambda_module_from_dict(doc)


def test_free_presentation_has_no_permutation_document():
    module, _ = circle_lambda()
    with pytest.raises(SchemaError):
        lambda_module_to_dict(module)


def test_certify_free_rejects_trivial_action():
    c = DgLambdaModule(1, {0: ("v",)}, GradedKComplex({0: 1}), ({0: Gf2Matrix.zeros(1, 1)},))
    with pytest.raises(NotFreeError):
        certify_free(c)


def test_euler_identity():
    module, certificate = circle_lambda()
    report = euler_identity_check(module, certificate)
    assert report.chi_c == 0
    assert report.chi_quotient == 0
    assert report.identity_holds
    assert not report.parity_hypothesis
    assert report.homology_dim == 2
