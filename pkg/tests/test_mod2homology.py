from dataclasses import replace

import pytest

from app.core.errors import InputError, ModelConsistencyError, SchemaError
from app.core.mod2homology import (
    GF2Matrix,
    RealHomologyModel,
    all_builtin_models,
    ambient_surface,
    betti_x_minus_l,
    blowup_transform,
    builtin_model,
    conic_bundle_model,
    invariant_subspace,
    is_nontrivial_class,
    model_from_dict,
    model_to_dict,
    nullspace,
    quotient_dimension,
    rank,
    verify_claimed_basis,
)

EXPECTED_QUOTIENTS = {
    "dp2": 5,
    "dp1_S1": 7,
    "dp1_S7": 7,
    "dp1_N": 7,
    "f0_hy": 0,
    "f0_el": 0,
    "cp2": 0,
}


def swap_model():
    return RealHomologyModel(
        "swap", ("a", "b"), GF2Matrix.identity(2), GF2Matrix.from_rows([[0, 1], [1, 0]])
    )


# GF(2) linear algebra
def test_rank_values():
    assert rank(GF2Matrix.from_rows([[1, 1], [1, 1]])) == 1
    assert rank(GF2Matrix.identity(3)) == 3
    assert rank(GF2Matrix.zeros(2, 4)) == 0
    assert rank(GF2Matrix.from_rows([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2


def test_nullspace_value():
    m = GF2Matrix.from_rows([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert nullspace(m) == [(1, 1, 1)]


def test_entries_are_reduced_mod_two():
    assert GF2Matrix.from_rows([[3, 2]]) == GF2Matrix.from_rows([[1, 0]])


def test_packed_rows():
    m = GF2Matrix.from_rows([[1, 0, 1, 1, 0, 0, 0, 0, 1]])
    assert GF2Matrix.from_packed(m.packed(), 9) == m


def test_invariant_subspace_of_a_swap():
    assert invariant_subspace(swap_model()) == [(1, 1)]


# Built-in models
@pytest.mark.parametrize("n", range(1, 6))
def test_conic_bundle_quotient(n):
    model = conic_bundle_model(n)
    expected = 2 * n - 3 if n >= 2 else 0
    assert quotient_dimension(model) == expected
    assert verify_claimed_basis(model)


@pytest.mark.parametrize("name", sorted(EXPECTED_QUOTIENTS))
def test_builtin_quotients(name):
    model = builtin_model(name)
    assert quotient_dimension(model) == EXPECTED_QUOTIENTS[name]
    assert verify_claimed_basis(model)


def test_every_builtin_validates():
    for model in all_builtin_models():
        assert model.validate()


def test_model_dimensions_follow_the_betti_formula():
    assert builtin_model("f0_hy").dim == betti_x_minus_l(2, 2, False)
    assert builtin_model("f0_el").dim == betti_x_minus_l(2, 0, True)
    assert builtin_model("cp2").dim == betti_x_minus_l(1, 1, True)
    assert builtin_model("dp2").dim == betti_x_minus_l(8, 0, True)
    assert builtin_model("dp1_S1").dim == betti_x_minus_l(9, 0, True)
    assert builtin_model("dp1_N").dim == betti_x_minus_l(9, 1, True)
    for n in range(2, 6):
        assert conic_bundle_model(n).dim == betti_x_minus_l(2 * n + 2, 0, True)


def test_betti_formula():
    assert betti_x_minus_l(2, 2, False) == 4
    assert betti_x_minus_l(9, 0, True) == 8
    with pytest.raises(InputError):
        betti_x_minus_l(-1, 0, True)


def test_model_names():
    assert builtin_model("conic_bundle(3)").dim == 7
    assert builtin_model("conic_bundle", 4).dim == 9
    with pytest.raises(InputError):
        builtin_model("dp3")


# Ambient lattices
@pytest.mark.parametrize("n", range(1, 6))
def test_conic_bundle_pairing_is_unimodular(n):
    ambient = ambient_surface(f"conic_bundle({n})")
    assert len(ambient.labels) == 2 * n + 2
    assert rank(ambient.pairing) == 2 * n + 2


def test_del_pezzo_pairings_are_unimodular():
    assert rank(ambient_surface("dp2").pairing) == 8
    assert rank(ambient_surface("dp1").pairing) == 9


def test_dp1_distinguished_classes():
    dp1 = ambient_surface("dp1")
    n = dp1.vector("N")
    for i in range(1, 8):
        assert dp1.pair(n, dp1.vector(f"S{i}")) == 0
    assert dp1.pair(dp1.vector("S9"), dp1.vector("S1")) == 0
    e = dp1.vector("E")
    assert dp1.pair(e, dp1.vector("c1")) == 1
    assert dp1.pair(e, e) == 1
    assert dp1.pair(e, n) == 0


# Checks on models
def test_corrupted_claimed_basis_is_rejected():
    model = builtin_model("dp2")
    corrupted = replace(model, claimed_basis=(model.vector("c1"),) + model.claimed_basis[1:])
    assert not verify_claimed_basis(corrupted)
    short = replace(model, claimed_basis=model.claimed_basis[1:])
    assert not verify_claimed_basis(short)


def test_non_invariant_generator_is_inconsistent():
    model = builtin_model("dp2")
    broken = replace(model, g_generators=(model.vector("E"),))
    with pytest.raises(ModelConsistencyError):
        quotient_dimension(broken)


def test_tau_must_be_an_involution():
    model = RealHomologyModel(
        "cycle", ("a", "b", "c"), GF2Matrix.identity(3),
        GF2Matrix.from_rows([[0, 0, 1], [1, 0, 0], [0, 1, 0]]),
    )
    with pytest.raises(ModelConsistencyError):
        model.validate()


def test_nontrivial_classes():
    model = builtin_model("dp2")
    assert is_nontrivial_class(model, model.vector("S3"))
    assert is_nontrivial_class(model, model.vector("S3", "S5"))
    assert not is_nontrivial_class(model, model.vector("c1"))
    with pytest.raises(ModelConsistencyError):
        is_nontrivial_class(model, model.vector("E"))


@pytest.mark.parametrize("kind", ["conjugate_pair", "real_point_on_L"])
def test_blowups_keep_the_quotient(kind):
    for model in all_builtin_models(range(1, 4)):
        blown = blowup_transform(model, kind)
        assert blown.dim == model.dim + 2
        assert quotient_dimension(blown) == quotient_dimension(model)
        assert verify_claimed_basis(blown)
        twice = blowup_transform(blown, kind)
        assert quotient_dimension(twice) == quotient_dimension(model)


def test_unknown_blowup():
    with pytest.raises(InputError):
        blowup_transform(builtin_model("cp2"), "flip")


def test_model_json_round_trip():
    model = blowup_transform(builtin_model("dp1_N"), "real_point_on_L")
    loaded = model_from_dict(model_to_dict(model))
    assert loaded.labels == model.labels
    assert loaded.pairing == model.pairing
    assert loaded.tau == model.tau
    assert loaded.kernel_indices == model.kernel_indices
    assert loaded.g_generators == model.g_generators
    assert quotient_dimension(loaded) == quotient_dimension(model)


def test_malformed_model_json():
    with pytest.raises(SchemaError):
        model_from_dict({"labels": ["a"]})
