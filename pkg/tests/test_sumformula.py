import pytest
import sympy as sp

from app.core.checks import check_monotonicity
from app.core.errors import InputError
from app.core.floors import gw_toric, welschinger_toric
from app.core.lattice import F0
from app.core.sumformula import (
    CALIBRATED_GAMMA,
    CombinationMode,
    binomial,
    calibrate_gamma,
    combine_complex,
    combine_real,
    complex_via_strata,
    ellipsoid_via_strata,
    hyperboloid_via_strata,
    mu0,
    mu2,
    muH2,
    quadric_decrement,
    quadric_series,
    welschinger_ellipsoid,
)


def f0_classes(max_total):
    return [F0.class_of(a, b) for a in range(max_total + 1) for b in range(max_total + 1 - a) if a or b]


def test_binomial_out_of_range_is_zero():
    assert binomial(4, 2) == 6
    assert binomial(2, 3) == 0
    assert binomial(-1, 0) == 0


def test_mu0_values():
    assert mu0(0, 3, 2, 0, 0) == 1
    assert mu0(1, 2, 0, 0, 0) == 2
    assert mu0(1, 2, 0, 1, 0) == -2
    assert mu0(2, 2, 1, 1, 1) == 2
    assert mu0(1, 1, 0, 0, 1) == -1


def test_mu0_total_mass():
    for a in range(13):
        for b in range(13):
            assert sum(mu0(k, a, b, 0, 0) for k in range(a + 2 * b + 1)) == 2 ** (a + b)


def test_mu0_is_a_polynomial_coefficient():
    t = sp.symbols("t")
    for a in range(7):
        for b in range(7):
            poly = sp.Poly((1 + t) ** a * (1 + t ** 2) ** b, t)
            for k in range(a + 2 * b + 1):
                assert mu0(k, a, b, 0, 0) == poly.coeff_monomial(t ** k)


def test_mu2_only_sees_conjugate_pairs():
    assert mu2(3, 0, 3, 0, 0) == 8
    assert mu2(1, 0, 1, 0, 1) == -2
    assert mu2(1, 2, 0, 0, 0) == 0
    assert mu2(2, 0, 1, 0, 0) == 0


def test_muH2_is_the_trivial_stratum():
    assert muH2(0, 0, 0, 0) == 1
    assert muH2(0, 0, 0, 1) == -1
    assert muH2(1, 2, 0, 0) == 0


def test_negative_arguments_are_rejected():
    with pytest.raises(InputError):
        mu0(-1, 0, 0, 0, 0)
    with pytest.raises(InputError):
        mu2(0, 0, -1, 0, 0)


def test_combination_mode_validation():
    with pytest.raises(InputError):
        CombinationMode(chi_rx0=1)
    with pytest.raises(InputError):
        CombinationMode(gamma=2)
    with pytest.raises(InputError):
        CombinationMode(hypothesis="H3")


def test_combine_complex_values():
    assert combine_complex(0, {0: 1, 1: 2}) == 5
    assert combine_complex(1, {0: 3}) == 3
    with pytest.raises(InputError):
        combine_complex(-3, {0: 1})


def test_combine_real_by_mode():
    strata = {(0, 0, 0): 5, (1, 2, 0): 7}
    assert combine_real(CombinationMode(chi_rx0=0), strata) == 19
    assert combine_real(CombinationMode(chi_rx0=2), strata) == 5
    assert combine_real(CombinationMode(hypothesis="H2"), strata) == 5


@pytest.mark.parametrize("cls", f0_classes(5), ids=str)
def test_complex_counts_through_the_sum(cls):
    assert complex_via_strata(cls) == gw_toric("F0", cls)


@pytest.mark.parametrize("cls", f0_classes(4), ids=str)
def test_hyperboloid_counts_through_the_sum(cls):
    assert hyperboloid_via_strata(cls) == welschinger_toric("F0", cls)


def test_gamma_calibration():
    assert calibrate_gamma(f0_classes(3)) == CALIBRATED_GAMMA


def test_ellipsoid_values():
    assert welschinger_ellipsoid(1) == 1
    assert welschinger_ellipsoid(2) == 6
    with pytest.raises(InputError):
        welschinger_ellipsoid(0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_ellipsoid_through_the_sum(d):
    assert ellipsoid_via_strata(d) == welschinger_ellipsoid(d)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_quadric_decrement(d):
    (_, hyperboloid), (_, ellipsoid) = quadric_series(d)
    assert quadric_decrement(d) == hyperboloid - ellipsoid
    assert not check_monotonicity(quadric_series(d)).failed


def test_conic_decrement():
    assert quadric_series(2) == [(0, 8), (2, 6)]
    assert quadric_decrement(2) == 2
