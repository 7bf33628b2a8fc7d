import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from bogocool.physical_system import INTERNAL, Regime, RegimeError, derive, derive_internal
from bogocool.rates import (
    RateMode,
    build_rate_matrix,
    dimensionless_subsonic,
    dimensionless_supersonic,
    matrix_element_sq,
    overlap_kernel,
    rate_general,
    rate_subsonic,
    rate_supersonic,
    resolve_mode,
    thermal_coefficient,
    transition_rate,
)

from conftest import internal_params, subsonic_params
from oracles import displacement_element_sq


# --- matrix element ----------------------------------------------------------

def test_matrix_element_trivial():
    assert matrix_element_sq(0, 0, 0.0) == pytest.approx(1.0, rel=1e-15)
    assert matrix_element_sq(3, 1, 0.0) == 0.0
    # <0|e^{-iqx}|0> = e^{-q^2/4}
    assert matrix_element_sq(0, 0, 1.3) == pytest.approx(math.exp(-1.3 ** 2 / 2), rel=1e-14)
    # |<0|e^{-iqx}|1>|^2 = (q^2/2) e^{-q^2/2}
    assert matrix_element_sq(1, 0, 1.3) == pytest.approx(1.3 ** 2 / 2 * math.exp(-1.3 ** 2 / 2), rel=1e-14)


def test_matrix_element_symmetric_and_scaled():
    assert matrix_element_sq(7, 2, 1.7) == pytest.approx(matrix_element_sq(2, 7, 1.7), rel=1e-15)
    assert matrix_element_sq(4, 1, 2.0, l0=0.5) == pytest.approx(matrix_element_sq(4, 1, 1.0), rel=1e-15)
    with pytest.raises(ValueError):
        matrix_element_sq(-1, 0, 1.0)


@pytest.mark.parametrize("n,m,q", [(1, 0, 0.7), (5, 2, 1.9), (10, 0, 3.1), (12, 11, 0.4), (15, 3, 4.2)])
def test_matrix_element_against_hermite_quadrature(n, m, q):
    assert matrix_element_sq(n, m, q) == pytest.approx(displacement_element_sq(n, m, q), rel=1e-10)


@pytest.mark.parametrize("n", [0, 3, 10])
@pytest.mark.parametrize("q", [0.3, 1.5, 4.0])
def test_matrix_element_completeness(n, q):
    total = sum(matrix_element_sq(n, m, q) for m in range(0, 160))
    assert total == pytest.approx(1.0, abs=1e-8)


# --- kernel and dimensionless rates ------------------------------------------

def test_overlap_kernel_closed_form_for_one_to_zero():
    # K_{1,0}(X) = 2 int_0^X xi^2 e^{-xi^2} = sqrt(pi)/2 erf(X) - X e^{-X^2}
    for X in (0.2, 1.0, 3.0):
        exact = math.sqrt(math.pi) / 2 * math.erf(X) - X * math.exp(-X * X)
        assert overlap_kernel(1, 0, X, 1e-12) == pytest.approx(exact, rel=1e-11)
    assert overlap_kernel(1, 0, 0.0) == 0.0
    with pytest.raises(ValueError):
        overlap_kernel(0, 1, 1.0)


def test_overlap_kernel_against_mpmath():
    mpmath.mp.dps = 30
    n, m, X = 6, 2, 2.0
    f = lambda xi: (mpmath.factorial(m) / mpmath.factorial(n) * mpmath.exp(-xi * xi)
                    * xi ** (2 * (n - m)) * mpmath.laguerre(m, n - m, xi * xi) ** 2)
    exact = 2 * mpmath.quad(f, [0, 1, X])
    assert overlap_kernel(n, m, X, 1e-12) == pytest.approx(float(exact), rel=1e-10)


def test_f_prime_one_to_zero():
    assert dimensionless_supersonic(1, 0) == pytest.approx(0.3789, abs=5e-4)
    assert dimensionless_supersonic(1, 0) == pytest.approx(
        math.sqrt(math.pi) / 2 * math.erf(1.0) - math.exp(-1.0), rel=1e-10)


def test_supersonic_surface_same_order():
    """Below n = 15 no downward channel is negligible (m_a = m_b)."""
    for n in range(1, 16):
        vals = [dimensionless_supersonic(n, m) for m in range(n)]
        assert min(vals) > 0.01
        assert max(vals) / min(vals) < 30


def test_subsonic_nearest_neighbour_dominance():
    r = 0.01
    for n in range(2, 16):
        ratio = dimensionless_subsonic(n, n - 1, r) / dimensionless_subsonic(n, n - 2, r)
        # small-argument expansion of the two kernels
        asymptote = 5 / (48 * r * r * (n - 1))
        assert ratio == pytest.approx(asymptote, rel=0.01)
        assert ratio > 50
    assert dimensionless_subsonic(2, 1, r) / dimensionless_subsonic(2, 0, r) == pytest.approx(1042, rel=1e-3)


def test_subsonic_nearest_neighbour_leading_form():
    # dipole limit of the nearest-neighbour rate: F~_{n->n-1} -> n (l0 omega/u)^2 / 3
    r = 1e-4
    for n in (1, 4, 9):
        assert dimensionless_subsonic(n, n - 1, r) == pytest.approx(n * r * r / 3, rel=1e-6)


# --- limits against the general dispersion -----------------------------------

def _random_cases(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, 16))
        m = int(rng.integers(0, n))
        out.append((n, m, "supersonic" if i % 2 == 0 else "subsonic", rng.uniform()))
    return out


@pytest.mark.parametrize("n,m,regime,x", _random_cases(2024, 20))
def test_limit_rates_agree_with_general(n, m, regime, x):
    if regime == "supersonic":
        p = internal_params(m_b=0.5 + 1.5 * x, a_bb=1e-9)
        d = derive_internal(p)
        assert d.ratio > 1e4
        limit = rate_supersonic(n, m, d)
    else:
        p = subsonic_params(r=0.005 + 0.01 * x)
        d = derive_internal(p)
        limit = rate_subsonic(n, m, d)
    assert limit == pytest.approx(rate_general(n, m, d), rel=5e-3)


def test_regime_guards():
    d_sup = derive_internal(internal_params())
    d_sub = derive_internal(subsonic_params())
    with pytest.raises(RegimeError):
        rate_subsonic(2, 1, d_sup)
    with pytest.raises(RegimeError):
        rate_supersonic(2, 1, d_sub)
    cross = derive_internal(internal_params(a_bb=0.05, rho0=0.8))
    assert cross.regime == Regime.CROSSOVER
    assert resolve_mode(RateMode.AUTO, cross) == RateMode.GENERAL
    assert transition_rate(2, 1, cross) == rate_general(2, 1, cross)
    with pytest.raises(ValueError):
        rate_general(1, 1, d_sup)


def test_rates_are_unit_independent():
    p = internal_params()
    assert rate_supersonic(3, 1, derive(p)) == pytest.approx(rate_supersonic(3, 1, derive_internal(p)), rel=1e-12)


# --- matrix and thermal coefficients -----------------------------------------

def test_rate_matrix_structure():
    rm = build_rate_matrix(8, internal_params())
    assert rm.F.shape == (9, 9)
    assert np.all(np.triu(rm.F) == 0)
    assert np.all(rm.F[np.tril_indices(9, -1)] > 0)
    assert not rm.H.any()
    with pytest.raises(IndexError):
        rm.rate(2, 3)
    assert rm.rate(1, 0) == rm.F[1, 0]
    np.testing.assert_allclose(rm.dimensionless("supersonic")[1, 0], dimensionless_supersonic(1, 0), rtol=1e-12)
    np.testing.assert_allclose(rm.per_cycle(), 2 * math.pi * rm.F)
    assert rm.regime_used == RateMode.SUPERSONIC


def test_rate_matrix_subsonic_normalisation():
    rm = build_rate_matrix(4, subsonic_params())
    assert rm.regime_used == RateMode.SUBSONIC
    assert rm.dimensionless()[3, 2] == pytest.approx(dimensionless_subsonic(3, 2, 0.01), rel=1e-10)


@pytest.mark.parametrize("theta", [0.05, 0.2, 1.0])
def test_detailed_balance(theta):
    rm = build_rate_matrix(12, internal_params(temperature=theta))
    assert np.allclose(rm.H, rm.H.T)
    assert np.all(rm.H >= 0)
    pbar = np.exp(-np.arange(13) / theta)
    for n in range(12):
        lhs = rm.F[n + 1, n] * pbar[n + 1]
        rhs = rm.H[n + 1, n] * (pbar[n] - pbar[n + 1])
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_thermal_coefficient_function_matches_matrix():
    p = internal_params(temperature=0.7)
    rm = build_rate_matrix(6, p)
    d = derive_internal(p)
    assert thermal_coefficient(5, 2, d.temperature, d, RateMode.SUPERSONIC) == pytest.approx(rm.H[5, 2], rel=1e-12)
    assert thermal_coefficient(2, 5, d.temperature, d, RateMode.SUPERSONIC) == pytest.approx(rm.H[2, 5], rel=1e-12)
    assert thermal_coefficient(2, 5, 0.0, d) == 0.0
    with pytest.raises(ValueError):
        thermal_coefficient(2, 2, 0.5, d)


@given(st.integers(2, 10), st.floats(0.3, 3.0), st.floats(0.0, 2.0))
def test_rates_nonnegative(n_max, m_b, theta):
    rm = build_rate_matrix(n_max, internal_params(m_b=m_b, temperature=theta))
    assert np.all(rm.F >= 0) and np.all(rm.H >= 0)
    assert np.all(np.isfinite(rm.F))


def test_build_rejects_tiny_matrix():
    with pytest.raises(ValueError):
        build_rate_matrix(0, internal_params())


def test_rate_matrix_internal_constants_path():
    p = internal_params().to_internal()
    rm = build_rate_matrix(3, p, constants=INTERNAL)
    assert rm.F[1, 0] == pytest.approx(build_rate_matrix(3, internal_params()).F[1, 0], rel=1e-12)
