import math

import mpmath
import numpy as np
import pytest
from scipy import special

from derivlab.errors import DomainError, SingularityError, UnsupportedRangeError
from derivlab.lab.ensembles import sample_phase_batch
from derivlab.lab.expansions import (Regime, aj_sums, alpha1_mean, bessel_half_integer, beta_coefficients,
                                     coeff_b, coefficients_ab, compute_Aj, deldist_density, kernel_k_infty,
                                     moment_polynomials, one_level_density_w1, one_minus_e_n, pair_correlation,
                                     predict_delta, q_asymptotics, q_small_cdf, spacing_cdf_p2,
                                     spacing_density_p2, w1_bin_integral, zeta_log_derivative_constant)
from derivlab.schemas import Ensemble


@pytest.mark.parametrize("n", [8, 40, 100])
def test_real_part_of_a0_is_fixed(n):
    # Re 1/(1 - e^{i phi}) = 1/2 for every phi
    x = n * sample_phase_batch(Ensemble.CUE, n - 2, 20, n) / (2 * math.pi)
    a = aj_sums(x, n, 1)
    assert a.shape == (2, 20)
    assert np.allclose(a[0].real, (n - 2) / (2 * n), atol=1e-12)
    b1, _ = coeff_b(a[0], a[1], n)
    assert np.allclose(b1.real, 0.25, atol=1e-12)


def test_one_minus_e_n_small_argument():
    x = 1e-9
    with mpmath.workdps(40):
        expected = complex(1 - mpmath.expj(2 * mpmath.pi * mpmath.mpf(x) / 10))
    value = one_minus_e_n(x, 10)
    assert abs(value.real - expected.real) <= 1e-12 * expected.real
    assert abs(value.imag - expected.imag) <= 1e-12 * abs(expected.imag)
    assert one_minus_e_n(x, 10).real > 0


def test_singular_background():
    with pytest.raises(SingularityError):
        compute_Aj([0.0, 1.0], 6)
    with pytest.raises(SingularityError):
        compute_Aj([6.0], 6)
    with pytest.raises(DomainError):
        compute_Aj([1.0], 6, j_max=7)


def test_coefficients_ab_matches_formula():
    bg = [-2.3, -0.8, 1.1, 2.6]
    coeffs = coefficients_ab(bg, 6)
    a0, a1 = coeffs.a[0], coeffs.a[1]
    assert coeffs.b1 == a0 / 2 + 1 / 12
    expected = (a0 ** 3 + 2 * a0 * a1) / 8 + a1 / 24 - a0 / 216 - 1 / (24 * 216)
    assert abs(coeffs.b2 - expected) < 1e-14
    assert coeffs.B1 == coeffs.b1.real


def test_predict_delta():
    assert predict_delta(0.25, 0.1, 0.0) == 0
    u = (math.pi * 0.1) ** 2
    assert abs(predict_delta(0.25, 0.1, 0.1) - (0.25 * u + 0.1 * u * u)) < 1e-15
    with pytest.raises(DomainError):
        predict_delta(0.25, 0.1, 0.4)


@pytest.mark.parametrize("n", [None, 10, 40])
def test_spacing_expansion_matches_pair_correlation(n):
    s = np.array([0.01, 0.03, 0.05])
    assert np.allclose(spacing_density_p2(s, n), pair_correlation(s, n), rtol=0, atol=1e-6)


def test_spacing_cdf_differentiates_to_density():
    s, h = 0.3, 1e-5
    slope = (spacing_cdf_p2(s + h, 40) - spacing_cdf_p2(s - h, 40)) / (2 * h)
    assert math.isclose(slope, spacing_density_p2(s, 40), rel_tol=1e-7)
    assert spacing_cdf_p2(0.0) == 0.0


def test_spacing_expansion_range():
    with pytest.raises(UnsupportedRangeError):
        spacing_density_p2(0.6)
    with pytest.raises(UnsupportedRangeError):
        spacing_cdf_p2(-0.1, 40)


def test_q_regimes():
    s = 0.2
    h = 1e-6
    slope = (q_small_cdf(s + h) - q_small_cdf(s - h)) / (2 * h)
    assert math.isclose(slope, q_asymptotics(s, Regime.SMALL), rel_tol=1e-7)
    assert q_asymptotics(4.0, Regime.LARGE) == 1 / 16
    with pytest.raises(DomainError):
        q_asymptotics(0.0, Regime.SMALL)


def test_deldist_reduces_to_q_small():
    s = np.array([0.05, 0.1, 0.2])
    assert np.allclose(deldist_density(s, None, 1 / 48), q_asymptotics(s, Regime.SMALL), rtol=1e-12)
    assert np.all(deldist_density(s, 40, 1 / 240) > 0)


def test_moment_polynomials_small_n():
    m = moment_polynomials(12)
    assert math.isclose(m.a0_cubed, 90.0, rel_tol=1e-12)
    assert math.isclose(m.a1_mean, 4.0 + 1.0 / 3.0, rel_tol=1e-12)
    assert math.isclose(m.c_n_inv, (12 ** 4 - 12 ** 2) / 12)
    assert m.a0_mean == 0.5 - 1 / 12
    with pytest.raises(DomainError):
        moment_polynomials(3)


def test_b2_limits():
    assert abs(moment_polynomials(10 ** 6).b2_mean - 1 / 240) < 1e-6
    published = moment_polynomials(1000).b2_mean_published
    assert abs(published - (1 / 48 - 7 / 48000)) < 1e-5


@pytest.mark.parametrize("order", [-0.5, 0.5, 1.5, 2.5])
def test_half_integer_bessel_matches_scipy(order):
    x = np.linspace(0.1, 20.0, 200)
    assert np.allclose(bessel_half_integer(order, x), special.jv(order, x), rtol=1e-10, atol=1e-13)


def test_half_integer_bessel_edge_cases():
    assert bessel_half_integer(-0.5, 0.0) == np.inf
    assert bessel_half_integer(1.5, 0.0) == 0.0
    with pytest.raises(DomainError):
        bessel_half_integer(3.5, 1.0)
    with pytest.raises(DomainError):
        bessel_half_integer(0.5, -1.0)


def test_w1_values():
    t = np.linspace(-5, 5, 101)
    assert np.allclose(one_level_density_w1(0, t), 1.0, atol=1e-14)
    assert one_level_density_w1(2, 0.0) == 0.0
    assert np.allclose(one_level_density_w1(2, t), one_level_density_w1(2, -t))
    assert abs(one_level_density_w1(2, 1000.0) - 1.0) < 1e-4
    with pytest.raises(DomainError):
        one_level_density_w1(-1, 0.5)


def test_w1_from_bessel_definition():
    a, t = 2, np.array([0.3, 1.2, 3.7])
    x = math.pi * t
    lower, upper = special.jv(a - 0.5, x), special.jv(a + 0.5, x)
    direct = t * math.pi ** 2 / 2 * (lower ** 2 + upper ** 2) - a * math.pi * lower * upper
    assert np.allclose(one_level_density_w1(a, t), direct, rtol=1e-10)


def test_w1_bin_integral_flat_case():
    assert math.isclose(w1_bin_integral(0, -0.5, 1.5), 2.0, rel_tol=1e-10)


def test_alpha1_mean():
    assert abs(alpha1_mean(2) - 1 / 15) <= 1e-5
    with pytest.raises(DomainError):
        alpha1_mean(0)


def test_kernel_diagonal_and_sine_case():
    assert kernel_k_infty(2, 0.3, 0.3) == complex(one_level_density_w1(2, 0.3))
    near = kernel_k_infty(2, 0.3, 0.3 + 1e-6)
    assert abs(abs(near) - one_level_density_w1(2, 0.3)) < 1e-5
    xi, eta = 0.2, 0.9
    d = math.pi * (xi - eta)
    expected = complex(math.cos(math.pi * (eta - xi)), math.sin(math.pi * (eta - xi))) * math.sin(d) / d
    assert abs(kernel_k_infty(0, xi, eta) - expected) < 1e-14


def test_beta_coefficients():
    beta1, beta2 = beta_coefficients(1 / 15)
    assert beta1 == 0.25
    assert math.isclose(beta2, 7 / 960)


def test_log_derivative_constant():
    assert math.isclose(zeta_log_derivative_constant(), math.log(2 * math.pi) - 1 - 0.5 * np.euler_gamma)
