import math

import mpmath
import numpy as np
import pytest

from derivlab.errors import DomainError, InsufficientSamplesError, SingularityError, UnsupportedRangeError
from derivlab.lab.expansions import zeta_log_derivative_constant
from derivlab.lab.zeta_lab import (close_pair_crosscheck, count_zeta_prime_zeros_in_box, density_discrepancy,
                                   find_zeta_prime_zeros, hardy_z, missing_zero_rate, normalized_distribution,
                                   predicted_x_from_gap, spot_check_sigma_bound, zeta_and_derivative,
                                   zeta_prime, zeta_prime_density_integral, zeta_zeros_on_line)
from derivlab.schemas import ZetaPrimeZero


def test_special_values():
    z, _ = zeta_and_derivative(2.0, strict=False)
    assert abs(z - math.pi ** 2 / 6) < 1e-10
    z0, dz0 = zeta_and_derivative(0.0, strict=False)
    assert abs(z0 + 0.5) < 1e-10
    assert abs(dz0 + 0.5 * math.log(2 * math.pi)) < 1e-10


def test_log_derivative_constant_from_zeta_at_zero():
    z0, dz0 = zeta_and_derivative(0.0, strict=False)
    b = (dz0 / z0).real - 1 - 0.5 * np.euler_gamma
    assert abs(b - zeta_log_derivative_constant()) < 1e-9


@pytest.mark.parametrize("s", [0.5 + 14.134725141734693j, 0.7 + 50.3j, 2.5 + 1234.5j, 0.9 - 321.0j])
def test_matches_mpmath(s):
    z, dz = zeta_and_derivative(s)
    with mpmath.workdps(30):
        ref = complex(mpmath.zeta(s))
        dref = complex(mpmath.zeta(s, 1, 1))
    assert abs(z - ref) < 1e-9
    assert abs(dz - dref) < 1e-9


def test_array_input_and_conjugate_symmetry():
    s = np.array([0.6 + 30.0j, 1.5 + 200.0j, 3.0 + 900.0j])
    z, dz = zeta_and_derivative(s)
    zc, dzc = zeta_and_derivative(np.conj(s))
    assert z.shape == (3,)
    assert np.allclose(zc, np.conj(z), rtol=1e-12, atol=0)
    assert np.allclose(dzc, np.conj(dz), rtol=1e-12, atol=0)
    assert np.allclose(zeta_prime(s), dz)


def test_domain_checks():
    with pytest.raises(SingularityError):
        zeta_and_derivative(1.0, strict=False)
    with pytest.raises(DomainError):
        zeta_and_derivative(-0.5 + 20j)
    with pytest.raises(DomainError):
        zeta_and_derivative(4.5 + 20j)
    with pytest.raises(UnsupportedRangeError):
        zeta_and_derivative(0.5 + 2e4j)
    with pytest.raises(UnsupportedRangeError):
        zeta_and_derivative(0.5 + 5j)


def test_hardy_function_is_real_valued_zeta_modulus():
    t = np.array([20.0, 33.3, 101.7])
    values = hardy_z(t)
    assert values.dtype == float
    moduli = np.abs(zeta_and_derivative(0.5 + 1j * t)[0])
    assert np.allclose(np.abs(values), moduli, rtol=1e-10)


def test_first_zeros_on_the_line():
    zeros = zeta_zeros_on_line(10.0, 30.0)
    assert len(zeros) == 3
    expected = [14.134725141734693, 21.022039638771555, 25.010857580145688]
    assert np.allclose(zeros, expected, atol=1e-8)


def test_box_counts_add_up():
    sigma0, sigma1 = 0.5 + 1e-6, 3.0
    whole = count_zeta_prime_zeros_in_box((sigma0, sigma1, 100.0, 104.0))
    halves = (count_zeta_prime_zeros_in_box((sigma0, sigma1, 100.0, 102.0))
              + count_zeta_prime_zeros_in_box((sigma0, sigma1, 102.0, 104.0)))
    assert whole == halves


def test_scan_finds_every_zero_in_a_short_window():
    result = find_zeta_prime_zeros(100.0, 110.0)
    assert result.boxes_scanned == 10
    assert not result.violations
    assert result.box_count == len(result.zeros) + len(result.flagged)
    assert len(result.zeros) >= 1
    gammas = [z.gamma for z in result.zeros]
    assert gammas == sorted(gammas)
    for zero in result.zeros:
        assert zero.beta > 0.5
        assert 100.0 < zero.gamma < 110.0
        assert zero.residual < 1e-8
        assert math.isclose(zero.normalized_x, (zero.beta - 0.5) * math.log(zero.gamma / (2 * math.pi)))
        with mpmath.workdps(30):
            assert abs(complex(mpmath.zeta(complex(zero.beta, zero.gamma), 1, 1))) < 1e-7


def test_scan_range_checks():
    with pytest.raises(UnsupportedRangeError):
        find_zeta_prime_zeros(50.0, 60.0)
    with pytest.raises(UnsupportedRangeError):
        find_zeta_prime_zeros(200.0, 150.0)


def test_no_zeros_beyond_sigma_three():
    wide, narrow = spot_check_sigma_bound(500.0, 501.0)
    assert wide == narrow


def test_density_integral():
    assert abs(zeta_prime_density_integral(1000.0, 2000.0) - 758.1) < 0.5
    assert zeta_prime_density_integral(500.0, 500.0) == 0.0


def test_density_discrepancy_of_exact_counts():
    # heights placed where the integrated density crosses k - 1/2
    grid = np.linspace(1000.0, 1010.0, 100001)
    integral = np.array([zeta_prime_density_integral(1000.0, t) for t in grid])
    heights = [float(grid[np.searchsorted(integral, k - 0.5)]) for k in range(1, 4)]
    zeros = [ZetaPrimeZero(beta=0.6, gamma=g, normalized_x=0.1) for g in heights]
    assert density_discrepancy(zeros, 1000.0) <= 0.5 + 1e-3


def test_missing_zero_rate():
    assert missing_zero_rate(110, 100, 0.0, 100.0) == 0.1
    assert math.isclose(math.log(2) / (2 * math.pi), 0.110318, rel_tol=1e-5)


def test_gap_prediction():
    assert predicted_x_from_gap(0.0) == 0.0
    assert abs(predicted_x_from_gap(0.1) - 0.0247450385) < 1e-9
    with pytest.raises(DomainError):
        predicted_x_from_gap(0.4)


def test_normalized_distribution():
    zeros = [ZetaPrimeZero(beta=0.5 + 0.01 * (k % 50), gamma=1000.0 + k, normalized_x=0.05 * (k % 50))
             for k in range(600)]
    dist = normalized_distribution(zeros)
    assert dist.total_samples == 600
    assert dist.metadata["normalization"] == "log(gamma/2pi)"
    assert dist.metadata["t_min"] == 1000.0
    assert dist.metadata["t_max"] == 1599.0
    with pytest.raises(InsufficientSamplesError):
        normalized_distribution(zeros[:100])


def test_close_pair_crosscheck_on_synthetic_data():
    gap_theta = 0.1
    mid = 1500.0
    spread = gap_theta * 2 * math.pi / math.log(mid / (2 * math.pi))
    zeta_zeros = [mid - 10.0, mid - 0.5 * spread, mid + 0.5 * spread, mid + 10.0]
    x = predicted_x_from_gap(gap_theta)
    beta = 0.5 + x / math.log(mid / (2 * math.pi))
    primes = [ZetaPrimeZero(beta=beta, gamma=mid, normalized_x=x)]
    report = close_pair_crosscheck(zeta_zeros, primes)
    assert len(report["pairs"]) == 1
    row = report["pairs"][0]
    assert math.isclose(row["theta"], gap_theta, rel_tol=1e-9)
    assert row["relative_error"] < 1e-9
    assert report["median_relative_error"] < 1e-9
    assert math.isnan(close_pair_crosscheck(zeta_zeros, [])["median_relative_error"])


@pytest.mark.slow
def test_scan_counts_on_a_long_window():
    t_lo, t_hi = 1000.0, 1100.0
    result = find_zeta_prime_zeros(t_lo, t_hi)
    predicted = zeta_prime_density_integral(t_lo, t_hi)
    assert abs(len(result.zeros) - predicted) <= 4
    assert density_discrepancy(result.zeros, t_lo) <= 5
    line = zeta_zeros_on_line(t_lo, t_hi)
    rate = missing_zero_rate(len(line), len(result.zeros), t_lo, t_hi)
    assert abs(rate - math.log(2) / (2 * math.pi)) < 0.05
