"""
Closed-form expansions: the A_j sums and the b coefficients of the close-pair
root, the small-s spacing and derivative-root laws, the conditioned-ensemble
moment polynomials, and the Bessel 1-level density with its limiting kernel.

All expansions are evaluated from their displayed coefficients by Horner's
rule; nothing here is resummed.
"""

import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate, special

from ..errors import DomainError, SingularityError, UnsupportedRangeError
from ..schemas import CoefficientsAB, MomentPolynomials

MAX_J = 4
SINGULAR_TOL = 1e-12
P2_S_MAX = 0.5


def e_n(x, n: int):
    """e_N(x) = exp(2 pi i x / N)"""
    return np.exp(2j * math.pi * np.asarray(x, dtype=float) / n)


def one_minus_e_n(x, n: int):
    """1 - e_N(x) without cancellation near x = 0"""
    phi = 2.0 * math.pi * np.asarray(x, dtype=float) / n
    return 2.0 * np.sin(0.5 * phi) ** 2 - 1j * np.sin(phi)


def aj_sums(x, n: int, j_max: int = 1) -> np.ndarray:
    """
    A_j for j = 0..j_max over the last axis of x.

    Returns shape (j_max + 1,) for one configuration or (j_max + 1, count)
    for a batch of rows.
    """
    if not 0 <= j_max <= MAX_J:
        raise DomainError(f"j_max must lie in [0, {MAX_J}], got {j_max}")
    x = np.asarray(x, dtype=float)
    offset = np.abs(np.mod(x + 0.5 * n, n) - 0.5 * n)
    if np.any(offset < SINGULAR_TOL):
        raise SingularityError("a background phase sits at z = 1")
    inv = 1.0 / one_minus_e_n(x, n)
    out = []
    power = inv
    for j in range(j_max + 1):
        out.append(power.sum(axis=-1) / float(n) ** (j + 1))
        power = power * inv
    return np.array(out)


def compute_Aj(background, n: int, j_max: int = 1) -> List[complex]:
    """A_j = N^(-j-1) sum_k (1 - e_N(x_k))^(-(j+1)), j = 0..j_max"""
    return [complex(a) for a in aj_sums(np.asarray(background, dtype=float).ravel(), n, j_max)]


def coeff_b(a0, a1, n: int):
    """b_1 and b_2 of the close-pair root from A_0 and A_1 (arrays allowed)"""
    b1 = a0 / 2.0 + 1.0 / (2.0 * n)
    b2 = (a0 ** 3 + 2.0 * a0 * a1) / 8.0 + a1 / (4.0 * n) - a0 / (6.0 * n ** 2) - 1.0 / (24.0 * n ** 3)
    return b1, b2


def coefficients_ab(background, n: int, j_max: int = 1) -> CoefficientsAB:
    a = compute_Aj(background, n, max(j_max, 1))
    b1, b2 = coeff_b(a[0], a[1], n)
    return CoefficientsAB(n=n, a=a, b1=b1, b2=b2)


def predict_delta(b1: complex, b2: complex, theta: float) -> complex:
    """b_1 pi^2 theta^2 + b_2 pi^4 theta^4"""
    if not 0.0 <= theta < 1.0 / math.pi:
        raise DomainError(f"theta must lie in [0, 1/pi), got {theta}")
    u = (math.pi * theta) ** 2
    return complex(u * (b1 + b2 * u))


# --------------------------------------------------------------------------
# Spacing law and pair correlation


def _p2_coefficients(n: Optional[int]) -> Tuple[float, float, float]:
    q = 0.0 if n is None else 1.0 / float(n) ** 2
    pi2 = math.pi ** 2
    c2 = (1.0 / 3.0 - q / 3.0) * pi2
    c4 = -(2.0 / 45.0 - q / 9.0 + q * q / 15.0) * pi2 ** 2
    c6 = (1.0 / 315.0 - 2.0 * q / 135.0 + q * q / 45.0 - 2.0 * q ** 3 / 189.0) * pi2 ** 3
    return c2, c4, c6


def _check_p2_range(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > P2_S_MAX):
        raise UnsupportedRangeError(f"spacing expansion is only used on [0, {P2_S_MAX}]")
    return s


def spacing_density_p2(s, n: Optional[int] = None):
    """Three-term small-s expansion of the CUE(N) spacing density; n=None is N = infinity"""
    s = _check_p2_range(s)
    c2, c4, c6 = _p2_coefficients(n)
    s2 = s * s
    return s2 * (c2 + s2 * (c4 + s2 * c6))


def spacing_cdf_p2(s, n: Optional[int] = None):
    """Term-by-term integral of spacing_density_p2 from 0 to s"""
    s = _check_p2_range(s)
    c2, c4, c6 = _p2_coefficients(n)
    s2 = s * s
    return s2 * s * (c2 / 3.0 + s2 * (c4 / 5.0 + s2 * c6 / 7.0))


def pair_correlation(y, n: Optional[int] = None):
    """1 - sin^2(pi y) / (N^2 sin^2(pi y / N)); n=None is the sine-kernel limit"""
    y = np.asarray(y, dtype=float)
    ratio = np.sinc(y) if n is None else np.sinc(y) / np.sinc(y / n)
    return 1.0 - ratio ** 2


# --------------------------------------------------------------------------
# Derivative-root law near the unit circle


class Regime(str, Enum):
    SMALL = "SMALL"
    LARGE = "LARGE"


def q_asymptotics(s, regime: Regime):
    """Limiting density of S: two-term small-s form or the 1/s^2 tail"""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("q(s) is evaluated for s > 0 only")
    if Regime(regime) == Regime.SMALL:
        return (4.0 / (3.0 * math.pi)) * np.sqrt(s) - (82.0 / (45.0 * math.pi)) * s ** 1.5
    return 1.0 / s ** 2


def q_small_cdf(s):
    """Integral of the small-s form: (8/(9 pi)) s^(3/2) - (164/(225 pi)) s^(5/2)"""
    s = np.asarray(s, dtype=float)
    return (8.0 / (9.0 * math.pi)) * s ** 1.5 - (164.0 / (225.0 * math.pi)) * s ** 2.5


def deldist_density(s, n: Optional[int], b2_mean: float, b1: float = 0.25):
    """
    Two-term density of delta* from the spacing law pushed through
    s = B1 pi^2 theta^2 + B2 pi^4 theta^4, with the displayed 1/N^2 and 1/N^4
    corrections. n=None drops them.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("delta* density is evaluated for s > 0 only")
    q = 0.0 if n is None else 1.0 / float(n) ** 2
    lead = b1 ** -1.5 / (6.0 * math.pi) * (1.0 - q)
    second = (b1 ** -2.5 / 45.0 * (1.0 - 2.5 * q + 1.5 * q * q)
              + 5.0 * b1 ** -3.5 * b2_mean / 12.0 * (1.0 - q)) / math.pi
    return lead * np.sqrt(s) - second * s ** 1.5


# --------------------------------------------------------------------------
# Conditioned-ensemble moments


def moment_polynomials(n: int) -> MomentPolynomials:
    """
    Closed-form moments under the measure with a double eigenvalue at 1.

    a0_cubed, a1_mean and a0a1_mean are expectations of L^3, L' and L L'
    where L = N A_0 and L' = -N^2 A_1. b2_mean substitutes them into Re b_2
    with those signs; b2_mean_published substitutes A_1 = +L'/N^2, which is
    the assembly that gives 1/48 - 7/(48N) + O(1/N^2).
    """
    if n < 4:
        raise DomainError(f"moment polynomials need n >= 4, got {n}")
    N = float(n)
    p3 = N ** 3 / 10.0 - 7.0 * N ** 2 / 10.0 + 8.0 * N / 5.0 - 6.0 / 5.0
    p1 = N ** 2 / 15.0 - N / 2.0 + 11.0 / 15.0
    p01 = N ** 3 / 30.0 - 3.0 * N ** 2 / 10.0 + 13.0 * N / 15.0 - 4.0 / 5.0
    mean_l = N / 2.0 - 1.0
    tail = mean_l / 6.0 + 1.0 / 24.0
    return MomentPolynomials(
        n=n,
        c_n_inv=N ** 4 / 12.0 - N ** 2 / 12.0,
        a0_mean=0.5 - 1.0 / N,
        a0_cubed=p3,
        a1_mean=p1,
        a0a1_mean=p01,
        b2_mean=(p3 / 8.0 - p01 / 4.0 - p1 / 4.0 - tail) / N ** 3,
        b2_mean_published=(p3 / 8.0 + p01 / 4.0 + p1 / 4.0 - tail) / N ** 3,
    )


# --------------------------------------------------------------------------
# Bessel 1-level density

SUPPORTED_ORDERS = (-0.5, 0.5, 1.5, 2.5)
SERIES_CUTOFF = 1e-6


def _riccati(n: int, x):
    """psi_n(x) = x j_n(x); psi_{-1}(x) = cos x"""
    x = np.asarray(x, dtype=float)
    if n == -1:
        return np.cos(x)
    return x * special.spherical_jn(n, x)


def bessel_half_integer(order: float, x):
    """J_order(x) for order in {-1/2, 1/2, 3/2, 5/2} via spherical Bessel closed forms"""
    if order not in SUPPORTED_ORDERS:
        raise DomainError(f"unsupported half-integer order {order}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise DomainError("half-integer Bessel functions are evaluated for x >= 0")
    n = int(round(order - 0.5))
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = np.sqrt(2.0 / (math.pi * x)) * _riccati(n, x)
        half = 0.5 * x
        series = half ** order / special.gamma(order + 1.0) * (1.0 - half * half / (order + 1.0))
    out = np.where(x < SERIES_CUTOFF, series, closed)
    if order < 0:
        out = np.where(x == 0.0, np.inf, out)
    return out[()] if out.ndim == 0 else out


def one_level_density_w1(a: int, t):
    """
    W_1^(a)(t) = t pi^2/2 (J_{a-1/2}^2 + J_{a+1/2}^2)(pi t) - a pi J_{a-1/2} J_{a+1/2}(pi t),
    written with psi_n(x) = x j_n(x) so it stays finite at t = 0. Even in t.
    """
    if a < 0 or int(a) != a:
        raise DomainError(f"a must be a nonnegative integer, got {a}")
    a = int(a)
    x = math.pi * np.abs(np.asarray(t, dtype=float))
    lower = _riccati(a - 1, x)
    upper = _riccati(a, x)
    out = lower ** 2 + upper ** 2 - 2.0 * a * lower * special.spherical_jn(a, x)
    return out[()] if np.ndim(out) == 0 else out


def w1_bin_integral(a: int, lo: float, hi: float) -> float:
    value, _ = integrate.quad(lambda t: float(one_level_density_w1(a, t)), lo, hi,
                              limit=200, epsabs=1e-12, epsrel=1e-10)
    return value


def alpha1_mean(a: int = 2, cutoff: float = 1000.0) -> float:
    """
    (1/4 pi^2) integral of W_1^(a)(t)/t^2 over the line, by unit-interval
    quadrature on [0, cutoff] and the W_1 -> 1 tail 1/(2 pi^2 cutoff).
    """
    if a < 1:
        raise DomainError("W_1/t^2 is integrable at 0 only for a >= 1")

    def integrand(t):
        return float(one_level_density_w1(a, t)) / (t * t) if t > 0 else 0.0

    total = math.fsum(
        integrate.quad(integrand, float(k), float(k + 1), limit=100, epsabs=1e-14, epsrel=1e-12)[0]
        for k in range(int(cutoff)))
    return 2.0 * total / (4.0 * math.pi ** 2) + 1.0 / (2.0 * math.pi ** 2 * cutoff)


DIAGONAL_SWITCH = 1e-8


def kernel_k_infty(a: int, xi: float, eta: float) -> complex:
    """
    Limiting kernel with phase factor exp(i pi (eta - xi)). Within
    DIAGONAL_SWITCH of the diagonal the value is W_1 at the midpoint.
    """
    if abs(xi - eta) < DIAGONAL_SWITCH:
        return complex(one_level_density_w1(a, 0.5 * (xi + eta)))
    px, py = math.pi * xi, math.pi * eta
    cross = (float(_riccati(a, px)) * float(_riccati(a - 1, py))
             - float(_riccati(a - 1, px)) * float(_riccati(a, py)))
    phase = complex(math.cos(math.pi * (eta - xi)), math.sin(math.pi * (eta - xi)))
    return phase * cross / (math.pi * (xi - eta))


# --------------------------------------------------------------------------
# Zeta analogues


def beta_coefficients(alpha1: float) -> Tuple[float, float]:
    """beta_1 = 1/4, beta_2 = 1/64 - alpha_1/8"""
    return 0.25, 1.0 / 64.0 - alpha1 / 8.0


def zeta_log_derivative_constant() -> float:
    """b = log(2 pi) - 1 - gamma/2 in the partial-fraction form of zeta'/zeta"""
    return math.log(2.0 * math.pi) - 1.0 - 0.5 * float(np.euler_gamma)
