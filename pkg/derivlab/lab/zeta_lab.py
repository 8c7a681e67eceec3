"""
zeta and zeta' by Euler-Maclaurin summation, zeros of zeta on the critical
line from sign changes of the Hardy function, and zeros of zeta' to the right
of the line from argument-principle counts on a grid of boxes.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from ..config import settings
from ..errors import (ContourResolutionError, DomainError, IncompleteScanError,
                      InsufficientSamplesError, SingularityError,
                      UnsupportedRangeError)
from ..logging_config import logger
from ..schemas import EmpiricalDistribution, ZetaPrimeZero, ZetaScanResult
from .contour import BoxContour, muller, winding_number
from .expansions import beta_coefficients
from .stats_io import build_histogram

BERNOULLI_ORDER = 5          # corrections through B_10
EXTRA_TERMS = 20
MAX_CHUNK = 2_000_000
X_EDGES = np.linspace(0.0, 6.0, 121)
MIN_SCAN_HEIGHT = 100.0

_B2K = special.bernoulli(2 * BERNOULLI_ORDER + 2)[2::2]
_FACT = np.array([math.factorial(2 * k) for k in range(1, BERNOULLI_ORDER + 2)], dtype=float)
_EM_COEFF = _B2K / _FACT     # B_2k / (2k)!, k = 1..BERNOULLI_ORDER + 1


def _check_domain(s: np.ndarray, strict: bool):
    if np.any(s == 1.0):
        raise SingularityError("zeta has a pole at s = 1")
    if not strict:
        return
    sigma, height = s.real, np.abs(s.imag)
    if np.any(sigma <= 0.0) or np.any(sigma > 4.0):
        raise DomainError("Euler-Maclaurin evaluator is used for 0 < Re s <= 4")
    if np.any(height < settings.ZETA_MIN_HEIGHT) or np.any(height > settings.ZETA_MAX_HEIGHT):
        raise UnsupportedRangeError(
            f"heights outside [{settings.ZETA_MIN_HEIGHT}, {settings.ZETA_MAX_HEIGHT}] are not supported")


def _rising(s: np.ndarray, length: int) -> Tuple[np.ndarray, np.ndarray]:
    """s (s+1) ... (s+length-1) and its derivative, by the product rule"""
    p = np.ones_like(s)
    dp = np.zeros_like(s)
    for j in range(length):
        dp = dp * (s + j) + p
        p = p * (s + j)
    return p, dp


def _next_term(s: np.ndarray, terms: int) -> float:
    k = BERNOULLI_ORDER + 1
    p, _ = _rising(s, 2 * k - 1)
    return float(np.max(np.abs(_EM_COEFF[k - 1] * p) * float(terms) ** (-s.real - 2 * k + 1)))


def zeta_and_derivative(s, target_abs_err: float = 1e-10, strict: bool = True):
    """
    (zeta(s), zeta'(s)) for scalar or array s.

    Sum of n^-s for n < N, the integral and boundary terms at N, and Bernoulli
    corrections through B_10, with N = max|Im s| + 20 raised until the first
    omitted correction is below target_abs_err.
    """
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    _check_domain(s, strict)

    terms = int(np.max(np.abs(s.imag))) + EXTRA_TERMS
    cap = 8 * terms
    while _next_term(s, terms) > target_abs_err and terms < cap:
        terms = int(terms * 1.5) + 1

    zeta = np.zeros_like(s)
    dzeta = np.zeros_like(s)
    chunk = max(1, MAX_CHUNK // s.size)
    for start in range(1, terms, chunk):
        n = np.arange(start, min(start + chunk, terms), dtype=float)
        logn = np.log(n)
        powers = np.exp(-np.outer(s, logn))
        zeta += powers.sum(axis=1)
        dzeta -= powers @ logn

    big = float(terms)
    log_big = math.log(big)
    tail = np.exp(-s * log_big)
    zeta += big * tail / (s - 1.0) + 0.5 * tail
    dzeta += big * tail * (-log_big / (s - 1.0) - 1.0 / (s - 1.0) ** 2) - 0.5 * log_big * tail

    for k in range(1, BERNOULLI_ORDER + 1):
        p, dp = _rising(s, 2 * k - 1)
        scale = _EM_COEFF[k - 1] * tail * big ** (1 - 2 * k)
        zeta += scale * p
        dzeta += scale * (dp - log_big * p)

    if scalar:
        return complex(zeta[0]), complex(dzeta[0])
    return zeta, dzeta


def zeta_prime(s, strict: bool = True):
    return zeta_and_derivative(s, strict=strict)[1]


def riemann_siegel_theta(t):
    t = np.asarray(t, dtype=float)
    return np.imag(special.loggamma(0.25 + 0.5j * t)) - 0.5 * t * math.log(math.pi)


def hardy_z(t):
    """Z(t) = exp(i theta(t)) zeta(1/2 + i t), real for real t"""
    t = np.asarray(t, dtype=float)
    z, _ = zeta_and_derivative(0.5 + 1j * t)
    return np.real(np.exp(1j * riemann_siegel_theta(t)) * z)


def zeta_zeros_on_line(t_lo: float, t_hi: float, step: float = 0.02) -> List[float]:
    """Ordinates of sign changes of Z on [t_lo, t_hi], refined by brentq"""
    grid = np.arange(t_lo, t_hi + 0.5 * step, step)
    values = np.concatenate([hardy_z(part) for part in np.array_split(grid, max(1, grid.size // 2000))])
    change = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    zeros = [optimize.brentq(lambda t: float(hardy_z(t)), grid[i], grid[i + 1], xtol=1e-12)
             for i in change]
    logger.debug(f"{len(zeros)} zeta zeros on the line in [{t_lo}, {t_hi}]")
    return zeros


# --------------------------------------------------------------------------
# Zeros of zeta'


def count_zeta_prime_zeros_in_box(box: Tuple[float, float, float, float]) -> int:
    """Winding of zeta' around the box (sigma0, sigma1, t0, t1)"""
    return winding_number(lambda s: zeta_prime(s), BoxContour(*box))


def _split(box, fraction: float = 0.5):
    x0, x1, y0, y1 = box
    xm = x0 + fraction * (x1 - x0)
    ym = y0 + fraction * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (xm, x1, ym, y1), (x0, xm, ym, y1)]


def _inside(box, s: complex) -> bool:
    x0, x1, y0, y1 = box
    return x0 < s.real < x1 and y0 < s.imag < y1


def _refine(box) -> Optional[complex]:
    x0, x1, y0, y1 = box
    center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    w, h = 0.25 * (x1 - x0), 0.25 * (y1 - y0)
    root, converged = muller(lambda s: zeta_prime(s), center - w, center + w, center + 1j * h)
    if converged and np.isfinite(root) and _inside(box, root):
        return root
    return None


def _children_counts(box, count: int) -> List[Tuple[tuple, int]]:
    for fraction in (0.5, 0.5 + 0.137, 0.5 - 0.091):
        try:
            children = [(child, count_zeta_prime_zeros_in_box(child)) for child in _split(box, fraction)]
        except ContourResolutionError:
            continue
        if sum(c for _, c in children) == count:
            return children
    raise IncompleteScanError("child counts never matched the parent count", box)


def _isolate(box, count: int, depth: int = 0) -> List[complex]:
    if count == 0:
        return []
    if count == 1:
        root = _refine(box)
        if root is not None:
            return [root]
    if depth >= settings.ZETA_MAX_SUBDIVISION:
        raise IncompleteScanError(f"{count} zero(s) not isolated after {depth} subdivisions", box)
    found = []
    for child, child_count in _children_counts(box, count):
        found.extend(_isolate(child, child_count, depth + 1))
    return found


def _scan_boxes(t_lo: float, t_hi: float) -> List[Tuple[float, float, float, float]]:
    sigma0 = 0.5 + settings.ZETA_SIGMA_OFFSET
    edges = np.arange(t_lo, t_hi, 1.0).tolist() + [t_hi]
    return [(sigma0, settings.ZETA_SIGMA_MAX, a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def find_zeta_prime_zeros(t_lo: float, t_hi: float, min_height: float = MIN_SCAN_HEIGHT) -> ZetaScanResult:
    """
    Every zero of zeta' with 1/2 < sigma <= 3 and t_lo < t <= t_hi.

    Boxes of height 1 are counted, subdivided until each holds one zero,
    and the zero refined by Muller iteration. The scan is complete only when
    the isolated zeros add up to the box counts.
    """
    if not (min_height <= t_lo < t_hi <= settings.ZETA_MAX_HEIGHT):
        raise UnsupportedRangeError(f"scan range must satisfy {min_height} <= t_lo < t_hi <= "
                                    f"{settings.ZETA_MAX_HEIGHT}")
    zeros, violations, flagged = [], [], []
    expected = 0
    boxes = _scan_boxes(t_lo, t_hi)
    for box in boxes:
        count = count_zeta_prime_zeros_in_box(box)
        expected += count
        for root in _isolate(box, count):
            residual = abs(zeta_prime(root))
            zero = ZetaPrimeZero(beta=root.real, gamma=root.imag,
                                 normalized_x=(root.real - 0.5) * math.log(root.imag / (2.0 * math.pi)),
                                 residual=residual)
            if root.real <= 0.5:
                violations.append(zero)
            elif residual >= settings.ZETA_RESIDUAL_TOL:
                flagged.append(zero)
            else:
                zeros.append(zero)
    found = len(zeros) + len(violations) + len(flagged)
    if found != expected:
        raise IncompleteScanError(f"isolated {found} zeros but boxes count {expected}",
                                  (0.5, settings.ZETA_SIGMA_MAX, t_lo, t_hi))
    if violations:
        logger.error(f"{len(violations)} zeta' zero(s) with beta <= 1/2 in [{t_lo}, {t_hi}]")
    if flagged:
        logger.warning(f"{len(flagged)} zeta' zero(s) above the residual tolerance")
    zeros.sort(key=lambda z: z.gamma)
    logger.info(f"zeta' scan [{t_lo}, {t_hi}]: {len(zeros)} zeros in {len(boxes)} boxes")
    return ZetaScanResult(t_lo=t_lo, t_hi=t_hi, zeros=zeros, box_count=expected, boxes_scanned=len(boxes),
                          violations=violations, flagged=flagged)


def normalized_distribution(zeros: Sequence[ZetaPrimeZero], edges: Optional[Sequence[float]] = None,
                            min_samples: int = 500) -> EmpiricalDistribution:
    """Histogram of (beta - 1/2) log(gamma / 2 pi)"""
    if len(zeros) < min_samples:
        raise InsufficientSamplesError(f"need {min_samples} zeros, got {len(zeros)}")
    edges = X_EDGES if edges is None else edges
    heights = [z.gamma for z in zeros]
    return build_histogram([z.normalized_x for z in zeros], edges,
                           metadata={"source": "zeta_prime", "normalization": "log(gamma/2pi)",
                                     "t_min": min(heights), "t_max": max(heights)})


def predicted_x_from_gap(theta: float, alpha1: float = 1.0 / 15.0) -> float:
    """beta_1 pi^2 theta^2 + beta_2 pi^4 theta^4"""
    if not 0.0 <= theta < 1.0 / math.pi:
        raise DomainError(f"theta must lie in [0, 1/pi), got {theta}")
    beta1, beta2 = beta_coefficients(alpha1)
    u = (math.pi * theta) ** 2
    return u * (beta1 + beta2 * u)


def zeta_prime_density_integral(t_lo: float, t_hi: float) -> float:
    """Integral of (1/2 pi) log(t / 4 pi) over [t_lo, t_hi]"""
    def primitive(t):
        return (t * math.log(t / (4.0 * math.pi)) - t) / (2.0 * math.pi)
    return primitive(t_hi) - primitive(t_lo)


def density_discrepancy(zeros: Sequence[ZetaPrimeZero], t_lo: float) -> float:
    """max over zeros of |#{gamma' <= t} - integrated density on [t_lo, t]|"""
    heights = sorted(z.gamma for z in zeros)
    worst = 0.0
    for k, t in enumerate(heights, start=1):
        integral = zeta_prime_density_integral(t_lo, t)
        worst = max(worst, abs(k - integral), abs(k - 1 - integral))
    return worst


def missing_zero_rate(zeta_zero_count: int, prime_zero_count: int, t_lo: float, t_hi: float) -> float:
    """(zeros of zeta - zeros of zeta') per unit height"""
    return (zeta_zero_count - prime_zero_count) / (t_hi - t_lo)


def close_pair_crosscheck(zeta_zeros: Sequence[float], prime_zeros: Sequence[ZetaPrimeZero],
                          theta_max: float = 0.3, alpha1: float = 1.0 / 15.0) -> Dict:
    """
    For consecutive zeta zeros with rescaled gap theta < theta_max, compare
    the normalized x of the zeta' zero nearest the pair midpoint with the
    gap prediction. Reported with the median relative error.
    """
    gammas = np.asarray(sorted(zeta_zeros))
    primes = sorted(prime_zeros, key=lambda z: z.gamma)
    prime_heights = np.array([z.gamma for z in primes])
    rows = []
    for lo, hi in zip(gammas[:-1], gammas[1:]):
        mid = 0.5 * (lo + hi)
        theta = (hi - lo) * math.log(mid / (2.0 * math.pi)) / (2.0 * math.pi)
        if theta >= theta_max or prime_heights.size == 0:
            continue
        j = int(np.argmin(np.abs(prime_heights - mid)))
        observed = primes[j].normalized_x
        predicted = predicted_x_from_gap(theta, alpha1)
        rows.append({"gamma_mid": float(mid), "theta": float(theta), "observed": observed,
                     "predicted": predicted, "relative_error": abs(observed - predicted) / predicted})
    errors = [r["relative_error"] for r in rows]
    return {"pairs": rows, "median_relative_error": float(np.median(errors)) if errors else float("nan")}


def spot_check_sigma_bound(t0: float, t1: float, sigma_hi: float = 10.0) -> Tuple[int, int]:
    """(zeros with 1/2 < sigma < sigma_hi, zeros with 1/2 < sigma < ZETA_SIGMA_MAX) in one box"""
    sigma0 = 0.5 + settings.ZETA_SIGMA_OFFSET
    wide = winding_number(lambda s: zeta_prime(s, strict=False), BoxContour(sigma0, sigma_hi, t0, t1))
    narrow = count_zeta_prime_zeros_in_box((sigma0, settings.ZETA_SIGMA_MAX, t0, t1))
    return wide, narrow
