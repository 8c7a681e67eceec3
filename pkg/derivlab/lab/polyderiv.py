"""
Zeros of the derivative of a characteristic polynomial.

Two paths: the whole root set (companion eigenvalues of the differentiated
coefficient list plus a Newton polish), and the single root z' that sits
between a close pair of eigenvalues at rescaled positions +-theta/2. The
close-pair root is located in the shifted variable eps = 1 - z, so
delta = N eps keeps full relative precision, and is certified by an
argument-principle count on the twice-bitten disk.
"""

import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import settings
from ..errors import (DegreeLimitError, DomainError, SamplingError,
                      UniquenessViolation)
from ..logging_config import logger
from ..schemas import DerivRootSet, EigenphaseConfig, Ensemble, PairSample
from .contour import BoxContour, Contour, TwiceBittenDisk, contour_integral, winding_number
from .ensembles import RngLike, as_generator, sample_phase_batch
from .expansions import compute_Aj, one_minus_e_n
from .stats_io import write_rows_csv

PhasesLike = Union[EigenphaseConfig, Sequence[float], np.ndarray]


def _raw_phases(config: PhasesLike) -> np.ndarray:
    if isinstance(config, EigenphaseConfig):
        return config.phases
    return np.asarray(config, dtype=float).ravel()


def char_poly_from_phases(config: PhasesLike) -> np.ndarray:
    """Coefficients (highest degree first) of prod_j (z - exp(i t_j)), leading 1"""
    phases = _raw_phases(config)
    if phases.size > settings.MAX_POLY_DEGREE:
        raise DegreeLimitError(f"degree {phases.size} above limit {settings.MAX_POLY_DEGREE}")
    coeffs = np.ones(1, dtype=complex)
    for e in np.exp(1j * phases):
        coeffs = np.convolve(coeffs, np.array([1.0, -e]))
    coeffs[0] = 1.0
    return coeffs


def _logderiv(z: np.ndarray, eig: np.ndarray) -> np.ndarray:
    """f'/f(z) = sum_k 1/(z - e_k), for every point in z"""
    z = np.asarray(z, dtype=complex)
    return np.sum(1.0 / (z[..., None] - eig), axis=-1)


def _logderiv_prime(z: np.ndarray, eig: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return -np.sum(1.0 / (z[..., None] - eig) ** 2, axis=-1)


def _deriv_roots_array(phases: np.ndarray) -> Tuple[np.ndarray, int]:
    """Polished, residual-checked roots of Lambda'; returns (kept roots, flagged count)"""
    n = phases.size
    eig = np.exp(1j * phases)
    deriv = np.polyder(char_poly_from_phases(phases))
    roots = np.roots(deriv)

    # one Newton step on Lambda' = Lambda h: step = h / (h^2 + h')
    with np.errstate(divide="ignore", invalid="ignore"):
        h = _logderiv(roots, eig)
        step = h / (h * h + _logderiv_prime(roots, eig))
    polished = np.where(np.isfinite(step), roots - step, roots)

    scale = float(np.max(np.abs(deriv)))
    residual = np.abs(np.polyval(deriv, polished))
    ok = (residual <= settings.RESIDUAL_TOL * scale) & (np.abs(polished) <= 1.0 + settings.GAUSS_LUCAS_SLACK)
    flagged = int(np.count_nonzero(~ok))
    if flagged:
        logger.warning(f"flagged {flagged} of {n - 1} derivative root(s) at N={n}")
    return polished[ok], flagged


def deriv_roots_all(config: PhasesLike) -> DerivRootSet:
    """All N-1 zeros of Lambda' with S = N(1 - |z|)"""
    phases = _raw_phases(config)
    n = phases.size
    if n < 2:
        raise DomainError("the derivative has roots only for N >= 2")
    roots, flagged = _deriv_roots_array(phases)
    return DerivRootSet(n=n, roots=roots.tolist(), s_values=(n * (1.0 - np.abs(roots))).tolist(),
                        flagged_count=flagged)


def s_values_batch(phase_rows: np.ndarray) -> Tuple[np.ndarray, int]:
    """Concatenated S values of every row of a (count, N) phase array, plus flagged total"""
    phase_rows = np.atleast_2d(phase_rows)
    n = phase_rows.shape[1]
    chunks, flagged = [], 0
    for row in phase_rows:
        roots, bad = _deriv_roots_array(row)
        chunks.append(n * (1.0 - np.abs(roots)))
        flagged += bad
    return (np.concatenate(chunks) if chunks else np.empty(0)), flagged


def truncated_mean_s(s_values, n: int) -> float:
    """Mean of the S values that do not exceed N"""
    s = np.asarray(s_values, dtype=float)
    kept = s[s <= n]
    return float(kept.mean()) if kept.size else float("nan")


def roots_to_csv(rootsets: Union[DerivRootSet, Sequence[DerivRootSet]], path: Path) -> Path:
    """s_values, one per line under an `s` header, root sets in the order given"""
    if isinstance(rootsets, DerivRootSet):
        rootsets = [rootsets]
    return write_rows_csv(path, ["s"], ([s] for rs in rootsets for s in rs.s_values))


# --------------------------------------------------------------------------
# Close pair at +-theta/2


def _check_pair(theta: float, background, n: int) -> np.ndarray:
    if theta < 0 or theta >= 1.0 / math.pi:
        raise DomainError(f"theta must lie in [0, 1/pi), got {theta}")
    bg = np.asarray(background, dtype=float).ravel()
    half = 0.5 * theta
    inside = ((bg > -0.5 * n) & (bg <= -half)) | ((bg >= half) & (bg < 0.5 * n))
    if not np.all(inside):
        raise DomainError("background phases must lie in (-N/2, -theta/2] U [theta/2, N/2)")
    return bg


def pair_config(theta: float, background, n: int) -> EigenphaseConfig:
    """The full N-point configuration: background plus the pair at +-theta/2"""
    x = np.concatenate([np.asarray(background, dtype=float), [-0.5 * theta, 0.5 * theta]])
    return EigenphaseConfig.from_phases(2.0 * math.pi * x / n)


def _pair_geometry(theta: float, n: int) -> Tuple[float, float, float]:
    """(alpha, eps_c, radius): half-angle of the pair, disk center in eps, disk radius"""
    alpha = math.pi * theta / n
    return alpha, 2.0 * math.sin(0.5 * alpha) ** 2, math.sin(alpha)


def _pair_eigenvalues(theta: float, bg: np.ndarray, n: int) -> np.ndarray:
    alpha = math.pi * theta / n
    return np.concatenate([np.exp(2j * math.pi * bg / n), [np.exp(1j * alpha), np.exp(-1j * alpha)]])


def _shifted_poles(theta: float, bg: np.ndarray, n: int) -> np.ndarray:
    """w_k = 1 - e_k, so that f'/f(1 - eps) = sum 1/(w_k - eps)"""
    _, eps_c, radius = _pair_geometry(theta, n)
    pair = np.array([complex(eps_c, -radius), complex(eps_c, radius)])
    return np.concatenate([one_minus_e_n(bg, n), pair])


def _newton_eps(w: np.ndarray, eps: complex, eps_c: float, radius: float,
                damping: float = 1.0) -> Optional[complex]:
    limit = radius - settings.DISK_SLACK
    for _ in range(settings.NEWTON_MAX_ITER):
        d = w - eps
        h = np.sum(1.0 / d)
        dh = np.sum(1.0 / (d * d))
        step = h / dh
        if not np.isfinite(step):
            return None
        trial = eps - damping * step
        if damping < 1.0:
            # halve until the iterate stays in the disk
            shrink = damping
            while abs(trial - eps_c) >= limit and shrink > 1e-6:
                shrink *= 0.5
                trial = eps - shrink * step
        if abs(trial - eps_c) >= limit:
            return None
        converged = abs(trial - eps) <= 4.0 * np.finfo(float).eps * max(abs(trial), 1e-300)
        eps = trial
        if converged:
            break
    return eps


def _bite_radius(theta: float, bg: np.ndarray, n: int) -> float:
    alpha, _, radius = _pair_geometry(theta, n)
    eig = _pair_eigenvalues(theta, bg, n)
    p = np.exp(1j * alpha)
    dist = np.abs(eig - p)
    eps0 = float(np.min(dist[dist > 1e-12]))
    return min(eps0 / n, 2.0 * radius * math.sin(0.5 * settings.BITE_ANGLE))


def _bitten_disk(theta: float, bg: np.ndarray, n: int, bite: Optional[float]) -> TwiceBittenDisk:
    alpha = math.pi * theta / n
    return TwiceBittenDisk(alpha, bite if bite is not None else _bite_radius(theta, bg, n))


def count_derivative_zeros(contour: Contour, phases: PhasesLike) -> int:
    """Zeros of Lambda' inside the contour: winding of f'/f plus enclosed zeros of f"""
    eig = np.exp(1j * _raw_phases(phases))
    winding = winding_number(lambda z: _logderiv(z, eig), contour)
    return winding + int(np.count_nonzero(contour.encloses(eig)))


def count_roots_in_contour(theta: float, background, n: int, bite: Optional[float] = None) -> int:
    """Zeros of f' inside the twice-bitten disk of the pair"""
    bg = _check_pair(theta, background, n)
    if theta == 0:
        raise DomainError("the bitten disk is empty at theta = 0")
    eig = _pair_eigenvalues(theta, bg, n)
    contour = _bitten_disk(theta, bg, n, bite)
    return winding_number(lambda z: _logderiv(z, eig), contour)


def _eps_by_boxes(theta: float, bg: np.ndarray, n: int, max_depth: int = 40) -> Optional[complex]:
    """Quadtree of argument-principle counts over the square around the disk"""
    _, eps_c, radius = _pair_geometry(theta, n)
    center = 1.0 - eps_c
    phases = np.angle(_pair_eigenvalues(theta, bg, n))
    boxes = [(center - radius, center + radius, -radius, radius)]
    for _ in range(max_depth):
        children = []
        for x0, x1, y0, y1 in boxes:
            xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            for box in ((x0, xm, y0, ym), (xm, x1, y0, ym), (xm, x1, ym, y1), (x0, xm, ym, y1)):
                nearest = complex(min(max(center, box[0]), box[1]), min(max(0.0, box[2]), box[3]))
                if abs(nearest - center) >= radius:
                    continue
                if count_derivative_zeros(BoxContour(*box), phases) > 0:
                    children.append(box)
        boxes = children
        if not boxes or boxes[0][1] - boxes[0][0] < 1e-6 * radius:
            break
    for x0, x1, y0, y1 in boxes:
        z = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        if abs(z - center) < radius:
            return 1.0 - z
    return None


def _locate_eps(theta: float, bg: np.ndarray, n: int) -> complex:
    """eps' = 1 - z' for the root inside the pair disk, uncertified"""
    _, eps_c, radius = _pair_geometry(theta, n)
    w = _shifted_poles(theta, bg, n)
    eps = _newton_eps(w, complex(eps_c), eps_c, radius)
    if eps is None:
        logger.debug(f"Newton left the disk at theta={theta}, N={n}; retrying damped")
        eps = _newton_eps(w, complex(eps_c), eps_c, radius, damping=0.5)
    if eps is None:
        logger.warning(f"damped Newton failed at theta={theta}, N={n}; isolating by box counts")
        start = _eps_by_boxes(theta, bg, n)
        if start is not None:
            eps = _newton_eps(w, start, eps_c, radius, damping=0.5)
    if eps is None:
        raise UniquenessViolation(theta, bg.tolist(), n, 0)
    return eps


def _certified_eps(theta: float, bg: np.ndarray, n: int) -> complex:
    eps = _locate_eps(theta, bg, n)
    count = count_roots_in_contour(theta, bg, n)
    if count != 1:
        raise UniquenessViolation(theta, bg.tolist(), n, count)
    return eps


def root_in_disk(theta: float, background, n: int) -> complex:
    """The unique zero of f' inside the disk with diameter e_N(-theta/2), e_N(theta/2)"""
    bg = _check_pair(theta, background, n)
    if theta == 0:
        return 1.0 + 0.0j
    return 1.0 - _certified_eps(theta, bg, n)


def root_by_contour_integral(theta: float, background, n: int, bite: Optional[float] = None) -> complex:
    """z' = (1/2 pi i) contour integral of z f''/f' over the twice-bitten disk"""
    bg = _check_pair(theta, background, n)
    if theta == 0:
        return 1.0 + 0.0j
    eig = _pair_eigenvalues(theta, bg, n)
    contour = _bitten_disk(theta, bg, n, bite)
    center = contour.center

    def integrand(z):
        h = _logderiv(z, eig)
        return (z - center) * (h + _logderiv_prime(z, eig) / h)

    return center + contour_integral(integrand, contour) / (2j * math.pi)


def delta_star_of(delta: complex, n: int) -> float:
    """N(1 - |1 - delta/N|), written as (2 Re u - |u|^2)/(1 + |1 - u|) with u = delta/N"""
    if abs(delta) >= n:
        raise DomainError(f"|delta| must be below N={n}")
    u = complex(delta) / n
    return n * (2.0 * u.real - abs(u) ** 2) / (1.0 + abs(1.0 - u))


def pair_sample(theta: float, background, n: int) -> PairSample:
    """Locate z' for the pair and attach delta, delta* and A_0, A_1 of the background"""
    bg = _check_pair(theta, background, n)
    if len(bg) != n - 2:
        raise DomainError(f"background must hold N-2 = {n - 2} phases")
    eps = 0j if theta == 0 else _certified_eps(theta, bg, n)
    delta = n * eps
    a = compute_Aj(bg, n, 1)
    return PairSample(theta=theta, n=n, background=bg.tolist(), z_prime=1.0 - eps,
                      delta=delta, delta_star=delta_star_of(delta, n), a0=a[0], a1=a[1])


def fit_delta_coefficients(thetas: Sequence[float], deltas: Sequence[complex]) -> Tuple[complex, complex]:
    """
    (b_1, b_2) from delta(theta) = b_1 u + b_2 u^2 + b_3 u^3, u = pi^2 theta^2,
    solved exactly through three thetas (least squares through more).
    """
    u = (math.pi * np.asarray(thetas, dtype=float)) ** 2
    if u.size < 3 or np.any(u <= 0):
        raise DomainError("the fit needs at least three positive thetas")
    design = np.stack([u, u ** 2, u ** 3], axis=1).astype(complex)
    coeffs, *_ = np.linalg.lstsq(design, np.asarray(deltas, dtype=complex), rcond=None)
    return complex(coeffs[0]), complex(coeffs[1])


def remainder_orders(thetas: Sequence[float], deltas: Sequence[complex], b1: complex, b2: complex) -> List[float]:
    """Observed orders log(r_k+1 / r_k) / log(theta_k+1 / theta_k) of the remainder past theta^4"""
    thetas = np.asarray(thetas, dtype=float)
    u = (math.pi * thetas) ** 2
    r = np.abs(np.asarray(deltas, dtype=complex) - b1 * u - b2 * u * u)
    with np.errstate(divide="ignore"):
        return (np.log(r[1:] / r[:-1]) / np.log(thetas[1:] / thetas[:-1])).tolist()


def admissible_background(n: int, theta: float, rng: RngLike, clearance: Optional[float] = None,
                          max_tries: int = 1000) -> np.ndarray:
    """
    Background for a pair at +-theta/2: a CUE(N) draw with one neighbouring
    pair removed and the rest recentred on that pair's midpoint. Draws whose
    background comes within theta/2 + clearance of 0 are rejected.
    """
    gen, _ = as_generator(rng)
    clearance = 0.0 if clearance is None else clearance
    limit = 0.5 * theta + clearance
    for _ in range(max_tries):
        x = n * sample_phase_batch(Ensemble.CUE, n, 1, gen)[0] / (2.0 * math.pi)
        j = int(gen.integers(n))
        if j < n - 1:
            mid = 0.5 * (x[j] + x[j + 1])
            rest = np.delete(x, [j, j + 1])
        else:
            mid = 0.5 * (x[-1] + x[0] + n)
            rest = x[1:-1]
        bg = np.mod(rest - mid + 0.5 * n, n) - 0.5 * n
        if np.all(np.abs(bg) >= limit) and np.all(bg > -0.5 * n):
            return np.sort(bg)
    raise SamplingError(f"no admissible background after {max_tries} draws (theta={theta}, N={n})")


# --------------------------------------------------------------------------
# Bounds used in the uniqueness argument


def max_re_reciprocal_bound(z: complex) -> float:
    """max over |zeta| = 1 of Re 1/(z - zeta), for |z| < 1"""
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError("bound holds inside the unit disk only")
    return (1.0 - z.real) / (1.0 - abs(z) ** 2)


def eta_quantity(theta0, phi, psi, n: int):
    """
    h = s_N(theta0) sin(phi) Re 1/(z(phi) - e_N(psi)) with
    z(phi) = c_N(theta0) + i exp(i phi) s_N(theta0) on the pair circle.
    """
    angle = 2.0 * math.pi * np.asarray(theta0, dtype=float) / n
    c, s = np.cos(angle), np.sin(angle)
    phi = np.asarray(phi, dtype=float)
    z = c + 1j * np.exp(1j * phi) * s
    zeta = np.exp(2j * math.pi * np.asarray(psi, dtype=float) / n)
    return s * np.sin(phi) * np.real(1.0 / (z - zeta))


def eta_bound(theta0, n: int):
    """pi theta0 / N + 2 pi^2 (7 + 4 sqrt 3) theta0^2 / N^2"""
    theta0 = np.asarray(theta0, dtype=float)
    return math.pi * theta0 / n + 2.0 * math.pi ** 2 * (7.0 + 4.0 * math.sqrt(3.0)) * theta0 ** 2 / n ** 2


def uniqueness_trial(theta: float, background, n: int) -> Tuple[int, Optional[complex]]:
    """(count, z') for one admissible pair; z' is None when the count is not 1"""
    bg = _check_pair(theta, background, n)
    count = count_roots_in_contour(theta, bg, n)
    if count != 1:
        return count, None
    return count, 1.0 - _locate_eps(theta, bg, n)


def nearest_root(rootset: DerivRootSet, target: complex = 1.0) -> complex:
    roots = rootset.roots_array
    return complex(roots[np.argmin(np.abs(roots - target))])

