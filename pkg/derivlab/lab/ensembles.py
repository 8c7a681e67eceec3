"""
Eigenphase samplers: CUE (Haar unitary), COE (U U^T) and Poisson points on the
circle, plus nearest-neighbour spacings of the rescaled phases.
"""

import math
from typing import Optional, Tuple, Union

import numpy as np

from ..config import settings
from ..errors import DomainError, SamplingError
from ..logging_config import logger
from ..schemas import EigenphaseConfig, Ensemble

RngLike = Union[np.random.Generator, int]


def as_generator(rng: RngLike, seed: Optional[int] = None) -> Tuple[np.random.Generator, int]:
    """Accept a generator or an integer seed; return (generator, recorded seed)"""
    if isinstance(rng, np.random.Generator):
        return rng, int(seed or 0)
    return np.random.default_rng(int(rng)), int(rng)


def haar_unitary_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """count Haar unitaries of size n, shape (count, n, n)"""
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    # multiply column j by the phase of r_jj, otherwise the law is not Haar
    return q * (d / np.abs(d))[..., None, :]


def _wrap_sort(phases: np.ndarray) -> np.ndarray:
    phases = np.where(phases <= -math.pi, phases + 2.0 * math.pi, phases)
    return np.sort(phases, axis=-1, kind="stable")


def _unitary_phases(matrices: np.ndarray, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        ev = np.linalg.eigvals(matrices)
    except np.linalg.LinAlgError as exc:
        raise SamplingError(f"eigenvalue iteration failed: {exc}", seed=seed) from exc
    deviation = np.max(np.abs(np.abs(ev) - 1.0), axis=-1)
    return np.angle(ev), deviation > settings.UNIT_MODULUS_TOL


def _draw(tag: Ensemble, n: int, count: int, rng: np.random.Generator, seed: int) -> np.ndarray:
    if tag == Ensemble.POISSON:
        return -rng.uniform(-math.pi, math.pi, size=(count, n))
    u = haar_unitary_batch(n, count, rng)
    if tag == Ensemble.COE:
        u = u @ np.swapaxes(u, -1, -2)
        transposed = np.swapaxes(u, -1, -2)
        if not np.allclose(u, transposed, rtol=0.0, atol=1e-12):
            raise SamplingError("U U^T is not symmetric", seed=seed)
        u = 0.5 * (u + transposed)
    phases, bad = _unitary_phases(u, seed)
    for attempt in range(settings.MAX_RESAMPLE):
        if not np.any(bad):
            break
        logger.warning(f"resampling {int(bad.sum())} {tag.value} draw(s) off the unit circle "
                       f"(seed={seed}, attempt {attempt + 1})")
        redo, redo_bad = _draw_unitary_only(tag, n, int(bad.sum()), rng, seed)
        phases[bad] = redo
        bad_idx = np.flatnonzero(bad)
        bad[:] = False
        bad[bad_idx[redo_bad]] = True
    if np.any(bad):
        raise SamplingError(f"{int(bad.sum())} draw(s) still off the unit circle", seed=seed)
    return phases


def _draw_unitary_only(tag: Ensemble, n: int, count: int, rng: np.random.Generator, seed: int):
    u = haar_unitary_batch(n, count, rng)
    if tag == Ensemble.COE:
        u = u @ np.swapaxes(u, -1, -2)
        u = 0.5 * (u + np.swapaxes(u, -1, -2))
    return _unitary_phases(u, seed)


def sample_phase_batch(tag: Ensemble, n: int, count: int, rng: RngLike,
                       seed: Optional[int] = None) -> np.ndarray:
    """Sorted raw phases in (-pi, pi], shape (count, n)"""
    tag = Ensemble(tag)
    if tag == Ensemble.EXPLICIT:
        raise DomainError("EXPLICIT configurations are built with EigenphaseConfig.from_phases")
    minimum = 1 if tag == Ensemble.POISSON else 2
    if n < minimum:
        raise DomainError(f"{tag.value} needs n >= {minimum}, got {n}")
    gen, recorded = as_generator(rng, seed)
    return _wrap_sort(_draw(tag, n, count, gen, recorded))


def _single(tag: Ensemble, n: int, rng: RngLike, seed: Optional[int]) -> EigenphaseConfig:
    gen, recorded = as_generator(rng, seed)
    phases = sample_phase_batch(tag, n, 1, gen, recorded)[0]
    return EigenphaseConfig(n=n, raw_phases=phases.tolist(),
                            rescaled=(n * phases / (2.0 * math.pi)).tolist(),
                            ensemble_tag=tag, seed=recorded)


def sample_cue(n: int, rng: RngLike, seed: Optional[int] = None) -> EigenphaseConfig:
    """Eigenphases of a Haar unitary matrix"""
    return _single(Ensemble.CUE, n, rng, seed)


def sample_coe(n: int, rng: RngLike, seed: Optional[int] = None) -> EigenphaseConfig:
    """Eigenphases of U U^T with U Haar"""
    return _single(Ensemble.COE, n, rng, seed)


def sample_poisson(n: int, rng: RngLike, seed: Optional[int] = None) -> EigenphaseConfig:
    """n independent uniform phases"""
    return _single(Ensemble.POISSON, n, rng, seed)


def sample_ensemble(tag: Ensemble, n: int, rng: RngLike, seed: Optional[int] = None) -> EigenphaseConfig:
    return _single(Ensemble(tag), n, rng, seed)


def nearest_spacings(config: EigenphaseConfig) -> np.ndarray:
    """The N wraparound gaps x_{j+1} - x_j, last one x_1 + N - x_N"""
    return spacings_from_phases(config.phases[None, :], config.n)[0]


def spacings_from_phases(phases: np.ndarray, n: int) -> np.ndarray:
    """Wraparound gaps of rescaled phases, row by row"""
    x = n * np.asarray(phases, dtype=float) / (2.0 * math.pi)
    wrap = x[:, :1] + n - x[:, -1:]
    return np.concatenate([np.diff(x, axis=1), wrap], axis=1)


def rotate_config(config: EigenphaseConfig, alpha: float) -> EigenphaseConfig:
    """Rotate every eigenvalue by exp(i alpha)"""
    return EigenphaseConfig.from_phases(config.phases + alpha, ensemble_tag=config.ensemble_tag,
                                        seed=config.seed)


def poisson_spacing_cdf(s, n: int):
    """P(gap <= s) for n uniform points on a circle of circumference n"""
    s = np.clip(np.asarray(s, dtype=float), 0.0, n)
    return 1.0 - (1.0 - s / n) ** (n - 1)
