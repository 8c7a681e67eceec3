"""
Importance sampling of the ensemble with a double eigenvalue at 1.

Configurations are Haar U(N-2) draws weighted by |Lambda(1)|^4. Estimates are
self-normalized; every report keeps per-batch sums so reports from disjoint
seed ranges merge by concatenating their batches.
"""

import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..config import settings
from ..errors import DomainError, InsufficientSamplesError
from ..logging_config import logger
from ..schemas import (EigenphaseConfig, EmpiricalDistribution, Ensemble,
                       MomentReport, ObservableEstimate, WeightedSample)
from .ensembles import RngLike, as_generator, sample_phase_batch
from .expansions import aj_sums, coeff_b, moment_polynomials

OBSERVABLES = ("one", "A0", "A0^3", "A1", "A0A1", "B1", "B2", "near_one")
GATED = ("A0^3", "A1", "A0A1")
MIN_ONE_LEVEL_SAMPLES = 100_000


def log_weights(phases: np.ndarray) -> np.ndarray:
    """log |Lambda(1)|^4 = 4 sum log|2 sin(t/2)| per row"""
    return 4.0 * np.sum(np.log(np.abs(2.0 * np.sin(0.5 * np.asarray(phases)))), axis=-1)


def observables_batch(phases: np.ndarray, n: int) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """
    Weights and observables for rows of N-2 phases, with A_j taken at
    dimension N. Observable scale: A0^3 = L^3, A1 = L', A0A1 = L L' where
    L = N A_0 and L' = -N^2 A_1.
    """
    phases = np.atleast_2d(np.asarray(phases, dtype=float))
    m = phases.shape[1]
    if m != n - 2:
        raise DomainError(f"expected rows of {n - 2} phases, got {m}")
    a0, a1 = aj_sums(n * phases / (2.0 * math.pi), n, 1)
    b1, b2 = coeff_b(a0, a1, n)
    big_l = n * a0
    big_l_prime = -(n ** 2) * a1
    xi = m * phases / (2.0 * math.pi)
    obs = {
        "one": np.ones(phases.shape[0], dtype=complex),
        "A0": a0,
        "A0^3": big_l ** 3,
        "A1": big_l_prime,
        "A0A1": big_l * big_l_prime,
        "B1": b1,
        "B2": b2,
        "near_one": np.mean(np.abs(xi) < 1.0, axis=-1).astype(complex),
    }
    return np.exp(log_weights(phases)), obs


def weighted_batch(n: int, count: int, rng: RngLike) -> Tuple[np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """count Haar U(N-2) draws: (phases, weights, observables)"""
    if n < 6:
        raise DomainError(f"conditioned sampling needs n >= 6, got {n}")
    gen, _ = as_generator(rng)
    phases = sample_phase_batch(Ensemble.CUE, n - 2, count, gen)
    weights, obs = observables_batch(phases, n)
    return phases, weights, obs


def sample_weighted(n: int, count: int, rng: RngLike, seed: int = 0) -> Iterator[WeightedSample]:
    """Stream of weighted U(N-2) configurations"""
    phases, weights, obs = weighted_batch(n, count, rng)
    m = n - 2
    for k in range(count):
        row = phases[k]
        config = EigenphaseConfig(n=m, raw_phases=row.tolist(), rescaled=(m * row / (2.0 * math.pi)).tolist(),
                                  ensemble_tag=Ensemble.CUE, seed=seed)
        yield WeightedSample(config=config, weight=float(weights[k]),
                             observables={name: complex(values[k]) for name, values in obs.items()})


def weighted_mean(values, weights) -> complex:
    """Self-normalized mean sum(w g) / sum(w)"""
    w = np.asarray(weights, dtype=float)
    return complex(np.sum(w * np.asarray(values)) / np.sum(w))


# --------------------------------------------------------------------------
# Reports


def empty_report(n: int) -> MomentReport:
    return MomentReport(n=n, batch_counts=[], batch_weight=[], batch_weight_sq=[],
                        batch_sums={name: [] for name in OBSERVABLES})


def accumulate(report: MomentReport, weights: np.ndarray, obs: Dict[str, np.ndarray],
               batches: int = 1) -> MomentReport:
    """Append the samples as `batches` contiguous batches"""
    weights = np.asarray(weights, dtype=float)
    pieces = np.array_split(np.arange(weights.size), batches)
    counts = list(report.batch_counts)
    wsum = list(report.batch_weight)
    wsq = list(report.batch_weight_sq)
    sums = {name: list(report.batch_sums.get(name, [])) for name in OBSERVABLES}
    for idx in pieces:
        if idx.size == 0:
            continue
        w = weights[idx]
        counts.append(int(idx.size))
        wsum.append(float(np.sum(w)))
        wsq.append(float(np.sum(w * w)))
        for name in OBSERVABLES:
            sums[name].append(complex(np.sum(w * obs[name][idx])))
    return report.model_copy(update={"batch_counts": counts, "batch_weight": wsum,
                                     "batch_weight_sq": wsq, "batch_sums": sums})


def merge_reports(reports: Sequence[MomentReport]) -> MomentReport:
    """Concatenate batches in the given order"""
    if not reports:
        raise InsufficientSamplesError("no reports to merge")
    n = reports[0].n
    merged = empty_report(n)
    for r in reports:
        if r.n != n:
            raise DomainError("cannot merge reports for different N")
        merged = merged.model_copy(update={
            "batch_counts": merged.batch_counts + r.batch_counts,
            "batch_weight": merged.batch_weight + r.batch_weight,
            "batch_weight_sq": merged.batch_weight_sq + r.batch_weight_sq,
            "batch_sums": {k: merged.batch_sums[k] + list(r.batch_sums.get(k, [])) for k in OBSERVABLES},
        })
    return merged


def predictions_for(n: int) -> Dict[str, float]:
    poly = moment_polynomials(n)
    return {"one": 1.0, "A0": poly.a0_mean, "A0^3": poly.a0_cubed, "A1": poly.a1_mean,
            "A0A1": poly.a0a1_mean, "B1": 0.25, "B2": poly.b2_mean,
            "B2_published": poly.b2_mean_published}


def _batch_means(numer: np.ndarray, denom: np.ndarray) -> Tuple[complex, float]:
    mean = complex(math.fsum(numer.real) / math.fsum(denom), math.fsum(numer.imag) / math.fsum(denom))
    b = numer.size
    if b < 2:
        return mean, float("nan")
    per_batch = (numer / denom).real
    return mean, float(np.std(per_batch, ddof=1) / math.sqrt(b))


def finalize_report(report: MomentReport, min_samples: Optional[int] = None) -> MomentReport:
    """Means, batch-means errors, z-scores against the closed forms, ESS"""
    min_samples = settings.MIN_MOMENT_SAMPLES if min_samples is None else min_samples
    if report.sample_count < min_samples:
        raise InsufficientSamplesError(f"moment estimates need {min_samples} samples, "
                                       f"got {report.sample_count}")
    denom = np.asarray(report.batch_weight)
    predictions = predictions_for(report.n)
    estimates = {}
    for name in OBSERVABLES:
        numer = np.asarray(report.batch_sums[name], dtype=complex)
        mean, stderr = _batch_means(numer, denom)
        predicted = predictions.get(name)
        z = None
        if predicted is not None and stderr > 0:
            z = (mean.real - predicted) / stderr
        estimates[name] = ObservableEstimate(name=name, mean=mean.real, imag_mean=mean.imag, stderr=stderr,
                                             predicted=predicted, z_score=z)

    total_w = math.fsum(report.batch_weight)
    ess = total_w ** 2 / math.fsum(report.batch_weight_sq)
    warnings = []
    if ess < settings.MIN_EFFECTIVE_SAMPLES:
        warnings.append(f"effective sample size {ess:.1f} below {settings.MIN_EFFECTIVE_SAMPLES}")
        logger.warning(f"N={report.n}: {warnings[-1]}")
    return report.model_copy(update={"predictions": predictions, "estimates": estimates,
                                     "effective_sample_size": ess, "warnings": warnings})


def estimate_moments(samples: Sequence[WeightedSample], n: Optional[int] = None,
                     batch_count: Optional[int] = None, min_samples: Optional[int] = None) -> MomentReport:
    """Self-normalized averages of the observables over a sample list"""
    if not samples:
        raise InsufficientSamplesError("no samples")
    n = n if n is not None else samples[0].config.n + 2
    weights = np.array([s.weight for s in samples])
    obs = {name: np.array([s.observables[name] for s in samples]) for name in OBSERVABLES}
    report = accumulate(empty_report(n), weights, obs, batch_count or settings.BATCH_COUNT)
    return finalize_report(report, min_samples)


def estimate_normalization(report: MomentReport) -> Tuple[float, float]:
    """Mean unnormalized weight and its batch-means error; compare with C_N^-1"""
    counts = np.asarray(report.batch_counts, dtype=float)
    if counts.size < 2:
        raise InsufficientSamplesError("normalization error needs at least two batches")
    per_batch = np.asarray(report.batch_weight) / counts
    mean = math.fsum(report.batch_weight) / counts.sum()
    return mean, float(np.std(per_batch, ddof=1) / math.sqrt(per_batch.size))


# --------------------------------------------------------------------------
# Rescaled 1-level density


def one_level_batch(phases: np.ndarray, weights: np.ndarray, edges: Sequence[float]) -> Tuple:
    """
    Weighted bin counts of xi = t M / (2 pi) for one batch:
    (masses, underflow, overflow, sum of weights, configurations)
    """
    phases = np.atleast_2d(phases)
    m = phases.shape[1]
    edges = np.asarray(edges, dtype=float)
    xi = (m * phases / (2.0 * math.pi)).ravel()
    w = np.repeat(np.asarray(weights, dtype=float), m)
    hist, _ = np.histogram(xi, bins=edges, weights=w)
    return (hist, float(np.sum(w[xi < edges[0]])), float(np.sum(w[xi > edges[-1]])),
            float(np.sum(weights)), int(phases.shape[0]))


def combine_one_level(batches: Sequence[Tuple], edges: Sequence[float],
                      m: int, metadata: Optional[Dict] = None) -> EmpiricalDistribution:
    """
    Per-configuration bin masses sum_b H_b / sum_b W_b, with batch-means
    errors. Summed over all of (-M/2, M/2] the masses give M.
    """
    hists = np.array([b[0] for b in batches], dtype=float)
    wsum = np.array([b[3] for b in batches], dtype=float)
    configs = int(sum(b[4] for b in batches))
    total = wsum.sum()
    masses = hists.sum(axis=0) / total
    stderr = None
    if len(batches) >= 2:
        per_batch = hists / wsum[:, None]
        stderr = (np.std(per_batch, axis=0, ddof=1) / math.sqrt(len(batches))).tolist()
    meta = dict(metadata or {})
    meta.update({"m": m, "configurations": configs})
    return EmpiricalDistribution(bin_edges=list(edges), counts=masses.tolist(),
                                 underflow=sum(b[1] for b in batches) / total,
                                 overflow=sum(b[2] for b in batches) / total,
                                 total_samples=configs, stderr=stderr, metadata=meta)


def empirical_one_level(samples: Sequence[WeightedSample], edges: Sequence[float],
                        batch_count: Optional[int] = None,
                        min_samples: int = MIN_ONE_LEVEL_SAMPLES) -> EmpiricalDistribution:
    """Weighted histogram of rescaled phases, mass M per configuration"""
    if len(samples) < min_samples:
        raise InsufficientSamplesError(f"1-level histogram needs {min_samples} samples, got {len(samples)}")
    phases = np.array([s.config.raw_phases for s in samples])
    weights = np.array([s.weight for s in samples])
    pieces = np.array_split(np.arange(len(samples)), batch_count or settings.BATCH_COUNT)
    batches = [one_level_batch(phases[idx], weights[idx], edges) for idx in pieces if idx.size]
    return combine_one_level(batches, edges, phases.shape[1])


def gated_z_scores(report: MomentReport) -> List[Tuple[str, float]]:
    return [(name, report.estimates[name].z_score) for name in GATED if name in report.estimates]
