import math

import numpy as np
import pytest

from derivlab.errors import DomainError, InsufficientSamplesError
from derivlab.lab.conditioned_mc import (GATED, accumulate, combine_one_level, empirical_one_level,
                                         empty_report, estimate_moments, estimate_normalization,
                                         finalize_report, gated_z_scores, log_weights, merge_reports,
                                         observables_batch, one_level_batch, sample_weighted,
                                         weighted_batch, weighted_mean)
from derivlab.lab.expansions import moment_polynomials


def test_log_weights():
    phases = np.full((2, 3), math.pi)
    assert np.allclose(log_weights(phases), 12 * math.log(2))


def test_observables_shape_checks():
    with pytest.raises(DomainError):
        observables_batch(np.zeros((2, 5)), 8)
    with pytest.raises(DomainError):
        weighted_batch(5, 10, 0)


def test_batch_observables():
    n = 10
    phases, weights, obs = weighted_batch(n, 200, 4)
    assert phases.shape == (200, n - 2)
    assert np.all(weights >= 0)
    assert np.allclose(obs["A0"].real, (n - 2) / (2 * n), atol=1e-12)
    assert np.allclose(obs["B1"].real, 0.25, atol=1e-12)
    assert np.allclose(obs["A0^3"], (n * obs["A0"]) ** 3)


def test_weighted_mean():
    assert weighted_mean([1.0, 3.0], [1.0, 3.0]) == 2.5


def test_batches_merge_like_one_report():
    n = 8
    _, weights, obs = weighted_batch(n, 400, 1)
    whole = accumulate(empty_report(n), weights, obs, batches=2)
    first = accumulate(empty_report(n), weights[:200], {k: v[:200] for k, v in obs.items()})
    second = accumulate(empty_report(n), weights[200:], {k: v[200:] for k, v in obs.items()})
    merged = merge_reports([first, second])
    assert merged.batch_counts == whole.batch_counts
    assert merged.batch_weight == whole.batch_weight
    assert merged.batch_sums == whole.batch_sums
    with pytest.raises(DomainError):
        merge_reports([first, empty_report(9)])
    with pytest.raises(InsufficientSamplesError):
        merge_reports([])


def test_finalize_report():
    n = 8
    _, weights, obs = weighted_batch(n, 2000, 2)
    report = finalize_report(accumulate(empty_report(n), weights, obs, batches=20), min_samples=1000)
    one = report.estimates["one"]
    assert math.isclose(one.mean, 1.0, rel_tol=1e-12)
    assert math.isclose(report.estimates["A0"].mean, (n - 2) / (2 * n), rel_tol=1e-10)
    assert 0 < report.effective_sample_size <= 2000
    assert report.predictions["A0^3"] == moment_polynomials(n).a0_cubed
    assert [name for name, _ in gated_z_scores(report)] == list(GATED)
    with pytest.raises(InsufficientSamplesError):
        finalize_report(report, min_samples=5000)


def test_estimate_moments_from_sample_stream():
    samples = list(sample_weighted(8, 500, 3, seed=3))
    assert len(samples) == 500
    assert samples[0].config.n == 6
    report = estimate_moments(samples, batch_count=10, min_samples=100)
    assert report.n == 8
    assert report.sample_count == 500
    with pytest.raises(InsufficientSamplesError):
        estimate_moments([])


def test_normalization_matches_closed_form():
    n = 8
    _, weights, obs = weighted_batch(n, 20000, 5)
    report = accumulate(empty_report(n), weights, obs, batches=50)
    mean, stderr = estimate_normalization(report)
    assert abs(mean - moment_polynomials(n).c_n_inv) <= 6 * stderr


def test_repulsion_from_the_double_eigenvalue():
    n = 10
    _, weights, obs = weighted_batch(n, 20000, 6)
    unconditioned = float(np.mean(obs["near_one"].real))
    weighted = weighted_mean(obs["near_one"], weights).real
    assert abs(unconditioned - 2 / (n - 2)) < 0.02
    assert weighted < 0.15


def test_one_level_mass_per_configuration():
    n = 10
    m = n - 2
    edges = np.linspace(-m / 2, m / 2, 17)
    batches = []
    for seed in range(3):
        phases, weights, _ = weighted_batch(n, 300, seed)
        batches.append(one_level_batch(phases, weights, edges))
    dist = combine_one_level(batches, edges, m)
    assert math.isclose(dist.total_mass, m, rel_tol=1e-10)
    assert dist.metadata["configurations"] == 900
    assert len(dist.stderr) == 16


def test_empirical_one_level_needs_samples():
    samples = list(sample_weighted(8, 200, 1))
    edges = np.linspace(-3, 3, 13)
    with pytest.raises(InsufficientSamplesError):
        empirical_one_level(samples, edges)
    dist = empirical_one_level(samples, edges, batch_count=4, min_samples=100)
    assert math.isclose(dist.total_mass, 6, rel_tol=1e-10)


@pytest.mark.slow
def test_moments_against_closed_forms():
    n = 12
    report = empty_report(n)
    for seed in range(10):
        _, weights, obs = weighted_batch(n, 20000, seed)
        report = accumulate(report, weights, obs, batches=5)
    report = finalize_report(report)
    for name, z in gated_z_scores(report):
        assert abs(z) <= 5, name


@pytest.mark.slow
def test_conditioning_shifts_the_bounded_mean():
    n = 12
    weighted, plain = [], []
    for seed in range(20):
        _, weights, obs = weighted_batch(n, 10_000, 200 + seed)
        # Re A0 is the same for every configuration, so it cannot separate the measures
        assert math.isclose(weighted_mean(obs["A0"], weights).real, (n - 2) / (2 * n), rel_tol=1e-12)
        weighted.append(weighted_mean(obs["near_one"], weights).real)
        plain.append(float(np.mean(obs["near_one"].real)))
    shift = np.array(plain) - np.array(weighted)
    assert shift.mean() > 3 * shift.std(ddof=1) / math.sqrt(shift.size)


@pytest.mark.slow
def test_derivative_moment_is_positive():
    n = 12
    report = empty_report(n)
    for seed in range(10):
        _, weights, obs = weighted_batch(n, 20_000, 300 + seed)
        report = accumulate(report, weights, obs, batches=5)
    report = finalize_report(report)
    a1 = report.estimates["A1"]
    assert a1.predicted == pytest.approx(13 / 3)
    assert a1.mean > 3 * a1.stderr
    assert abs(a1.z_score) <= 5
    poly = moment_polynomials(n)
    assert report.estimates["B2"].predicted == pytest.approx(poly.b2_mean)
    assert poly.b2_mean < poly.b2_mean_published
