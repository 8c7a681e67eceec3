"""
One driver per CLI subcommand.

A driver takes the validated RunConfig and its run directory, fans the work
out over seed blocks (or height windows for the zeta scan), merges the block
results in block order and writes its artifacts. Statistical gates are
evaluated only with the `check` flag; deterministic checks always gate.
"""

import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .errors import ContourResolutionError, DomainError, InsufficientSamplesError
from .lab.conditioned_mc import (GATED, accumulate, combine_one_level, empty_report,
                                 estimate_normalization, finalize_report, merge_reports,
                                 one_level_batch, weighted_batch)
from .lab.ensembles import sample_phase_batch, spacings_from_phases
from .lab.expansions import (alpha1_mean, beta_coefficients, coeff_b, compute_Aj,
                             deldist_density, moment_polynomials, one_level_density_w1,
                             pair_correlation, q_asymptotics, q_small_cdf, Regime,
                             spacing_cdf_p2, spacing_density_p2, w1_bin_integral,
                             zeta_log_derivative_constant)
from .lab.polyderiv import (admissible_background, deriv_roots_all, eta_bound, eta_quantity,
                            fit_delta_coefficients, max_re_reciprocal_bound, nearest_root,
                            pair_config, pair_sample, remainder_orders, roots_to_csv,
                            s_values_batch, uniqueness_trial)
from .lab.stats_io import (build_histogram, cdf_at, detect_modes, merge_all,
                           write_histogram_csv, write_json, write_rows_csv)
from .lab.zeta_lab import (close_pair_crosscheck, density_discrepancy, find_zeta_prime_zeros,
                           missing_zero_rate, normalized_distribution, zeta_prime_density_integral,
                           zeta_zeros_on_line)
from .logging_config import logger
from .schemas import Ensemble, GateResult, RunConfig, ZetaPrimeZero
from .config import settings
from .utils import SeedPartitioner

CDF_TAIL_EDGES = np.linspace(0.0, 0.5, 201)
CDF_TAIL_POINTS = (0.05, 0.10, 0.15)
SPACING_EDGES = np.linspace(0.0, 4.0, 401)
SPACING_POINTS = (0.1, 0.2, 0.3)
ONE_LEVEL_EDGES = np.linspace(-5.0, 5.0, 41)
LARGE_S_MIN_N = 100
UNIQUENESS_MIN_N = 16
ZETA_WINDOW = 100.0
ZETA_MODE_MIN_ZEROS = 5000


class ExperimentOutcome(BaseModel):
    """Artifacts written by a driver and the gates it evaluated"""

    artifacts: List[Path] = Field(default_factory=list)
    gates: List[GateResult] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)

    @property
    def failed_gates(self) -> List[GateResult]:
        return [g for g in self.gates if not g.passed]


def make_gate(name: str, observed: float, expected: float, tolerance: float,
              passed: Optional[bool] = None) -> GateResult:
    if passed is None:
        passed = bool(abs(observed - expected) <= tolerance)
    return GateResult(name=name, observed=float(observed), expected=float(expected),
                      tolerance=float(tolerance), passed=passed)


def _flag(config: RunConfig, name: str, default: Any = None) -> Any:
    value = config.flags.get(name)
    return default if value is None else value


def _finish(outcome: ExperimentOutcome, run_dir: Path) -> ExperimentOutcome:
    gates = [g.model_dump() for g in outcome.gates]
    outcome.artifacts.append(write_json(run_dir / "summary.json", {"summary": outcome.summary, "gates": gates}))
    return outcome


# --------------------------------------------------------------------------
# Seed-block workers (module level so the pool can pickle them)


def _deriv_block(index: int, count: int, seed: int, ensemble: str, n: int, edges: Sequence[float],
                 keep_roots: bool = False):
    gen = SeedPartitioner.block_rng(seed, index)
    phases = sample_phase_batch(Ensemble(ensemble), n, count, gen, seed)
    rootsets = []
    if keep_roots:
        rootsets = [deriv_roots_all(row) for row in phases]
        s = np.concatenate([rs.s_values for rs in rootsets]) if rootsets else np.empty(0)
        flagged = sum(rs.flagged_count for rs in rootsets)
    else:
        s, flagged = s_values_batch(phases)
    kept = s[s <= n]
    hist = build_histogram(s, edges, metadata={"ensemble": ensemble, "n": n})
    return hist, flagged, float(kept.sum()), int(kept.size), rootsets


def _spacing_block(index: int, count: int, seed: int, n: int, edges: Sequence[float]):
    gen = SeedPartitioner.block_rng(seed, index)
    phases = sample_phase_batch(Ensemble.CUE, n, count, gen, seed)
    return build_histogram(spacings_from_phases(phases, n), edges, metadata={"ensemble": "CUE", "n": n})


def _expansion_block(index: int, count: int, seed: int, n: int, thetas: Sequence[float]):
    gen = SeedPartitioner.block_rng(seed, index)
    rows = []
    for k in range(count):
        bg = admissible_background(n, max(thetas), gen)
        deltas = [pair_sample(theta, bg, n).delta for theta in thetas]
        fit_b1, fit_b2 = fit_delta_coefficients(thetas, deltas)
        a0, a1 = compute_Aj(bg, n, 1)
        b1, b2 = coeff_b(a0, a1, n)
        orders = remainder_orders(thetas, deltas, b1, b2)
        rows.append({"block": index, "trial": k, "fit_b1": fit_b1, "b1": complex(b1),
                     "fit_b2": fit_b2, "b2": complex(b2), "order": min(orders)})
    return rows


def _moments_block(index: int, count: int, seed: int, n: int):
    gen = SeedPartitioner.block_rng(seed, index)
    _, weights, obs = weighted_batch(n, count, gen)
    return accumulate(empty_report(n), weights, obs, 1)


def _one_level_block(index: int, count: int, seed: int, n: int, edges: Sequence[float]):
    gen = SeedPartitioner.block_rng(seed, index)
    phases, weights, _ = weighted_batch(n, count, gen)
    return one_level_batch(phases, weights, edges)


def _uniqueness_block(index: int, count: int, seed: int, n: int, theta_max: float):
    gen = SeedPartitioner.block_rng(seed, index)
    rows = []
    for k in range(count):
        theta = theta_max * (1.0 - gen.random())
        bg = admissible_background(n, theta, gen)
        try:
            hits, z_prime = uniqueness_trial(theta, bg, n)
        except ContourResolutionError as exc:
            logger.warning(f"unresolved contour at N={n}, theta={theta}: {exc}")
            hits, z_prime = -1, None
        deviation = float("nan")
        if z_prime is not None:
            roots = deriv_roots_all(pair_config(theta, bg, n))
            deviation = abs(nearest_root(roots, z_prime) - z_prime)
        row = {"block": index, "trial": k, "theta": theta, "count": hits, "deviation": deviation}
        if hits != 1:
            row["background"] = bg.tolist()
        rows.append(row)
    return rows


def _zeta_window(t_lo: float, t_hi: float):
    return find_zeta_prime_zeros(t_lo, t_hi)


def _line_window(t_lo: float, t_hi: float):
    return zeta_zeros_on_line(t_lo, t_hi)


# --------------------------------------------------------------------------
# Drivers


def _s_histogram(config: RunConfig, edges: Sequence[float], keep_roots: bool = False):
    results = SeedPartitioner.run_blocks(_deriv_block, config.seed, config.samples, config.workers,
                                         extra=(config.ensemble.value, config.n, list(edges), keep_roots))
    hist = merge_all(r[0] for r in results)
    flagged = sum(r[1] for r in results)
    kept = sum(r[3] for r in results)
    truncated = math.fsum(r[2] for r in results) / kept if kept else float("nan")
    return hist, flagged, truncated, [rs for r in results for rs in r[4]]


def run_deriv_dist(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """S-histogram of derivative roots for one ensemble"""
    dump = bool(_flag(config, "dump_roots", False))
    hist, flagged, truncated, rootsets = _s_histogram(config, settings.s_hist_edges, keep_roots=dump)
    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_histogram_csv(hist, run_dir / "s_histogram.csv"))
    if dump:
        outcome.artifacts.append(roots_to_csv(rootsets, run_dir / "s_values.csv"))
    outcome.summary = {"ensemble": config.ensemble.value, "n": config.n, "roots": hist.total_samples,
                       "flagged_roots": flagged, "truncated_mean_s": truncated}
    try:
        count, locations = detect_modes(hist)
        outcome.summary.update({"modes": count, "mode_locations": locations})
    except InsufficientSamplesError as exc:
        logger.warning(f"mode detection skipped: {exc}")
        count = None

    if _flag(config, "check", False):
        if config.ensemble != Ensemble.POISSON and count is not None:
            outcome.gates.append(make_gate("bimodality", count, 2, 0))
        if config.n >= LARGE_S_MIN_N:
            outcome.gates.append(_large_s_gate(hist))
    return _finish(outcome, run_dir)


def _large_s_gate(hist) -> GateResult:
    """Mass per unit bin on [3, 10] against the integral of 1/s^2"""
    edges = np.asarray(hist.bin_edges)
    counts = np.asarray(hist.counts)
    worst = 0.0
    for k in range(3, 10):
        inside = (edges[:-1] >= k - 1e-12) & (edges[1:] <= k + 1 + 1e-12)
        observed = counts[inside].sum() / hist.total_mass
        expected = 1.0 / (k * (k + 1))
        worst = max(worst, abs(observed - expected) / expected)
    return make_gate("large_s_density", worst, 0.0, 0.2)


def run_cdf_tail(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Empirical CDF of S at small s against the two-term integral"""
    hist, flagged, _, _ = _s_histogram(config, CDF_TAIL_EDGES)
    edges = np.asarray(hist.bin_edges)
    empirical = cdf_at(hist, edges)
    outcome = ExperimentOutcome()
    theory = q_small_cdf(edges)
    outcome.artifacts.append(write_rows_csv(run_dir / "cdf_tail.csv", ["s", "empirical_cdf", "two_term_cdf"],
                                            zip(edges.tolist(), empirical.tolist(), theory.tolist())))
    points = {}
    for s in CDF_TAIL_POINTS:
        observed = float(cdf_at(hist, s))
        expected = float(q_small_cdf(s))
        points[repr(s)] = {"empirical": observed, "two_term": expected}
        if _flag(config, "check", False):
            outcome.gates.append(make_gate(f"cdf_tail_s{s}", abs(observed - expected) / expected, 0.0, 0.10))
    outcome.summary = {"n": config.n, "ensemble": config.ensemble.value, "roots": hist.total_samples,
                       "flagged_roots": flagged, "points": points}
    return _finish(outcome, run_dir)


def run_spacing(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Nearest-neighbour spacing CDF against the truncated small-s expansion"""
    n = config.n
    hists = SeedPartitioner.run_blocks(_spacing_block, config.seed, config.samples, config.workers,
                                       extra=(n, SPACING_EDGES.tolist()))
    hist = merge_all(hists)
    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_histogram_csv(hist, run_dir / "spacing_histogram.csv"))
    m = hist.total_samples
    points = {}
    for s in SPACING_POINTS:
        observed = float(cdf_at(hist, s))
        expected = float(spacing_cdf_p2(s, n))
        sigma = math.sqrt(max(observed * (1.0 - observed), 0.0) / m)
        points[repr(s)] = {"empirical": observed, "expansion": expected, "sigma": sigma}
        if _flag(config, "check", False):
            outcome.gates.append(make_gate(f"spacing_cdf_s{s}", observed, expected, 3.0 * sigma + 0.01 * expected))
    outcome.summary = {"n": n, "spacings": m, "points": points}
    return _finish(outcome, run_dir)


def run_verify_expansion(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Fitted (b_1, b_2) of delta(theta) against the closed form, per background"""
    thetas = sorted(_flag(config, "theta", [0.01, 0.02, 0.04]))
    if len(thetas) < 3:
        raise DomainError("verify-expansion needs at least three theta values")
    results = SeedPartitioner.run_blocks(_expansion_block, config.seed, config.samples, config.workers,
                                         extra=(config.n, thetas))
    rows = [row for block in results for row in block]
    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_rows_csv(
        run_dir / "expansion_fit.csv",
        ["block", "trial", "fit_b1", "b1", "fit_b2", "b2", "remainder_order"],
        ([r["block"], r["trial"], r["fit_b1"], r["b1"], r["fit_b2"], r["b2"], r["order"]] for r in rows)))

    db1 = max(abs(r["fit_b1"] - r["b1"]) for r in rows)
    db2 = max(abs(r["fit_b2"] - r["b2"]) / abs(r["b2"]) for r in rows)
    order = min(r["order"] for r in rows)
    outcome.gates = [make_gate("b1_fit", db1, 0.0, 1e-6),
                     make_gate("b2_fit_relative", db2, 0.0, 1e-3),
                     make_gate("remainder_order", order, 6.0, 0.0, passed=order >= 5.5)]
    outcome.summary = {"n": config.n, "thetas": thetas, "backgrounds": len(rows),
                       "max_b1_error": db1, "max_b2_relative_error": db2, "min_remainder_order": order}
    return _finish(outcome, run_dir)


def run_conditioned_moments(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Importance-sampled moments under the double-eigenvalue measure"""
    n = config.n
    reports = SeedPartitioner.run_blocks(_moments_block, config.seed, config.samples, config.workers,
                                         extra=(n,))
    report = finalize_report(merge_reports(reports), _flag(config, "min_samples"))
    outcome = ExperimentOutcome()
    rows = [[e.name, e.mean, e.imag_mean, e.stderr, e.predicted, e.z_score] for e in report.estimates.values()]
    outcome.artifacts.append(write_rows_csv(run_dir / "moments.csv",
                                            ["observable", "mean", "imag_mean", "stderr", "predicted", "z"],
                                            rows))
    norm, norm_err = estimate_normalization(report)
    poly = moment_polynomials(n)
    b2 = report.estimates["B2"]
    outcome.summary = {
        "n": n, "samples": report.sample_count, "batches": len(report.batch_counts),
        "effective_sample_size": report.effective_sample_size, "warnings": report.warnings,
        "normalization": {"mean_weight": norm, "stderr": norm_err, "c_n_inv": poly.c_n_inv},
        "b2_published": {"value": poly.b2_mean_published,
                         "z": (b2.mean - poly.b2_mean_published) / b2.stderr if b2.stderr > 0 else None},
        "near_one": {"weighted": report.estimates["near_one"].mean, "unconditioned": 2.0 / (n - 2)},
    }
    if _flag(config, "check", False):
        for name in GATED + ("B2",):
            z = report.estimates[name].z_score
            outcome.gates.append(make_gate(f"moment_{name}", float("nan") if z is None else z, 0.0, 3.0))
    return _finish(outcome, run_dir)


def run_one_level(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Weighted 1-level density of U(N-2) phases against per-bin W_1 integrals"""
    n = config.n
    edges = ONE_LEVEL_EDGES
    batches = SeedPartitioner.run_blocks(_one_level_block, config.seed, config.samples, config.workers,
                                         extra=(n, edges.tolist()))
    dist = combine_one_level(batches, edges, n - 2, metadata={"n": n, "a": 2})
    expected = np.array([w1_bin_integral(2, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_histogram_csv(dist, run_dir / "one_level.csv", extra={"w1_integral": expected}))
    alpha1 = alpha1_mean(2)
    outcome.summary = {"n": n, "configurations": dist.total_samples, "alpha1_mean": alpha1}
    outcome.gates.append(make_gate("alpha1_mean", alpha1, 1.0 / 15.0, 1e-5))

    if _flag(config, "check", False):
        positive = edges[:-1] >= 0.0
        stderr = np.asarray(dist.stderr if dist.stderr is not None else np.full(len(expected), np.nan))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.asarray(dist.counts) - expected) / stderr
        worst = float(np.nanmax(np.abs(z[positive]))) if np.any(np.isfinite(z[positive])) else float("nan")
        outcome.gates.append(make_gate("one_level_bins", worst, 0.0, 4.0))
    return _finish(outcome, run_dir)


def _windows(t_lo: float, t_hi: float) -> List[tuple]:
    edges = np.arange(t_lo, t_hi, ZETA_WINDOW).tolist() + [t_hi]
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_zeta_scan(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Zeros of zeta' in a height range, their normalized distribution and counts"""
    t_lo = float(_flag(config, "t_lo", 1000.0))
    t_hi = float(_flag(config, "t_hi", 2000.0))
    windows = _windows(t_lo, t_hi)
    scans = SeedPartitioner.map_tasks(_zeta_window, windows, config.workers)
    line = SeedPartitioner.map_tasks(_line_window, windows, config.workers)
    zeros: List[ZetaPrimeZero] = [z for scan in scans for z in scan.zeros]
    violations = [z for scan in scans for z in scan.violations]
    flagged = [z for scan in scans for z in scan.flagged]
    zeta_zeros = [g for window in line for g in window]

    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_rows_csv(run_dir / "zeta_prime_zeros.csv",
                                            ["beta", "gamma", "normalized_x", "residual"],
                                            ([z.beta, z.gamma, z.normalized_x, z.residual] for z in zeros)))
    density = zeta_prime_density_integral(t_lo, t_hi)
    rate = missing_zero_rate(len(zeta_zeros), len(zeros) + len(flagged), t_lo, t_hi)
    expected_rate = math.log(2.0) / (2.0 * math.pi)
    crosscheck = close_pair_crosscheck(zeta_zeros, zeros)
    outcome.artifacts.append(write_rows_csv(
        run_dir / "close_pairs.csv", ["gamma_mid", "theta", "observed", "predicted", "relative_error"],
        ([p["gamma_mid"], p["theta"], p["observed"], p["predicted"], p["relative_error"]]
         for p in crosscheck["pairs"])))
    outcome.artifacts.append(write_json(run_dir / "scan.json", {
        "t_lo": t_lo, "t_hi": t_hi, "box_count": sum(s.box_count for s in scans),
        "boxes_scanned": sum(s.boxes_scanned for s in scans),
        "violations": violations, "flagged": flagged}))

    outcome.summary = {
        "t_lo": t_lo, "t_hi": t_hi, "zeta_prime_zeros": len(zeros), "zeta_zeros": len(zeta_zeros),
        "density_integral": density, "missing_zero_rate": rate, "expected_missing_zero_rate": expected_rate,
        "density_discrepancy": density_discrepancy(zeros, t_lo) if zeros else None,
        "close_pair_median_relative_error": crosscheck["median_relative_error"],
        "normalization": "log(gamma/2pi)",
    }
    mode_count = None
    if len(zeros) >= 500:
        dist = normalized_distribution(zeros)
        outcome.artifacts.append(write_histogram_csv(dist, run_dir / "zeta_x_histogram.csv"))
        xs = [z.normalized_x for z in zeros]
        outcome.summary["median_normalized_x"] = float(np.median(xs))
        mode_count, locations = detect_modes(dist, min_samples=500)
        outcome.summary.update({"modes": mode_count, "mode_locations": locations})

    outcome.gates.append(make_gate("beta_above_half", len(violations), 0, 0))
    if _flag(config, "check", False):
        outcome.gates.append(make_gate("zeta_prime_count", len(zeros), density, 0.02 * density))
        outcome.gates.append(make_gate("missing_zero_rate", rate, expected_rate, 0.10 * expected_rate))
        outcome.gates.append(make_gate("density_discrepancy", outcome.summary["density_discrepancy"] or 0.0,
                                       0.0, 5.0))
        if mode_count is not None and len(zeros) >= ZETA_MODE_MIN_ZEROS:
            outcome.gates.append(make_gate("bimodality", mode_count, 2, 0))
    return _finish(outcome, run_dir)


def run_uniqueness_check(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Argument-principle count of derivative zeros in the close-pair disk"""
    n = config.n
    theta_max = float(_flag(config, "theta_max", 0.25))
    results = SeedPartitioner.run_blocks(_uniqueness_block, config.seed, config.samples, config.workers,
                                         extra=(n, theta_max))
    rows = [row for block in results for row in block]
    violations = [r for r in rows if r["count"] != 1]
    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_rows_csv(run_dir / "uniqueness.csv",
                                            ["block", "trial", "theta", "count", "deviation"],
                                            ([r["block"], r["trial"], r["theta"], r["count"], r["deviation"]]
                                             for r in rows)))
    outcome.artifacts.append(write_json(run_dir / "violations.json", violations))
    deviations = [r["deviation"] for r in rows if np.isfinite(r["deviation"])]
    worst = max(deviations) if deviations else 0.0
    outcome.summary = {"n": n, "theta_max": theta_max, "trials": len(rows), "violations": len(violations),
                       "max_root_deviation": worst}
    if n >= UNIQUENESS_MIN_N:
        outcome.gates.append(make_gate("uniqueness_violations", len(violations), 0, 0))
        outcome.gates.append(make_gate("root_agreement", worst, 0.0, 1e-9))
    elif violations:
        for r in violations:
            logger.warning(f"uniqueness count {r['count']} at N={n}, theta={r['theta']}, "
                           f"background={r['background']}")
    return _finish(outcome, run_dir)


def run_lemma_bounds(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Grid maxima of Re 1/(z - zeta) and random draws of the eta bound"""
    gen = SeedPartitioner.block_rng(config.seed, 0)
    trials = int(_flag(config, "trials", 1000))
    grid = np.linspace(0.0, 2.0 * math.pi, 100_000, endpoint=False)
    circle = np.exp(1j * grid)
    worst_rel = 0.0
    for _ in range(trials):
        radius, angle = 0.8 * math.sqrt(gen.random()), 2.0 * math.pi * gen.random()
        z = complex(radius * math.cos(angle), radius * math.sin(angle))
        brute = float(np.max(np.real(1.0 / (z - circle))))
        formula = max_re_reciprocal_bound(z)
        worst_rel = max(worst_rel, abs(brute - formula) / formula)

    draws = config.samples
    n = gen.integers(3, 201, size=draws)
    theta0 = gen.random(draws)
    phi = math.pi * (1.0 - gen.random(draws))
    sign = np.where(gen.random(draws) < 0.5, -1.0, 1.0)
    psi = sign * (theta0 + (0.5 * n - theta0) * gen.random(draws))
    excess = eta_quantity(theta0, phi, psi, n) - eta_bound(theta0, n)
    worst_excess = float(np.max(excess))

    outcome = ExperimentOutcome()
    outcome.artifacts.append(write_rows_csv(run_dir / "lemma_bounds.csv", ["check", "draws", "worst"],
                                            [["reciprocal_grid_max", trials, worst_rel],
                                             ["eta_bound_excess", draws, worst_excess]]))
    outcome.gates = [make_gate("reciprocal_grid_max", worst_rel, 0.0, 1e-6),
                     make_gate("eta_bound", worst_excess, 0.0, 0.0, passed=worst_excess <= 0.0)]
    outcome.summary = {"reciprocal_trials": trials, "eta_draws": draws,
                       "reciprocal_worst_relative": worst_rel, "eta_worst_excess": worst_excess}
    return _finish(outcome, run_dir)


def run_tables(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    """Analytic curves as CSV: spacing law, Q asymptotics, delta* density, moments, W_1"""
    n = config.n
    outcome = ExperimentOutcome()
    s = np.linspace(0.005, 0.5, 100)
    outcome.artifacts.append(write_rows_csv(
        run_dir / "spacing_expansion.csv", ["s", "p2", "p2_limit", "cdf", "pair_correlation"],
        zip(s.tolist(), spacing_density_p2(s, n).tolist(), spacing_density_p2(s).tolist(),
            spacing_cdf_p2(s, n).tolist(), pair_correlation(s, n).tolist())))
    outcome.artifacts.append(write_rows_csv(
        run_dir / "q_asymptotics.csv", ["s", "q_small", "q_small_cdf", "q_large"],
        zip(s.tolist(), q_asymptotics(s, Regime.SMALL).tolist(), q_small_cdf(s).tolist(),
            q_asymptotics(s, Regime.LARGE).tolist())))
    poly = moment_polynomials(n)
    outcome.artifacts.append(write_rows_csv(
        run_dir / "deldist.csv", ["s", "density_published_b2", "density_consistent_b2", "density_limit"],
        zip(s.tolist(), deldist_density(s, n, poly.b2_mean_published).tolist(),
            deldist_density(s, n, poly.b2_mean).tolist(), deldist_density(s, None, 1.0 / 48.0).tolist())))
    moment_rows = []
    for m in range(4, max(n, 4) + 1):
        p = moment_polynomials(m)
        moment_rows.append([m, p.c_n_inv, p.a0_mean, p.a0_cubed, p.a1_mean, p.a0a1_mean, p.b2_mean,
                            p.b2_mean_published])
    outcome.artifacts.append(write_rows_csv(
        run_dir / "moments.csv",
        ["n", "c_n_inv", "a0_mean", "a0_cubed", "a1_mean", "a0a1_mean", "b2_mean", "b2_mean_published"],
        moment_rows))
    t = np.linspace(0.0, 5.0, 201)
    outcome.artifacts.append(write_rows_csv(
        run_dir / "w1.csv", ["t", "a0", "a1", "a2"],
        zip(t.tolist(), *(np.broadcast_to(one_level_density_w1(a, t), t.shape).tolist() for a in (0, 1, 2)))))
    alpha1 = alpha1_mean(2)
    beta1, beta2 = beta_coefficients(alpha1)
    outcome.summary = {"n": n, "alpha1_mean": alpha1, "beta1": beta1, "beta2": beta2,
                       "zeta_log_derivative_constant": zeta_log_derivative_constant()}
    return _finish(outcome, run_dir)


COMMANDS: Dict[str, Callable[[RunConfig, Path], ExperimentOutcome]] = {
    "deriv-dist": run_deriv_dist,
    "cdf-tail": run_cdf_tail,
    "spacing": run_spacing,
    "verify-expansion": run_verify_expansion,
    "conditioned-moments": run_conditioned_moments,
    "one-level": run_one_level,
    "zeta-scan": run_zeta_scan,
    "uniqueness-check": run_uniqueness_check,
    "tables": run_tables,
    "lemma-bounds": run_lemma_bounds,
}


def run_experiment(config: RunConfig, run_dir: Path) -> ExperimentOutcome:
    logger.info(f"running {config.command} (seed={config.seed}, n={config.n}, samples={config.samples})")
    return COMMANDS[config.command](config, Path(run_dir))
