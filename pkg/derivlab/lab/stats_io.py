"""
Mergeable histograms, empirical CDFs, mode detection and the CSV/JSON writers
every experiment driver goes through.

Floats are written with repr so identical inputs give identical files.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from ..config import settings
from ..errors import HistogramMismatchError, InsufficientSamplesError
from ..logging_config import logger
from ..schemas import EmpiricalDistribution


def build_histogram(values, edges: Sequence[float], weights=None,
                    metadata: Optional[Dict[str, Any]] = None,
                    with_stderr: bool = False) -> EmpiricalDistribution:
    """
    Bin values (optionally weighted) into left-closed bins, last bin closed.

    Values below the first edge go to underflow, above the last edge to
    overflow. NaNs are dropped and counted in rejected_nan.
    """
    values = np.asarray(values, dtype=float).ravel()
    edges = np.asarray(edges, dtype=float)
    w = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != values.shape:
        raise ValueError("weights must match values")

    nan = np.isnan(values)
    rejected = int(nan.sum())
    if rejected:
        logger.warning(f"dropping {rejected} NaN value(s) from histogram")
    values, w = values[~nan], w[~nan]

    counts, _ = np.histogram(values, bins=edges, weights=w)
    stderr = None
    if with_stderr:
        sq, _ = np.histogram(values, bins=edges, weights=w * w)
        stderr = np.sqrt(sq).tolist()
    return EmpiricalDistribution(
        bin_edges=edges.tolist(),
        counts=counts.astype(float).tolist(),
        underflow=float(w[values < edges[0]].sum()),
        overflow=float(w[values > edges[-1]].sum()),
        total_samples=int(values.size),
        rejected_nan=rejected,
        stderr=stderr,
        metadata=dict(metadata or {}),
    )


def merge(a: EmpiricalDistribution, b: EmpiricalDistribution) -> EmpiricalDistribution:
    """Add two histograms over identical edges"""
    if a.bin_edges != b.bin_edges:
        raise HistogramMismatchError("cannot merge histograms with different bin edges")
    stderr = None
    if a.stderr is not None and b.stderr is not None:
        stderr = np.hypot(a.stderr, b.stderr).tolist()
    metadata = dict(a.metadata)
    for key, value in b.metadata.items():
        if key in metadata and metadata[key] != value:
            previous = metadata[key]
            merged = previous if isinstance(previous, list) else [previous]
            if value not in merged:
                merged = merged + [value]
            metadata[key] = merged
        else:
            metadata[key] = value
    return EmpiricalDistribution(
        bin_edges=list(a.bin_edges),
        counts=(np.asarray(a.counts) + np.asarray(b.counts)).tolist(),
        underflow=a.underflow + b.underflow,
        overflow=a.overflow + b.overflow,
        total_samples=a.total_samples + b.total_samples,
        rejected_nan=a.rejected_nan + b.rejected_nan,
        stderr=stderr,
        metadata=metadata,
    )


def merge_all(dists: Iterable[EmpiricalDistribution]) -> EmpiricalDistribution:
    """Left fold of merge in iteration order"""
    dists = list(dists)
    if not dists:
        raise InsufficientSamplesError("nothing to merge")
    total = dists[0]
    for other in dists[1:]:
        total = merge(total, other)
    return total


def empirical_cdf(dist: EmpiricalDistribution) -> List[Tuple[float, float]]:
    """
    (edge, F(edge)) pairs with F counting underflow and every bin left of the
    edge. Bins are left-closed, so a sample lying exactly on an edge is counted
    from the next edge on: the value at an edge is the left limit of the
    step CDF, which equals the right-continuous value unless samples tie with
    an edge.
    """
    mass = dist.total_mass
    if mass <= 0:
        raise InsufficientSamplesError("empty distribution has no CDF")
    below = dist.underflow + np.concatenate([[0.0], np.cumsum(dist.counts)])
    return list(zip(dist.bin_edges, (below / mass).tolist()))


def cdf_at(dist: EmpiricalDistribution, x) -> np.ndarray:
    """Empirical CDF linearly interpolated between edges"""
    points = empirical_cdf(dist)
    xs = np.array([p[0] for p in points])
    fs = np.array([p[1] for p in points])
    return np.interp(x, xs, fs)


def histogram_density(dist: EmpiricalDistribution) -> np.ndarray:
    """count / (width * total mass)"""
    return np.asarray(dist.counts) / (dist.widths * dist.total_mass)


def silverman_bandwidth(dist: EmpiricalDistribution) -> float:
    """1.06 sigma m^(-1/5) from the binned sample"""
    counts = np.asarray(dist.counts)
    centers = 0.5 * (np.asarray(dist.bin_edges[:-1]) + np.asarray(dist.bin_edges[1:]))
    inside = counts.sum()
    mean = float(np.dot(counts, centers) / inside)
    sigma = math.sqrt(float(np.dot(counts, (centers - mean) ** 2) / inside))
    return 1.06 * sigma * max(dist.total_samples, 1) ** (-0.2)


def detect_modes(dist: EmpiricalDistribution, min_samples: Optional[int] = None,
                 bandwidth: Optional[float] = None,
                 prominence: Optional[float] = None) -> Tuple[int, List[float]]:
    """
    Count local maxima of the Gaussian-smoothed density.

    A maximum counts when its prominence is at least `prominence` times the
    global maximum of the smoothed density. Returns (count, locations).
    """
    min_samples = settings.MIN_MODE_SAMPLES if min_samples is None else min_samples
    prominence = settings.MODE_PROMINENCE if prominence is None else prominence
    if dist.total_samples < min_samples:
        raise InsufficientSamplesError(
            f"mode detection needs {min_samples} samples, got {dist.total_samples}")
    if sum(dist.counts) <= 0:
        raise InsufficientSamplesError("no mass inside the histogram range")

    widths = dist.widths
    bandwidth = silverman_bandwidth(dist) if bandwidth is None else bandwidth
    density = np.asarray(dist.counts) / widths
    smoothed = gaussian_filter1d(density, sigma=bandwidth / float(np.mean(widths)), mode="constant")
    peaks, _ = find_peaks(smoothed, prominence=prominence * float(smoothed.max()))
    centers = 0.5 * (np.asarray(dist.bin_edges[:-1]) + np.asarray(dist.bin_edges[1:]))
    locations = centers[peaks].tolist()
    logger.debug(f"detect_modes: bandwidth={bandwidth:.4g}, modes at {locations}")
    return len(locations), locations


# --------------------------------------------------------------------------
# Writers


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    return str(value)


def write_rows_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows under a header line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_histogram_csv(dist: EmpiricalDistribution, path: Path,
                        extra: Optional[Dict[str, Sequence[float]]] = None) -> Path:
    """bin_left, bin_right, count, density[, stderr][, extra columns]"""
    edges = dist.bin_edges
    density = histogram_density(dist) if dist.total_mass > 0 else np.zeros(len(dist.counts))
    header = ["bin_left", "bin_right", "count", "density"]
    columns = [edges[:-1], edges[1:], dist.counts, density.tolist()]
    if dist.stderr is not None:
        header.append("stderr")
        columns.append(dist.stderr)
    for name, values in (extra or {}).items():
        header.append(name)
        columns.append(list(values))
    return write_rows_csv(path, header, zip(*columns))


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    return value


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(_jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_manifest(run_dir: Path, info: Dict[str, Any], artifacts: Sequence[Path]) -> Path:
    """manifest.json: run info plus a sha256 for every artifact"""
    from ..utils import ManifestManager

    manifest = dict(info)
    manifest["version"] = settings.VERSION
    manifest["artifacts"] = ManifestManager.describe_artifacts(Path(run_dir), artifacts)
    return write_json(Path(run_dir) / "manifest.json", manifest)
