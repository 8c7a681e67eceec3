"""Domain types shared by the lab modules, the drivers and the CLI."""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic.functional_serializers import PlainSerializer
from pydantic.functional_validators import PlainValidator


def _to_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex value must be [re, im]")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        return complex(float(value["re"]), float(value["im"]))
    return complex(value)


# complex numbers travel as [re, im] pairs in JSON
ComplexNumber = Annotated[
    complex,
    PlainValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
]


def rescale_phases(phases: np.ndarray, n: int) -> np.ndarray:
    """x = N t / (2 pi)"""
    return n * np.asarray(phases, dtype=float) / (2.0 * math.pi)


class Ensemble(str, Enum):
    CUE = "CUE"
    COE = "COE"
    POISSON = "POISSON"
    EXPLICIT = "EXPLICIT"


class EigenphaseConfig(BaseModel):
    """N eigenphases on the circle, sorted, with their unit-mean-spacing rescaling"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(gt=0)
    raw_phases: List[float]
    rescaled: List[float]
    ensemble_tag: Ensemble
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "EigenphaseConfig":
        if len(self.raw_phases) != self.n or len(self.rescaled) != self.n:
            raise ValueError(f"expected {self.n} phases")
        t = np.asarray(self.raw_phases)
        x = np.asarray(self.rescaled)
        if np.any(t <= -math.pi) or np.any(t > math.pi):
            raise ValueError("raw phases must lie in (-pi, pi]")
        if np.any(np.diff(x) < 0):
            raise ValueError("rescaled phases must be sorted")
        if not np.allclose(x, rescale_phases(t, self.n), rtol=0.0, atol=1e-12):
            raise ValueError("rescaled phases inconsistent with raw phases")
        return self

    @classmethod
    def from_phases(cls, phases, ensemble_tag: Ensemble = Ensemble.EXPLICIT,
                    seed: int = 0) -> "EigenphaseConfig":
        """Wrap phases to (-pi, pi], sort, rescale"""
        t = np.asarray(phases, dtype=float).ravel()
        outside = (t > math.pi) | (t <= -math.pi)
        t = np.where(outside, np.mod(t + math.pi, 2.0 * math.pi) - math.pi, t)
        t[t <= -math.pi] += 2.0 * math.pi
        t = np.sort(t, kind="stable")
        return cls(n=len(t), raw_phases=t.tolist(), rescaled=rescale_phases(t, len(t)).tolist(),
                   ensemble_tag=ensemble_tag, seed=seed)

    @property
    def phases(self) -> np.ndarray:
        return np.asarray(self.raw_phases)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.rescaled)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "ensemble": self.ensemble_tag.value,
                           "seed": self.seed, "raw_phases": [format(t, ".17e") for t in self.raw_phases]})

    @classmethod
    def from_json(cls, text: str) -> "EigenphaseConfig":
        payload = json.loads(text)
        t = np.array([float(v) for v in payload["raw_phases"]])
        return cls(n=payload["n"], raw_phases=t.tolist(),
                   rescaled=rescale_phases(t, payload["n"]).tolist(),
                   ensemble_tag=Ensemble(payload["ensemble"]), seed=payload["seed"])


class DerivRootSet(BaseModel):
    """Zeros of the derivative of the characteristic polynomial and their S values"""

    n: int
    roots: List[ComplexNumber]
    s_values: List[float]
    flagged_count: int = 0

    @property
    def roots_array(self) -> np.ndarray:
        return np.asarray(self.roots, dtype=complex)


class PairSample(BaseModel):
    """Close pair at +-theta/2 over a frozen background, with its derivative root"""

    theta: float = Field(ge=0.0)
    n: int
    background: List[float]
    z_prime: ComplexNumber
    delta: ComplexNumber
    delta_star: float
    a0: ComplexNumber
    a1: ComplexNumber

    @model_validator(mode="after")
    def _check(self) -> "PairSample":
        if len(self.background) != self.n - 2:
            raise ValueError("background must hold N-2 phases")
        half = self.theta / 2.0
        for x in self.background:
            if not (-self.n / 2.0 < x <= -half or half <= x < self.n / 2.0):
                raise ValueError(f"background phase {x} outside the admissible window")
        return self


class CoefficientsAB(BaseModel):
    n: int
    a: List[ComplexNumber]
    b1: ComplexNumber
    b2: ComplexNumber

    @property
    def B1(self) -> float:
        return self.b1.real

    @property
    def B2(self) -> float:
        return self.b2.real


class MomentPolynomials(BaseModel):
    """Closed-form conditioned moments.

    a0_cubed, a1_mean and a0a1_mean are the displayed polynomials, i.e.
    expectations of L^3, L' and L L' with L = (Lambda'/Lambda)(1) = N A_0
    and L' = (Lambda'/Lambda)'(1) = -N^2 A_1.
    """

    n: int
    c_n_inv: float
    a0_mean: float
    a0_cubed: float
    a1_mean: float
    a0a1_mean: float
    b2_mean: float
    b2_mean_published: float


class WeightedSample(BaseModel):
    config: EigenphaseConfig
    weight: float = Field(ge=0.0)
    observables: Dict[str, ComplexNumber]


class ObservableEstimate(BaseModel):
    name: str
    mean: float
    imag_mean: float
    stderr: float
    predicted: Optional[float] = None
    z_score: Optional[float] = None


class MomentReport(BaseModel):
    """Self-normalized importance-sampling averages kept as per-batch sums"""

    n: int
    batch_counts: List[int]
    batch_weight: List[float]
    batch_weight_sq: List[float]
    batch_sums: Dict[str, List[ComplexNumber]]
    predictions: Dict[str, float] = Field(default_factory=dict)
    estimates: Dict[str, ObservableEstimate] = Field(default_factory=dict)
    effective_sample_size: float = 0.0
    warnings: List[str] = Field(default_factory=list)

    @property
    def sample_count(self) -> int:
        return sum(self.batch_counts)


class EmpiricalDistribution(BaseModel):
    """Histogram with tails; counts may be weighted masses"""

    bin_edges: List[float]
    counts: List[float]
    underflow: float = 0.0
    overflow: float = 0.0
    total_samples: int = 0
    rejected_nan: int = 0
    stderr: Optional[List[float]] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "EmpiricalDistribution":
        edges = np.asarray(self.bin_edges)
        if len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if len(self.counts) != len(edges) - 1:
            raise ValueError("counts length must equal edges length - 1")
        if min(self.counts) < 0 or self.underflow < 0 or self.overflow < 0:
            raise ValueError("masses must be nonnegative")
        return self

    @property
    def total_mass(self) -> float:
        return math.fsum(self.counts) + self.underflow + self.overflow

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.asarray(self.bin_edges))


class ZetaPrimeZero(BaseModel):
    beta: float
    gamma: float
    normalized_x: float
    residual: float = 0.0


class ZetaScanResult(BaseModel):
    t_lo: float
    t_hi: float
    zeros: List[ZetaPrimeZero]
    box_count: int
    boxes_scanned: int
    violations: List[ZetaPrimeZero] = Field(default_factory=list)
    flagged: List[ZetaPrimeZero] = Field(default_factory=list)


class GateResult(BaseModel):
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool


class RunConfig(BaseModel):
    """Validated configuration of one CLI run"""

    command: str
    n: Optional[int] = Field(default=None, gt=0)
    samples: Optional[int] = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, gt=0)
    output_dir: Path
    ensemble: Ensemble = Ensemble.CUE
    flags: Dict[str, Any] = Field(default_factory=dict)
