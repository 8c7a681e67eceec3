"""Exception hierarchy for the laboratory."""

from typing import Any, Dict, List, Optional


class DerivLabError(Exception):
    """Base class for laboratory errors"""

    kind = "error"

    def details(self) -> Dict[str, Any]:
        """Machine-readable payload written to failure records"""
        return {}


class SamplingError(DerivLabError):
    """Eigenvalue extraction failed for a sampled matrix"""

    kind = "sampling"

    def __init__(self, message: str, seed: Optional[int] = None):
        super().__init__(f"{message} (seed={seed})")
        self.seed = seed

    def details(self):
        return {"seed": self.seed}


class DegreeLimitError(DerivLabError, ValueError):
    """Polynomial degree above the conditioning guard"""

    kind = "degree_limit"


class DomainError(DerivLabError, ValueError):
    """Argument outside the domain of a formula"""

    kind = "domain"


class SingularityError(DomainError):
    """A background phase sits on z = 1"""

    kind = "singularity"


class UnsupportedRangeError(DomainError):
    """Height or order outside the supported evaluation range"""

    kind = "unsupported_range"


class UniquenessViolation(DerivLabError):
    """Argument-principle count inside the close-pair disk is not 1"""

    kind = "uniqueness"

    def __init__(self, theta: float, background: List[float], n: int, count: int):
        super().__init__(f"disk count {count} != 1 at N={n}, theta={theta}")
        self.theta = theta
        self.background = list(background)
        self.n = n
        self.count = count

    def details(self):
        return {"theta": self.theta, "n": self.n, "count": self.count,
                "background": self.background}


class ContourResolutionError(DerivLabError):
    """Phase tracking could not resolve a contour segment"""

    kind = "contour_resolution"


class IncompleteScanError(DerivLabError):
    """Box count and isolated zeros disagree after maximal subdivision"""

    kind = "incomplete_scan"

    def __init__(self, message: str, box: tuple):
        super().__init__(f"{message}: box={box}")
        self.box = box

    def details(self):
        return {"box": list(self.box)}


class HistogramMismatchError(DerivLabError, ValueError):
    """Histograms with different edges cannot be merged"""

    kind = "histogram_mismatch"


class InsufficientSamplesError(DerivLabError, ValueError):
    """Too few samples for the requested statistic"""

    kind = "insufficient_samples"


class GateFailure(DerivLabError):
    """One or more numerical acceptance gates failed"""

    kind = "gate"

    def __init__(self, failed: List[Dict[str, Any]]):
        names = ", ".join(g["name"] for g in failed)
        super().__init__(f"numerical gate(s) failed: {names}")
        self.failed = failed

    def details(self):
        return {"gates": self.failed}


class UsageError(DerivLabError):
    """Bad command line"""

    kind = "usage"
