"""Statistical process-control metrics over an output sample.

Samples are plain 1-d sequences of per-period output values.  All spread
estimates use the sample standard deviation (n-1 denominator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VARIABILITY_CLASSES = ("low", "moderate", "high")


@dataclass(frozen=True)
class SpecLimits:
    usl: float
    lsl: float

    def __post_init__(self):
        if not (math.isfinite(self.usl) and math.isfinite(self.lsl)):
            raise ValueError("specification limits must be finite")
        if self.usl <= self.lsl:
            raise ValueError(f"usl must exceed lsl, got {self.usl!r} <= {self.lsl!r}")


@dataclass(frozen=True)
class ProcessMetrics:
    cpk: float
    pp: float
    sigma_d: float
    rate_d: float
    cv: float
    variability_class: str


def _as_sample(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) < 2:
        raise ValueError("sample must be a 1-d sequence with at least 2 values")
    if not np.isfinite(v).all():
        raise ValueError("sample values must be finite")
    return v


def default_limits(mean: float) -> SpecLimits:
    """Limits at mean*(1 +/- 0.02), mirroring the settling band width."""
    if mean == 0.0:
        raise ValueError("default limits are degenerate: sample mean is 0")
    lo, hi = sorted((mean * 0.98, mean * 1.02))
    return SpecLimits(usl=hi, lsl=lo)


def process_capability_index(values, limits: SpecLimits) -> float:
    """Cpk: the tighter of the two one-sided margins in units of 3 sigma."""
    v = _as_sample(values)
    s = float(v.std(ddof=1))
    if s == 0.0:
        raise ValueError("sample standard deviation is zero")
    m = float(v.mean())
    return min((limits.usl - m) / (3.0 * s), (m - limits.lsl) / (3.0 * s))


def process_performance(values, limits: SpecLimits | None = None) -> float:
    """Pp: the specification width in units of 6 sigma; default limits mean +/- 2%."""
    v = _as_sample(values)
    s = float(v.std(ddof=1))
    if s == 0.0:
        raise ValueError("sample standard deviation is zero")
    if limits is None:
        limits = default_limits(float(v.mean()))
    return (limits.usl - limits.lsl) / (6.0 * s)


def coefficient_of_variation(sigma_d: float, rate_d: float) -> float:
    """Departure-time CV: output standard deviation over output mean."""
    if rate_d == 0.0:
        raise ValueError("departure rate is zero; CV undefined")
    return sigma_d / rate_d


def classify_variability(cv: float) -> str:
    """low below 0.75, moderate through 1.33 (boundaries included), high above."""
    if cv < 0:
        raise ValueError(f"cv must be nonnegative, got {cv!r}")
    if cv < 0.75:
        return "low"
    if cv <= 1.33:
        return "moderate"
    return "high"


def sample_metrics(values, limits: SpecLimits | None = None) -> ProcessMetrics:
    """All capability and variability statistics of one output sample."""
    v = _as_sample(values)
    sigma = float(v.std(ddof=1))
    if sigma == 0.0:
        raise ValueError("sample standard deviation is zero")
    mean = float(v.mean())
    lims = limits if limits is not None else default_limits(mean)
    cv = coefficient_of_variation(sigma, mean)
    return ProcessMetrics(
        cpk=process_capability_index(v, lims),
        pp=process_performance(v, lims),
        sigma_d=sigma,
        rate_d=mean,
        cv=cv,
        variability_class=classify_variability(cv),
    )
