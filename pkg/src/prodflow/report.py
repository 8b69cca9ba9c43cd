"""Case reporting: settling statistics per case, rank correlation, CSV output.

A report row combines the transient statistics computed from a case's
productivity model with the externally measured variability metrics that
came with the case data (capability indices cannot be recomputed without
the raw per-period samples, so they are ingested, not derived).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import ProductivityFunction, is_stable
from .spc import ProcessMetrics
from .transient import SettlingConfig, classify_steadiness, percentile_reaction_time, settling_time

REPORT_COLUMNS = ("name", "ts", "tt", "reaction_pct", "cpk", "pp", "sigma_d", "rate_d", "cv", "steadiness")


@dataclass(frozen=True)
class CaseRecord:
    name: str
    model: ProductivityFunction
    total_time: float
    metrics: ProcessMetrics | None = None
    note: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.total_time) and self.total_time > 0):
            raise ValueError(f"total_time must be positive, got {self.total_time!r}")


@dataclass(frozen=True)
class ReportRow:
    name: str
    settling_time: float
    total_time: float
    reaction_fraction: float
    cpk: float | None
    pp: float | None
    sigma_d: float | None
    rate_d: float | None
    cv: float | None
    steadiness: str
    note: str = ""


def build_report(cases: Sequence[CaseRecord], cfg: SettlingConfig = SettlingConfig()) -> list[ReportRow]:
    """One row per case, sorted by ascending reaction fraction (name breaks ties).

    A case whose settling computation fails is kept with NaN transient
    fields and the failure appended to its note.
    """
    if not cases:
        raise ValueError("no cases to report")
    rows = []
    for case in cases:
        stable = is_stable(case.model)
        note = case.note
        try:
            ts = settling_time(case.model, cfg).settling_time
            frac = percentile_reaction_time(ts, case.total_time)
            steadiness = classify_steadiness(ts, case.total_time, stable)
        except ValueError as exc:
            ts = frac = math.nan
            steadiness = "steady" if stable else "unsteady"
            note = f"{note}; settling failed: {exc}" if note else f"settling failed: {exc}"
        m = case.metrics
        rows.append(
            ReportRow(
                name=case.name,
                settling_time=ts,
                total_time=case.total_time,
                reaction_fraction=frac,
                cpk=m.cpk if m else None,
                pp=m.pp if m else None,
                sigma_d=m.sigma_d if m else None,
                rate_d=m.rate_d if m else None,
                cv=m.cv if m else None,
                steadiness=steadiness,
                note=note,
            )
        )
    rows.sort(key=lambda r: (math.isnan(r.reaction_fraction), r.reaction_fraction, r.name))
    return rows


def _average_ranks(a: np.ndarray) -> np.ndarray:
    order = np.argsort(a, kind="stable")
    ranks = np.empty(len(a))
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rank(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rho with average ranks for ties."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d sequences of equal length")
    if len(x) < 2:
        raise ValueError("need at least 2 points")
    if np.isnan(x).any() or np.isnan(y).any():
        raise ValueError("inputs must not contain NaN")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ValueError("rank correlation is undefined for a constant vector")
    rx = _average_ranks(x) - (len(x) + 1) / 2.0
    ry = _average_ranks(y) - (len(y) + 1) / 2.0
    return float((rx @ ry) / math.sqrt((rx @ rx) * (ry @ ry)))


def _fmt(value: float | None, spec: str = "%.6g") -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return spec % value


def write_report_csv(rows: Sequence[ReportRow], path: str | Path) -> None:
    """Write rows in the fixed report schema; percentages get 2 decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.name,
                    _fmt(r.settling_time),
                    _fmt(r.total_time),
                    _fmt(100.0 * r.reaction_fraction, "%.2f"),
                    _fmt(r.cpk),
                    _fmt(r.pp),
                    _fmt(r.sigma_d),
                    _fmt(r.rate_d),
                    _fmt(r.cv),
                    r.steadiness,
                ]
            )
