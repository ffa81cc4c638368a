"""Common containers for time-varying metric traces and their summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signal import SignalError

WARMUP_SECONDS = 0.5
"""Default initial span excluded from percentile statistics (filter settling)."""


def percentile_exceeded(values: np.ndarray, fraction: float = 0.05) -> float:
    """Value exceeded during ``fraction`` of the time (interpolated).

    ``fraction=0.05`` gives the classic 5-percent-exceeded statistic: sort the
    trace and read it at the (1 - fraction) quantile with linear interpolation
    between order statistics.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise SignalError("cannot take a percentile of an empty trace")
    if not 0.0 < fraction < 1.0:
        raise SignalError(f"fraction must be in (0, 1), got {fraction}")
    return float(np.quantile(values, 1.0 - fraction, method="linear"))


@dataclass(frozen=True)
class SqmTrace:
    """A sampled metric trace with its unit label."""

    times: np.ndarray
    values: np.ndarray
    unit: str

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise SignalError("trace times and values must have matching shapes")

    def after(self, t: float) -> "SqmTrace":
        """Sub-trace at times >= t (used to drop the settling transient)."""
        mask = self.times >= t
        return SqmTrace(self.times[mask], self.values[mask], self.unit)

    def exceeded(self, fraction: float = 0.05, skip: float = WARMUP_SECONDS) -> float:
        """Percentile-exceeded statistic over the trace after ``skip`` seconds."""
        trimmed = self.after(skip) if skip > 0.0 else self
        if trimmed.values.size == 0:
            trimmed = self
        return percentile_exceeded(trimmed.values, fraction)

    def max(self) -> float:
        return float(np.max(self.values))

    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class SqmSummary:
    """5-percent-exceeded values of the five component metrics plus the
    combined annoyance index."""

    n5: float
    s5: float
    k5: float
    r5: float
    fs5: float
    pa: float

    def to_dict(self) -> dict:
        return {"N5": self.n5, "S5": self.s5, "K5": self.k5,
                "R5": self.r5, "FS5": self.fs5, "PA": self.pa}
