"""Rating-data ingestion and the metric-versus-annoyance analysis.

Ratings arrive either as CSV (one row per participant and stimulus) or as a
session-result JSON document produced by the experiment runner.  Analysis
covers box-plot descriptive statistics per stimulus, Pearson correlation with
two-sided t-test p-values, the metric correlation table (with the two
non-synthetic stimuli excluded), and an ordinary least-squares fit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METRIC_COLUMNS = ["L_p_max", "L_p_A_max", "L_p_A_eq", "PNLT_max", "EPNL",
                  "N5", "S5", "K5", "R5", "FS5", "PA"]
TABLE_METRICS = [m for m in METRIC_COLUMNS if m != "L_p_A_eq"]
DEFAULT_EXCLUDE = frozenset({14, 15})
SIGNIFICANCE_LEVEL = 0.05

RATING_FIELDS = ("annoyance", "noticeability", "informativeness")

CSV_HEADER = ["participant_id", "stimulus_id", "annoyance",
              "noticeability", "informativeness", "keypress_timeline"]


class RatingsError(ValueError):
    """Raised for malformed rating data; message carries the location."""


@dataclass(frozen=True)
class RatingRecord:
    participant_id: str
    stimulus_id: int
    annoyance: int
    noticeability: int
    informativeness: int
    keypress_timeline: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if not 1 <= self.stimulus_id <= 15:
            raise RatingsError(f"stimulus_id must be 1..15, got {self.stimulus_id}")
        for name in RATING_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 10:
                raise RatingsError(f"{name} must be an integer in 0..10, got {v!r}")
        _validate_timeline(self.keypress_timeline)


def _validate_timeline(timeline) -> None:
    prev_time = -np.inf
    prev_event = None
    for entry in timeline:
        try:
            event, t = entry
        except (TypeError, ValueError):
            raise RatingsError(f"timeline entry {entry!r} is not (event, time)")
        if event not in ("press", "release"):
            raise RatingsError(f"timeline event must be press or release, got {event!r}")
        if t < prev_time:
            raise RatingsError("timeline times must be non-decreasing")
        if event == prev_event:
            raise RatingsError("timeline events must alternate press/release")
        prev_time, prev_event = t, event


@dataclass(frozen=True)
class MetricSet:
    """All Table-style metrics for one stimulus."""

    stimulus_id: int
    L_p_max: float
    L_p_A_max: float
    L_p_A_eq: float
    PNLT_max: float
    EPNL: float
    N5: float
    S5: float
    K5: float
    R5: float
    FS5: float
    PA: float

    def value(self, metric: str) -> float:
        if metric not in METRIC_COLUMNS:
            raise RatingsError(f"unknown metric {metric!r}")
        return float(getattr(self, metric))

    def to_dict(self) -> dict:
        d = {"stimulus_id": self.stimulus_id}
        d.update({m: float(getattr(self, m)) for m in METRIC_COLUMNS})
        return d


@dataclass(frozen=True)
class CorrelationResult:
    metric: str
    rho: float
    p_value: float
    n: int
    significant: bool


@dataclass(frozen=True)
class BoxStats:
    """Box-plot statistics with the 1.5 IQR whisker convention."""

    mean: float
    median: float
    q25: float
    q75: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]


def _parse_int(value: str, name: str, where: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise RatingsError(f"{where}: {name} must be an integer, got {value!r}")


def _load_csv(path: Path) -> list[RatingRecord]:
    records: list[RatingRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RatingsError(f"{path}: empty ratings file")
        missing = [c for c in CSV_HEADER[:5] if c not in reader.fieldnames]
        if missing:
            raise RatingsError(f"{path}: missing columns {missing}")
        for row in reader:
            where = f"{path}:{reader.line_num}"
            timeline = ()
            raw = (row.get("keypress_timeline") or "").strip()
            if raw:
                try:
                    timeline = tuple((e, float(t)) for e, t in json.loads(raw))
                except (json.JSONDecodeError, TypeError, ValueError):
                    raise RatingsError(f"{where}: keypress_timeline is not a JSON event list")
            try:
                records.append(RatingRecord(
                    participant_id=str(row["participant_id"]).strip(),
                    stimulus_id=_parse_int(row["stimulus_id"], "stimulus_id", where),
                    annoyance=_parse_int(row["annoyance"], "annoyance", where),
                    noticeability=_parse_int(row["noticeability"], "noticeability", where),
                    informativeness=_parse_int(row["informativeness"], "informativeness", where),
                    keypress_timeline=timeline,
                ))
            except RatingsError as err:
                raise RatingsError(f"{where}: {err}") from None
    return records


def _load_session_json(path: Path) -> list[RatingRecord]:
    from . import manifest

    with open(path) as fh:
        doc = json.load(fh)
    manifest.validate_session_result(doc)
    records = []
    participant = str(doc["participant_id"])
    for i, trial in enumerate(doc["trials"]):
        if trial.get("training", False):
            continue
        where = f"{path}: trial {i}"
        responses = trial["responses"]
        timeline = tuple((ev["event"], float(ev["time"])) for ev in trial.get("keypress_timeline", []))
        try:
            records.append(RatingRecord(
                participant_id=participant,
                stimulus_id=int(trial["stimulus_id"]),
                annoyance=int(responses["annoyance"]),
                noticeability=int(responses["noticeability"]),
                informativeness=int(responses["informativeness"]),
                keypress_timeline=timeline,
            ))
        except RatingsError as err:
            raise RatingsError(f"{where}: {err}") from None
    return records


def load_ratings(path: str | Path) -> list[RatingRecord]:
    """Load and validate rating records from CSV or session-result JSON.

    Duplicate (participant, stimulus) pairs are rejected; error messages name
    the offending line or trial.
    """
    path = Path(path)
    if not path.exists():
        raise RatingsError(f"ratings file not found: {path}")
    if path.suffix.lower() == ".json":
        records = _load_session_json(path)
    else:
        records = _load_csv(path)
    seen: set[tuple[str, int]] = set()
    for rec in records:
        key = (rec.participant_id, rec.stimulus_id)
        if key in seen:
            raise RatingsError(
                f"{path}: duplicate rating for participant {rec.participant_id!r}, "
                f"stimulus {rec.stimulus_id}")
        seen.add(key)
    return records


def describe(records: list[RatingRecord], stimulus_id: int,
             rating: str = "annoyance") -> BoxStats:
    """Box-plot statistics of one stimulus' ratings (1.5 IQR whiskers)."""
    values = np.array([getattr(r, rating) for r in records
                       if r.stimulus_id == stimulus_id], dtype=float)
    if values.size == 0:
        raise RatingsError(f"no ratings for stimulus {stimulus_id}")
    q25, median, q75 = np.percentile(values, [25, 50, 75])
    iqr = q75 - q25
    in_low = values[values >= q25 - 1.5 * iqr]
    in_high = values[values <= q75 + 1.5 * iqr]
    whisker_low = float(np.min(in_low))
    whisker_high = float(np.max(in_high))
    outliers = tuple(sorted(values[(values < whisker_low) | (values > whisker_high)]))
    return BoxStats(mean=float(np.mean(values)), median=float(median),
                    q25=float(q25), q75=float(q75),
                    whisker_low=whisker_low, whisker_high=whisker_high,
                    outliers=outliers)


def mean_ratings(records: list[RatingRecord], rating: str = "annoyance") -> dict[int, float]:
    """Unweighted per-stimulus mean over participants."""
    by_id: dict[int, list[float]] = {}
    for r in records:
        by_id.setdefault(r.stimulus_id, []).append(float(getattr(r, rating)))
    return {sid: float(np.mean(vals)) for sid, vals in sorted(by_id.items())}


def pearson(x, y, metric: str = "") -> CorrelationResult:
    """Sample Pearson correlation with a two-sided t-test p-value."""
    from scipy import stats

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise RatingsError(f"pearson needs equal-length vectors, got {x.shape} vs {y.shape}")
    n = x.size
    if n < 3:
        raise RatingsError(f"pearson needs n >= 3, got {n}")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise RatingsError("correlation undefined for a constant vector")
    xc = x - np.mean(x)
    yc = y - np.mean(y)
    rho = float(np.sum(xc * yc) / np.sqrt(np.sum(xc**2) * np.sum(yc**2)))
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = abs(rho) * np.sqrt((n - 2) / (1.0 - rho**2))
        p = float(2.0 * stats.t.sf(t, n - 2))
    return CorrelationResult(metric=metric, rho=rho, p_value=p, n=n,
                             significant=p <= SIGNIFICANCE_LEVEL)


def correlation_table(metrics: list[MetricSet], ratings: dict[int, float],
                      exclude: frozenset[int] | set[int] = DEFAULT_EXCLUDE,
                      ) -> list[CorrelationResult]:
    """Correlate every metric against mean annoyance over the kept stimuli.

    The equalized-exposure metric (L_p_A_eq) is omitted: it is constant by
    construction across the normalized stimuli, so its correlation is
    undefined.  Default exclusion drops the two non-synthetic stimuli.
    """
    by_id = {m.stimulus_id: m for m in metrics}
    ids = sorted(set(by_id) & set(ratings) - set(exclude))
    if len(ids) < 3:
        raise RatingsError(f"need at least 3 stimuli after exclusion, got {len(ids)}")
    y = [ratings[i] for i in ids]
    return [pearson([by_id[i].value(name) for i in ids], y, metric=name)
            for name in TABLE_METRICS]


def linear_fit(x, y) -> tuple[float, float, np.ndarray]:
    """Ordinary least squares: returns (slope, intercept, residuals)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise RatingsError("linear_fit needs two equal-length vectors, n >= 2")
    if np.ptp(x) == 0.0:
        raise RatingsError("linear_fit undefined for constant x")
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return float(slope), float(intercept), residuals
