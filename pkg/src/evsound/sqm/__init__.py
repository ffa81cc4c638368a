"""Psychoacoustic sound-quality metrics: loudness, sharpness, tonality,
roughness, fluctuation strength, and the combined annoyance index."""

from .trace import SqmTrace, SqmSummary, percentile_exceeded
from .loudness import (specific_loudness_frames, stationary_loudness,
                       time_varying_loudness)
from .sharpness import sharpness_from_specific, sharpness_trace
from .tonality import tonality_trace
from .roughness import roughness_trace
from .fluctuation import fluctuation_trace
from .annoyance import psychoacoustic_annoyance

__all__ = [
    "SqmTrace",
    "SqmSummary",
    "percentile_exceeded",
    "specific_loudness_frames",
    "stationary_loudness",
    "time_varying_loudness",
    "sharpness_from_specific",
    "sharpness_trace",
    "tonality_trace",
    "roughness_trace",
    "fluctuation_trace",
    "psychoacoustic_annoyance",
]
