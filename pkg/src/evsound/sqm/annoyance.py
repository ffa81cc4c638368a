"""Combined psychoacoustic annoyance from the five component metrics.

The index extends the classic loudness/sharpness/fluctuation/roughness
combination with a tonality term:

    PA = N5 * (1 + sqrt(wS^2 + wFR^2 + wT^2))

    wS  = (S5 - 1.75) * 0.25 * log10(N5 + 10)   for S5 > 1.75, else 0
    wFR = 2.18 / N5^0.4 * (0.4 * FS5 + 0.6 * R5)
    wT^2 = 6.41 * K5^2 / N5^0.52

with N5 in sone, S5 in acum, K5 in tonality units, R5 in asper, FS5 in
vacil.  A silent signal (N5 = 0) scores 0.
"""

from __future__ import annotations

import numpy as np

from ..signal import SignalError

SHARPNESS_PIVOT = 1.75
SHARPNESS_SCALE = 0.25
FR_SCALE = 2.18
FR_EXPONENT = 0.4
FS_WEIGHT = 0.4
R_WEIGHT = 0.6
TONALITY_SCALE = 6.41
TONALITY_EXPONENT = 0.52


def psychoacoustic_annoyance(n5: float, s5: float, k5: float,
                             r5: float, fs5: float) -> float:
    """Combined annoyance index from 5-percent-exceeded metric values."""
    for name, v in (("N5", n5), ("S5", s5), ("K5", k5), ("R5", r5), ("FS5", fs5)):
        if not np.isfinite(v) or v < 0.0:
            raise SignalError(f"{name} must be finite and non-negative, got {v}")
    if n5 == 0.0:
        return 0.0
    ws = 0.0
    if s5 > SHARPNESS_PIVOT:
        ws = (s5 - SHARPNESS_PIVOT) * SHARPNESS_SCALE * np.log10(n5 + 10.0)
    wfr = FR_SCALE / n5**FR_EXPONENT * (FS_WEIGHT * fs5 + R_WEIGHT * r5)
    wt2 = TONALITY_SCALE * k5**2 / n5**TONALITY_EXPONENT
    return float(n5 * (1.0 + np.sqrt(ws**2 + wfr**2 + wt2)))
