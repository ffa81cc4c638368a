"""Convenience plot rendering.

Plots are presentation artifacts only; every number shown also exists in a
CSV/JSON output, which is the surface the test suite checks.  PNGs are
written without a creation date so repeated runs produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .levels import Spectrogram  # noqa: E402

_META = {"Date": None}


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def rating_boxplot(values_by_stimulus: dict[int, list[float]], path: str | Path,
                   ylabel: str = "annoyance rating") -> None:
    """One box (1.5 IQR whiskers) per stimulus, with the mean marked."""
    ids = sorted(values_by_stimulus)
    data = [values_by_stimulus[i] for i in ids]
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.boxplot(data, tick_labels=[str(i) for i in ids], whis=1.5,
               showmeans=True, meanprops={"marker": "D", "markersize": 4})
    ax.set_xlabel("stimulus")
    ax.set_ylabel(ylabel)
    ax.set_ylim(-0.5, 10.5)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def scatter_fit(x: np.ndarray, y: np.ndarray, yerr: np.ndarray | None,
                slope: float, intercept: float, path: str | Path,
                xlabel: str, ylabel: str = "mean annoyance rating",
                point_labels: list | None = None) -> None:
    """Scatter with one-standard-deviation error bars and the OLS line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.errorbar(x, y, yerr=yerr, fmt="o", ms=5, capsize=3, lw=1)
    xs = np.linspace(float(np.min(x)), float(np.max(x)), 2)
    ax.plot(xs, slope * xs + intercept, "-", color="tab:red",
            label=f"fit: y = {slope:.3f} x + {intercept:.3f}")
    if point_labels is not None:
        for xi, yi, lab in zip(x, y, point_labels):
            ax.annotate(str(lab), (xi, yi), textcoords="offset points",
                        xytext=(4, 4), fontsize=7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def spectrogram_image(spec: Spectrogram, path: str | Path,
                      f_max: float | None = None, floor_db: float = 0.0) -> None:
    """Heat map of a spectrogram, time on x, frequency on y."""
    freqs = spec.freqs
    levels = spec.levels_db
    if f_max is not None:
        keep = freqs <= f_max
        freqs = freqs[keep]
        levels = levels[keep]
    fig, ax = plt.subplots(figsize=(8, 4))
    vmax = float(np.max(levels))
    im = ax.pcolormesh(spec.times, freqs, levels, cmap="magma",
                       vmin=max(floor_db, vmax - 80.0), vmax=vmax, shading="auto")
    fig.colorbar(im, ax=ax, label="dB re 20 µPa/√Hz")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("frequency (Hz)")
    fig.tight_layout()
    _save(fig, path)
