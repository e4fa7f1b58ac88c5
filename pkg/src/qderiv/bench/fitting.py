"""Log-log least-squares power-law fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerLawFit:
    """``value ~ prefactor * x**exponent``."""

    exponent: float
    prefactor: float
    r_squared: float
    n_points: int

    def __call__(self, x):
        return self.prefactor * np.asarray(x, dtype=float) ** self.exponent


def power_law_fit(points) -> PowerLawFit:
    """Fit ``(x, value)`` pairs; needs at least 3 points, all positive."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (x, value) pairs")
    if pts.shape[0] < 3:
        raise ValueError(f"power-law fit needs at least 3 points, got {pts.shape[0]}")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("power-law fit needs finite positive x and values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(np.exp(intercept)), float(r2), int(pts.shape[0]))


def intersection(a: PowerLawFit, b: PowerLawFit) -> float | None:
    """``x`` where the two fitted laws cross, or ``None`` for parallel fits."""
    if a.exponent == b.exponent:
        return None
    return float((b.prefactor / a.prefactor) ** (1.0 / (a.exponent - b.exponent)))
