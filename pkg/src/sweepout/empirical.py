"""Constants measured on a concrete surface instead of taken from the
hyperbolic comparison geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .surface import Surface, approximate_diameter, ball_areas, farthest_point_sample


@dataclass
class MeasuredConstants:
    C0: float
    radii: np.ndarray
    counts: np.ndarray
    centers: np.ndarray

    def covering(self, r: float) -> int:
        """Largest measured covering count over sampled radii ``s <= r``.

        Radii below the smallest resolvable sample use that sample's count.
        """
        ok = self.radii <= r * (1 + 1e-12)
        if not ok.any():
            return int(self.counts[0])
        return int(self.counts[ok].max())

    def summary(self) -> dict:
        return {
            "C0": float(self.C0),
            "radii": [float(x) for x in self.radii],
            "cover_counts": [int(x) for x in self.counts],
            "centers": [int(x) for x in self.centers],
        }


def cover_counts(surface: Surface, s: float, centers) -> np.ndarray:
    """Greedy number of g0 ``s``-balls covering each center's ``4s``-ball."""
    indptr, indices, weights = surface.graph("g0")
    return _kernels.greedy_cover_counts(indptr, indices, weights, np.asarray(centers, dtype=np.int64), float(s))


def measure_constants(surface: Surface, n_centers: int = 16, n_radii: int = 8) -> MeasuredConstants:
    """Measure C0 (max g0 ball area / r^2) and covering counts on ``surface``.

    Radii run geometrically from twice the longest g0 edge to half the
    estimated diameter; centers are a farthest-point sample.
    """
    h = surface.max_edge_length_g0
    diam, _, _ = approximate_diameter(surface, "g0")
    lo = 2.0 * h
    hi = max(lo, 0.5 * diam)
    radii = np.geomspace(lo, hi, n_radii) if hi > lo else np.array([lo])
    centers = farthest_point_sample(surface, n_centers, "g0")
    c0 = 0.0
    counts = []
    for s in radii:
        for rad in (s, min(4 * s, diam)):
            areas = ball_areas(surface, rad, centers, ball_metric="g0", area_metric="g0")
            c0 = max(c0, float(areas.max()) / rad**2)
        counts.append(int(cover_counts(surface, s, centers).max()))
    counts = np.maximum.accumulate(np.array(counts, dtype=np.int64))
    return MeasuredConstants(float(c0), radii, counts, centers)
