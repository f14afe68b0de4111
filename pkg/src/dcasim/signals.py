"""Sensor-to-signal transduction.

Turns raw range readings (laser scan, sonar ranges) and camera blob area
into the three bounded input signal strengths the cell engine consumes.
Ranged sensors share one distance-to-strength lookup table evaluated with
linear interpolation; the blob area is scaled and clamped.
"""

import math
from dataclasses import dataclass

import numpy as np

# Default distance (mm) -> strength pairs for both ranged sensors.
DEFAULT_RANGE_TABLE = ((0.0, 100.0), (300.0, 90.0), (600.0, 50.0),
                       (900.0, 20.0), (1200.0, 0.0))


@dataclass(frozen=True)
class RangeLookup:
    """Piecewise-linear distance-to-strength table for ranged sensors.

    Distances must be strictly increasing and strengths non-increasing
    within [0, 100]; beyond the last knot the last strength holds (0 for
    the default table), below the first knot the first strength holds.
    """

    knots: tuple[tuple[float, float], ...] = DEFAULT_RANGE_TABLE

    def __post_init__(self):
        if len(self.knots) < 2:
            raise ValueError("lookup table needs at least two knots")
        ds = [d for d, _ in self.knots]
        ss = [s for _, s in self.knots]
        if any(b <= a for a, b in zip(ds, ds[1:])):
            raise ValueError("lookup distances must be strictly increasing")
        if any(b > a for a, b in zip(ss, ss[1:])):
            raise ValueError("lookup strengths must be non-increasing")
        if any(not (0.0 <= s <= 100.0) for s in ss):
            raise ValueError("lookup strengths must lie in [0, 100]")

    @property
    def max_distance(self) -> float:
        return self.knots[-1][0]


@dataclass(frozen=True)
class FovWindow:
    """Angular window in the robot frame (radians, 0 = straight ahead)."""

    min_angle: float
    max_angle: float

    def __post_init__(self):
        if not self.min_angle < self.max_angle:
            raise ValueError("FOV requires min_angle < max_angle")

    @classmethod
    def from_degrees(cls, min_deg: float, max_deg: float) -> "FovWindow":
        return cls(math.radians(min_deg), math.radians(max_deg))

    def contains(self, angle: float) -> bool:
        # wrap only out-of-range angles: re-wrapping an in-range angle can
        # move it by an ulp across the window edge
        a = angle if -math.pi <= angle < math.pi else wrap_pi(angle)
        return self.min_angle <= a <= self.max_angle


# Forward window shared by the safe and danger signals.
DEFAULT_SIGNAL_FOV = FovWindow.from_degrees(-22.0, 22.0)


def wrap_pi(angle: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    a = (angle + math.pi) % (2.0 * math.pi) - math.pi
    return a if a < math.pi else -math.pi


def strength_from_distance(table: RangeLookup, distance_mm: float) -> float:
    """Signal strength for an object at the given distance.

    Linear interpolation between table knots; clamps to the end strengths
    outside the knot span. Negative or non-finite distances are rejected.
    """
    if not math.isfinite(distance_mm) or distance_mm < 0.0:
        raise ValueError(f"distance must be finite and >= 0, got {distance_mm}")
    ds = [d for d, _ in table.knots]
    ss = [s for _, s in table.knots]
    return float(np.interp(distance_mm, ds, ss))


def _min_in_fov(scan, fov: FovWindow) -> float:
    """Smallest finite range among readings inside the window (inf if none)."""
    angles, distances = _split_scan(scan)
    if angles.size == 0:
        raise ValueError("empty scan")
    best = math.inf
    for a, d in zip(angles, distances):
        if math.isfinite(d) and fov.contains(a):
            if d < best:
                best = d
    return best


def _split_scan(scan):
    if isinstance(scan, tuple) and len(scan) == 2 and np.ndim(scan[0]) == 1:
        return np.asarray(scan[0], float), np.asarray(scan[1], float)
    arr = np.asarray(list(scan), dtype=float)
    if arr.size == 0:
        return np.empty(0), np.empty(0)
    return arr[:, 0], arr[:, 1]


def safe_from_lrf(scan, fov: FovWindow = DEFAULT_SIGNAL_FOV,
                  table: RangeLookup = RangeLookup()) -> float:
    """Safe signal from a laser scan: nearest in-window return, looked up.

    ``scan`` is a sequence of (angle, distance) pairs or an
    (angles, distances) array pair. No finite return inside the window
    means strength 0.
    """
    nearest = _min_in_fov(scan, fov)
    if not math.isfinite(nearest):
        return 0.0
    return strength_from_distance(table, nearest)


def danger_from_sonar(ranges, fov: FovWindow = DEFAULT_SIGNAL_FOV,
                      table: RangeLookup = RangeLookup()) -> float:
    """Danger signal from sonar ranges restricted to the same forward window."""
    nearest = _min_in_fov(ranges, fov)
    if not math.isfinite(nearest):
        return 0.0
    return strength_from_distance(table, nearest)


def pamp_from_blob(area: float, scale: float) -> float:
    """PAMP signal: blob area scaled and clamped to [0, 100]."""
    if not math.isfinite(area) or area < 0.0:
        raise ValueError(f"blob area must be finite and >= 0, got {area}")
    if scale <= 0.0:
        raise ValueError(f"scale must be > 0, got {scale}")
    return min(100.0, area * scale)
