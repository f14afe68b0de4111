"""Location antigen codec.

A pose inside the pen maps to an integer antigen type identifying one
300 mm grid square and one 30 degree heading segment within it. The
multiplicity function decides how many copies of that type enter the
tissue per cycle: slow or stationary motion contributes more copies than
fast motion, bounded to [2, 102].
"""

import logging
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi
CELL_MM = 300.0
SEGMENTS_PER_CELL = 12
SEGMENT_RAD = TWO_PI / SEGMENTS_PER_CELL

log = logging.getLogger(__name__)


def normalize_heading(heading: float) -> float:
    """Normalize to [0, 2*pi); clamps the float edge case h % 2pi == 2pi."""
    h = heading % TWO_PI
    return h if 0.0 <= h < TWO_PI else 0.0


@dataclass(frozen=True)
class Pose:
    """Planar pose in the pen frame: mm position, heading in [0, 2*pi)."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)
                and math.isfinite(self.heading)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True)
class PenGrid:
    """Grid layout of a pen: 300 mm cells, 12 heading segments per cell."""

    width_mm: float
    height_mm: float

    def __post_init__(self):
        for name, dim in (("width", self.width_mm), ("height", self.height_mm)):
            n = dim / CELL_MM
            if not (abs(n - round(n)) < 1e-9 and round(n) >= 1):
                raise ValueError(f"pen {name} must be a positive multiple of "
                                 f"{CELL_MM:g} mm, got {dim}")

    @property
    def n_cols(self) -> int:
        return round(self.width_mm / CELL_MM)

    @property
    def n_rows(self) -> int:
        return round(self.height_mm / CELL_MM)

    @property
    def n_types(self) -> int:
        return self.n_cols * self.n_rows * SEGMENTS_PER_CELL

    def contains(self, pose: Pose) -> bool:
        return 0.0 <= pose.x < self.width_mm and 0.0 <= pose.y < self.height_mm


def encode(pose: Pose, grid: PenGrid) -> int:
    """Antigen type id for a pose: (row * n_cols + col) * 12 + segment."""
    if not grid.contains(pose):
        raise ValueError(f"pose ({pose.x}, {pose.y}) outside pen")
    col = min(int(pose.x // CELL_MM), grid.n_cols - 1)
    row = min(int(pose.y // CELL_MM), grid.n_rows - 1)
    segment = min(int(pose.heading // SEGMENT_RAD), SEGMENTS_PER_CELL - 1)
    return (row * grid.n_cols + col) * SEGMENTS_PER_CELL + segment


def decode(antigen_id: int, grid: PenGrid) -> Pose:
    """Representative pose for a type: cell center, segment mid-heading."""
    if not 0 <= antigen_id < grid.n_types:
        raise ValueError(f"antigen id {antigen_id} outside [0, {grid.n_types})")
    cell, segment = divmod(antigen_id, SEGMENTS_PER_CELL)
    row, col = divmod(cell, grid.n_cols)
    return Pose(col * CELL_MM + CELL_MM / 2.0,
                row * CELL_MM + CELL_MM / 2.0,
                (segment + 0.5) * SEGMENT_RAD)


def multiplicity(v: float, theta_dot: float,
                 v_max: float, theta_dot_max: float) -> int:
    """Antigen copies for the current velocities.

    floor(75*(1-|v/v_max|) + 1 + 25*(1-|theta_dot/theta_dot_max|) + 1):
    102 when stationary, 2 at both maxima.
    """
    if v_max <= 0.0 or theta_dot_max <= 0.0:
        raise ValueError("velocity maxima must be > 0")
    if abs(v) > v_max:
        raise ValueError(f"|v|={abs(v)} exceeds v_max={v_max}")
    if abs(theta_dot) > theta_dot_max:
        raise ValueError(f"|theta_dot|={abs(theta_dot)} exceeds "
                         f"theta_dot_max={theta_dot_max}")
    w = (75.0 * (1.0 - abs(v / v_max)) + 1.0
         + 25.0 * (1.0 - abs(theta_dot / theta_dot_max)) + 1.0)
    return int(math.floor(w))


def emit_antigen(pose: Pose, v: float, theta_dot: float, grid: PenGrid,
                 v_max: float, theta_dot_max: float) -> list[int]:
    """Copies of the encoded type for one cycle; empty if the pose left the pen.

    An out-of-pen pose (dead-reckoning drift) emits nothing and logs the
    event; velocity bounds violations propagate from ``multiplicity``.
    """
    count = multiplicity(v, theta_dot, v_max, theta_dot_max)
    if not grid.contains(pose):
        log.debug("pose (%.0f, %.0f) outside pen; no antigen emitted",
                  pose.x, pose.y)
        return []
    return [encode(pose, grid)] * count
