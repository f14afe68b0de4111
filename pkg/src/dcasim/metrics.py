"""Ground-truth labeling and classification error reporting.

The theoretical label of an antigen type is computed from pen geometry
alone: from the type's representative pose, rays across the forward
signal window find the nearest hit per ray; the type is anomalous when
some ray's nearest hit is a short pink cylinder within the sensing
horizon. Error rates compare the engine's per-type classification
against these labels, cumulatively from the start of a run.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from dcasim.antigen import PenGrid, decode
from dcasim.engine import ANOMALOUS, MCAVTable, NORMAL, Presentation, classify
from dcasim.world import LASER_MIN_VISIBLE_HEIGHT, Pen, StaticGeometry

# The lookup table's zero-strength radius: geometry beyond it cannot move
# any signal, so it cannot bear on the ideal label either.
DEFAULT_HORIZON_MM = 1200.0
DEFAULT_FAN_HALF_ANGLE = math.radians(22.0)
DEFAULT_FAN_STEP = math.radians(1.0)


def _fan_offsets(half_angle: float, step: float) -> np.ndarray:
    n = int(round(2.0 * half_angle / step)) + 1
    return np.linspace(-half_angle, half_angle, n)


def compute_truth(pen: Pen, grid: PenGrid,
                  horizon: float = DEFAULT_HORIZON_MM,
                  fan_half_angle: float = DEFAULT_FAN_HALF_ANGLE,
                  fan_step: float = DEFAULT_FAN_STEP) -> np.ndarray:
    """Theoretical label (0/1) for every antigen type of the grid."""
    geometry = StaticGeometry(pen)
    anomalous_obstacle = np.array(
        [ob.is_pink and ob.height < LASER_MIN_VISIBLE_HEIGHT
         for ob in pen.obstacles], dtype=bool)
    offsets = _fan_offsets(fan_half_angle, fan_step)
    labels = np.zeros(grid.n_types, dtype=np.int8)
    for antigen_id in range(grid.n_types):
        pose = decode(antigen_id, grid)
        dist, hit = geometry.cast(pose.x, pose.y, pose.heading + offsets, 0.0)
        hits_obstacle = hit >= 0
        if hits_obstacle.any():
            idx = hit[hits_obstacle]
            if (anomalous_obstacle[idx]
                    & (dist[hits_obstacle] <= horizon)).any():
                labels[antigen_id] = ANOMALOUS
    return labels


def theoretical_label(antigen_id: int, pen: Pen, grid: PenGrid,
                      horizon: float = DEFAULT_HORIZON_MM,
                      fan_half_angle: float = DEFAULT_FAN_HALF_ANGLE,
                      fan_step: float = DEFAULT_FAN_STEP) -> int:
    """Theoretical label of one antigen type (rejects out-of-range ids)."""
    if not 0 <= antigen_id < grid.n_types:
        raise ValueError(f"antigen id {antigen_id} outside [0, {grid.n_types})")
    geometry = StaticGeometry(pen)
    pose = decode(antigen_id, grid)
    offsets = _fan_offsets(fan_half_angle, fan_step)
    dist, hit = geometry.cast(pose.x, pose.y, pose.heading + offsets, 0.0)
    for d, h in zip(dist, hit):
        if h >= 0 and d <= horizon:
            ob = pen.obstacles[int(h)]
            if ob.is_pink and ob.height < LASER_MIN_VISIBLE_HEIGHT:
                return ANOMALOUS
    return NORMAL


@dataclass(frozen=True)
class ErrorRates:
    """FP/FN rates over the presented types; a zero denominator reports a
    rate of 0 with the corresponding count flagging it as undefined."""

    fp_rate: float
    fn_rate: float
    n_true_normal: int
    n_true_anomalous: int

    @property
    def fp_defined(self) -> bool:
        return self.n_true_normal > 0

    @property
    def fn_defined(self) -> bool:
        return self.n_true_anomalous > 0

    @property
    def total(self) -> float:
        return self.fp_rate + self.fn_rate


def error_rates(predicted: Mapping[int, int], truth,
                presented: Iterable[int],
                presentations_per_type: Mapping[int, int] | None = None
                ) -> ErrorRates:
    """Per-type FP and FN rates over the presented types.

    ``truth`` is indexable by type id (array or mapping). By default each
    observed type counts once; passing presentation counts switches to the
    per-presentation weighting variant.
    """
    fp = fn = n_norm = n_anom = 0
    for t in presented:
        w = 1 if presentations_per_type is None else presentations_per_type[t]
        if truth[t] == NORMAL:
            n_norm += w
            if predicted[t] == ANOMALOUS:
                fp += w
        else:
            n_anom += w
            if predicted[t] == NORMAL:
                fn += w
    return ErrorRates(fp / n_norm if n_norm else 0.0,
                      fn / n_anom if n_anom else 0.0,
                      n_norm, n_anom)


class SeriesRow(NamedTuple):
    t: float
    fp_rate: float
    fn_rate: float
    n_presented_types: int


def series(presentation_log, truth, interval: float = 1.0,
           threshold: float = 0.6, duration: float | None = None,
           per_presentation: bool = False) -> list[SeriesRow]:
    """Cumulative error rates at each interval boundary.

    ``presentation_log`` rows are (t, antigen_id, context), time-ordered.
    At each boundary the cumulative MCAV table is classified at the
    threshold and compared against the truth labels over the types
    presented so far.
    """
    rows = list(presentation_log)
    if duration is None:
        if not rows:
            return []
        duration = max(r[0] for r in rows)
    table = MCAVTable()
    counts: dict[int, int] = {}
    out: list[SeriesRow] = []
    i = 0
    n_bounds = int(math.floor(duration / interval + 1e-9))
    for k in range(1, n_bounds + 1):
        bound = k * interval
        while i < len(rows) and rows[i][0] <= bound + 1e-12:
            _, antigen_id, context = rows[i]
            table.add(Presentation(int(antigen_id), int(context)))
            counts[int(antigen_id)] = counts.get(int(antigen_id), 0) + 1
            i += 1
        predicted = classify(table, threshold)
        rates = error_rates(predicted, truth, predicted.keys(),
                            counts if per_presentation else None)
        out.append(SeriesRow(bound, rates.fp_rate, rates.fn_rate,
                             len(predicted)))
    return out
