"""The dendritic-cell anomaly-detection engine.

A population of cells samples antigen from a shared tissue buffer while
accumulating three fused output signals from the tissue's current input
signals (PAMP, danger, safe). When a cell's cumulative costimulatory
output exceeds its migration threshold it presents everything it holds
with a binary context — 0 (semi-mature, normal) when the safe-driven
output dominates, 1 (mature, anomalous) otherwise — then resets and
rejoins the population. Per antigen type, the fraction of presentations
made in the mature context (MCAV) is thresholded to classify the type.

The engine is independent of where signals and antigen come from; the
simulator and the synthetic stream reader both feed it.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

NORMAL = 0
ANOMALOUS = 1

# Output rows: costimulatory, semi-maturation, maturation.
CSM, SEMI, MAT = 0, 1, 2

# Simplest integer matrix satisfying the sign structure the fusion rule
# requires (see WeightMatrix); a configuration default, not ground truth.
DEFAULT_WEIGHTS = ((2.0, 1.0, 2.0),
                   (0.0, 0.0, 1.0),
                   (2.0, 1.0, -3.0))


@dataclass(frozen=True)
class SignalVector:
    """One cycle's input signal strengths, each within [0, 100]."""

    pamp: float = 0.0
    danger: float = 0.0
    safe: float = 0.0

    def __post_init__(self):
        for name, v in (("pamp", self.pamp), ("danger", self.danger),
                        ("safe", self.safe)):
            if not (math.isfinite(v) and 0.0 <= v <= 100.0):
                raise ValueError(f"{name} signal must be finite in [0, 100], "
                                 f"got {v}")


class WeightMatrix:
    """3x3 fusion weights: rows (csm, semi, mat) x columns (pamp, danger, safe).

    Sign structure is enforced: the csm row is all positive (every signal
    contributes to costimulation), the semi row responds to the safe
    signal alone, and the mat row is positive for pamp/danger with a
    negative safe entry that counteracts them.
    """

    def __init__(self, rows=DEFAULT_WEIGHTS):
        rows = tuple(tuple(float(v) for v in r) for r in rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("weight matrix must be 3x3")
        if any(not math.isfinite(v) for r in rows for v in r):
            raise ValueError("weights must be finite")
        csm, semi, mat = rows
        if not all(v > 0.0 for v in csm):
            raise ValueError("csm row must be all positive")
        if not (semi[0] == 0.0 and semi[1] == 0.0 and semi[2] > 0.0):
            raise ValueError("semi row must be (0, 0, positive)")
        if not (mat[0] > 0.0 and mat[1] > 0.0 and mat[2] < 0.0):
            raise ValueError("mat row must be (positive, positive, negative)")
        self.rows = rows

    def __eq__(self, other):
        return isinstance(other, WeightMatrix) and self.rows == other.rows

    def __repr__(self):
        return f"WeightMatrix({self.rows!r})"


def fuse_signals(weights: WeightMatrix,
                 s: SignalVector) -> tuple[float, float, float]:
    """Weighted sums o_i = sum_j w[i][j] * s_j for the three output rows."""
    sig = (s.pamp, s.danger, s.safe)
    w = weights.rows
    return (
        w[CSM][0] * sig[0] + w[CSM][1] * sig[1] + w[CSM][2] * sig[2],
        w[SEMI][0] * sig[0] + w[SEMI][1] * sig[1] + w[SEMI][2] * sig[2],
        w[MAT][0] * sig[0] + w[MAT][1] * sig[1] + w[MAT][2] * sig[2],
    )


@dataclass
class DendriticCell:
    """One population agent.

    Accumulates the three fused outputs and holds sampled antigen until
    its cumulative csm output strictly exceeds the migration threshold.
    """

    id: int
    migration_threshold: float
    cum_csm: float = 0.0
    cum_semi: float = 0.0
    cum_mat: float = 0.0
    antigen_store: list[int] = field(default_factory=list)

    def reset(self, new_threshold: float) -> None:
        self.migration_threshold = new_threshold
        self.cum_csm = 0.0
        self.cum_semi = 0.0
        self.cum_mat = 0.0
        self.antigen_store = []


def new_population(n: int, median: float, spread_fraction: float = 0.5,
                   rng: np.random.Generator | None = None) -> list[DendriticCell]:
    """Fresh cells with thresholds uniform on median*(1 +/- spread_fraction)."""
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    if median <= 0.0:
        raise ValueError(f"migration median must be > 0, got {median}")
    if not 0.0 <= spread_fraction < 1.0:
        raise ValueError(f"spread fraction must be in [0, 1), got {spread_fraction}")
    rng = rng if rng is not None else np.random.default_rng()
    lo = median * (1.0 - spread_fraction)
    hi = median * (1.0 + spread_fraction)
    return [DendriticCell(i, float(rng.uniform(lo, hi))) for i in range(n)]


def maturation_context(cell: DendriticCell) -> int:
    """0 when the semi output dominates (ties included), else 1."""
    return NORMAL if cell.cum_semi >= cell.cum_mat else ANOMALOUS


class Presentation(NamedTuple):
    """One antigen copy presented with its binary context."""

    antigen: int
    context: int


class TissueBuffer:
    """Shared antigen queue plus the signal levels current for this cycle."""

    def __init__(self):
        self.antigen_queue: deque[int] = deque()
        self.current_signals = SignalVector()

    def set_signals(self, signals: SignalVector) -> None:
        self.current_signals = signals

    def add_antigen(self, antigen_ids: Iterable[int]) -> int:
        n = 0
        for a in antigen_ids:
            self.antigen_queue.append(int(a))
            n += 1
        return n

    def __len__(self) -> int:
        return len(self.antigen_queue)


class MCAVTable:
    """Per-type presentation counts and the derived mature-context fraction."""

    def __init__(self):
        self._counts: dict[int, list[int]] = {}

    def add(self, presentation: Presentation) -> None:
        entry = self._counts.setdefault(presentation.antigen, [0, 0])
        entry[0] += presentation.context == ANOMALOUS
        entry[1] += 1

    def mature_count(self, antigen_id: int) -> int:
        return self._counts[antigen_id][0]

    def total_count(self, antigen_id: int) -> int:
        return self._counts[antigen_id][1]

    def mcav(self, antigen_id: int) -> float:
        mature, total = self._counts[antigen_id]
        return mature / total

    def types(self) -> list[int]:
        return sorted(self._counts)

    def __contains__(self, antigen_id: int) -> bool:
        return antigen_id in self._counts

    def __len__(self) -> int:
        return len(self._counts)


def compute_mcav(presentations: Iterable[Presentation]) -> MCAVTable:
    """Cumulative MCAV table over a presentation log (empty log is legal)."""
    table = MCAVTable()
    for p in presentations:
        table.add(p)
    return table


def classify(table: MCAVTable, threshold: float = 0.6) -> dict[int, int]:
    """Label each presented type: mcav <= threshold NORMAL, above ANOMALOUS."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    return {t: (ANOMALOUS if table.mcav(t) > threshold else NORMAL)
            for t in table.types()}


class DCEngine:
    """Tissue plus cell population with the per-cycle update.

    A cycle iterates the cells in a seeded random order. Each cell draws
    up to ``max_antigen_per_cell`` items from the queue, accumulates the
    fused signals (every cycle by default; only on cycles where it
    sampled under the ``on_antigen_only`` policy), and presents/resets
    once its cumulative csm strictly exceeds its threshold. Reset cells
    redraw their threshold from the same uniform range, keeping the
    population diverse over long runs.

    Conservation holds exactly: every antigen copy ever queued is either
    still queued, held by an immature cell, or presented.
    """

    def __init__(self, population_size: int = 100, migration_median: float = 30.0,
                 spread_fraction: float = 0.5,
                 weights: WeightMatrix | None = None,
                 max_antigen_per_cell: int = 1,
                 accumulation: str = "every_cycle",
                 rng: np.random.Generator | int | None = None):
        if max_antigen_per_cell < 1:
            raise ValueError("max_antigen_per_cell must be >= 1")
        if accumulation not in ("every_cycle", "on_antigen_only"):
            raise ValueError(f"unknown accumulation policy {accumulation!r}")
        self.weights = weights if weights is not None else WeightMatrix()
        self.max_antigen_per_cell = max_antigen_per_cell
        self.accumulation = accumulation
        self.rng = (rng if isinstance(rng, np.random.Generator)
                    else np.random.default_rng(rng))
        self._threshold_lo = migration_median * (1.0 - spread_fraction)
        self._threshold_hi = migration_median * (1.0 + spread_fraction)
        self.cells = new_population(population_size, migration_median,
                                    spread_fraction, self.rng)
        self.tissue = TissueBuffer()
        self.antigen_emitted = 0
        self.antigen_presented = 0

    def add_antigen(self, antigen_ids: Iterable[int]) -> None:
        self.antigen_emitted += self.tissue.add_antigen(antigen_ids)

    def set_signals(self, signals: SignalVector) -> None:
        self.tissue.set_signals(signals)

    @property
    def antigen_queued(self) -> int:
        return len(self.tissue)

    @property
    def antigen_held(self) -> int:
        return sum(len(c.antigen_store) for c in self.cells)

    def conservation_holds(self) -> bool:
        return self.antigen_emitted == (self.antigen_queued + self.antigen_held
                                        + self.antigen_presented)

    def cycle(self) -> list[Presentation]:
        """Run one update over the whole population; returns presentations."""
        o_csm, o_semi, o_mat = fuse_signals(self.weights,
                                            self.tissue.current_signals)
        queue = self.tissue.antigen_queue
        presentations: list[Presentation] = []
        order = self.rng.permutation(len(self.cells))
        for idx in order:
            cell = self.cells[idx]
            sampled = False
            for _ in range(self.max_antigen_per_cell):
                if not queue:
                    break
                cell.antigen_store.append(queue.popleft())
                sampled = True
            if self.accumulation == "every_cycle" or sampled:
                cell.cum_csm += o_csm
                cell.cum_semi += o_semi
                cell.cum_mat += o_mat
            if cell.cum_csm > cell.migration_threshold:
                context = maturation_context(cell)
                for a in cell.antigen_store:
                    presentations.append(Presentation(a, context))
                self.antigen_presented += len(cell.antigen_store)
                cell.reset(float(self.rng.uniform(self._threshold_lo,
                                                  self._threshold_hi)))
        return presentations
