"""Experiment orchestration: seeded runs, the migration-median sweep, the
synthetic-stream validation path, and all file output.

A run wires the pieces together at a fixed cadence: the world ticks at
tick_hz; once per cycle_s the sensor outputs are transduced into the three
signals, the localization estimate is encoded into antigen copies, and the
cell engine runs one cycle. MCAV and error rows are emitted at the same
cadence. Every run derives its own seed from (base seed, median, run
index), so runs are individually re-executable and sweeps parallelize
without changing any output byte.
"""

import csv
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from dcasim.antigen import PenGrid, Pose, emit_antigen
from dcasim.engine import (ANOMALOUS, DCEngine, NORMAL, SignalVector,
                           WeightMatrix, DEFAULT_WEIGHTS)
from dcasim.metrics import ErrorRates, compute_truth, error_rates
from dcasim.signals import (DEFAULT_SIGNAL_FOV, RangeLookup, danger_from_sonar,
                            pamp_from_blob, safe_from_lrf)
from dcasim.stream import read_stream
from dcasim.world import (CameraModel, LaserModel, Obstacle, Pen, RobotParams,
                          SensorSuite, SonarModel, WanderParams, World,
                          LASER_MIN_VISIBLE_HEIGHT, default_pen, DEFAULT_START)

log = logging.getLogger(__name__)

DEFAULT_MEDIANS = (15.0, 30.0, 60.0, 120.0, 240.0)
DEFAULT_NOISE_SIGMA = 0.03

TRAJECTORY_HEADER = ("t", "true_x", "true_y", "true_heading",
                     "odom_x", "odom_y", "odom_heading", "v", "theta_dot")
PRESENTATION_HEADER = ("t", "antigen_id", "context")
MCAV_HEADER = ("t", "antigen_id", "mature_count", "total_count", "mcav")
ERROR_HEADER = ("t", "fp_rate", "fn_rate", "n_presented_types")
TRUTH_HEADER = ("antigen_id", "label")
SUMMARY_HEADER = ("median", "t", "mean_fp", "mean_fn")
CLASSIFICATION_HEADER = ("antigen_id", "mcav", "label")


@dataclass
class ExperimentConfig:
    """Everything a sweep needs; defaults reproduce the reference protocol
    (medians 15/30/60/120/240, three repeats, 600 s runs, MCAV threshold
    0.6, thresholds drawn within +/-50% of the median)."""

    medians: list[float] = field(default_factory=lambda: list(DEFAULT_MEDIANS))
    runs_per_median: int = 3
    duration_s: float = 600.0
    mcav_threshold: float = 0.6
    population_size: int = 100
    migration_spread: float = 0.5
    max_antigen_per_cell: int = 1
    accumulation: str = "every_cycle"
    weights: list = field(default_factory=lambda: [list(r) for r in DEFAULT_WEIGHTS])
    pen_file: str | None = None
    noise_sigma: float | None = None
    perfect_localization: bool = False
    base_seed: int = 20211
    out_dir: str = "runs"
    tick_hz: float = 10.0
    cycle_s: float = 1.0
    range_table: list | None = None

    def validate(self) -> None:
        if not self.medians or any(m <= 0 for m in self.medians):
            raise ValueError("medians must be a non-empty list of positives")
        if self.runs_per_median < 1:
            raise ValueError("runs_per_median must be >= 1")
        if self.duration_s < 0:
            raise ValueError("duration_s must be >= 0")
        if not 0.0 <= self.mcav_threshold <= 1.0:
            raise ValueError("mcav_threshold must be in [0, 1]")
        if self.tick_hz <= 0 or self.cycle_s <= 0:
            raise ValueError("tick_hz and cycle_s must be > 0")
        WeightMatrix(self.weights)
        if self.range_table is not None:
            RangeLookup(tuple((float(d), float(s)) for d, s in self.range_table))
        if self.noise_sigma is not None and self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def to_dict(self) -> dict:
        return {
            "medians": list(self.medians),
            "runs_per_median": self.runs_per_median,
            "duration_s": self.duration_s,
            "mcav_threshold": self.mcav_threshold,
            "population_size": self.population_size,
            "migration_spread": self.migration_spread,
            "max_antigen_per_cell": self.max_antigen_per_cell,
            "accumulation": self.accumulation,
            "weights": [list(r) for r in self.weights],
            "pen_file": self.pen_file,
            "noise_sigma": self.noise_sigma,
            "perfect_localization": self.perfect_localization,
            "base_seed": self.base_seed,
            "out_dir": self.out_dir,
            "tick_hz": self.tick_hz,
            "cycle_s": self.cycle_s,
            "range_table": self.range_table,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass(frozen=True)
class WorldSetup:
    """A pen file resolved into constructor-ready pieces."""

    pen: Pen
    start: Pose
    sensors: SensorSuite
    wander: WanderParams
    robot: RobotParams
    noise_sigma: float | None


def load_pen_file(path) -> WorldSetup:
    """Parse a pen configuration JSON file (all sections optional)."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    obstacles = [Obstacle(o["x"], o["y"], o["radius"], o["height"],
                          bool(o.get("pink", False)))
                 for o in data.get("obstacles", [])]
    base = default_pen()
    pen = Pen(data.get("width", base.width), data.get("height", base.height),
              obstacles if "obstacles" in data else base.obstacles,
              data.get("wall_height", base.wall_height))
    s = data.get("start", {})
    start = Pose(s.get("x", DEFAULT_START.x), s.get("y", DEFAULT_START.y),
                 math.radians(s.get("heading_deg", 0.0)))
    sensors = _sensors_from_dict(data.get("sensors", {}))
    wander = _from_dict(WanderParams, data.get("wander", {}))
    robot = _from_dict(RobotParams, data.get("robot", {}))
    return WorldSetup(pen, start, sensors, wander, robot,
                      data.get("noise_sigma"))


def _from_dict(cls, data: dict):
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**data)


def _sensors_from_dict(data: dict) -> SensorSuite:
    laser = data.get("laser", {})
    sonar = data.get("sonar", {})
    camera = data.get("camera", {})
    return SensorSuite(
        laser=LaserModel(
            half_span=math.radians(laser.get("half_span_deg", 90.0)),
            step=math.radians(laser.get("step_deg", 1.0)),
            max_range=laser.get("max_range", LaserModel.max_range),
            min_visible_height=laser.get("min_visible_height",
                                         LASER_MIN_VISIBLE_HEIGHT)),
        sonar=SonarModel(
            n_transducers=sonar.get("n_transducers", 16),
            cone_half_angle=math.radians(sonar.get("cone_half_angle_deg", 15.0)),
            rays_per_cone=sonar.get("rays_per_cone", 7),
            max_range=sonar.get("max_range", SonarModel.max_range)),
        camera=CameraModel(
            half_fov=math.radians(camera.get("half_fov_deg", 30.0)),
            gain=camera.get("gain", 1.0),
            min_area=camera.get("min_area", CameraModel.min_area)))


def default_pamp_scale(pen: Pen, camera: CameraModel, d_stop: float) -> float:
    """Scale mapping the largest anomalous blob at stopping distance to 100.

    Falls back to the largest pink blob when no short pink cylinder
    exists, and to 1.0 in a pen without pink geometry.
    """
    candidates = [ob for ob in pen.obstacles
                  if ob.is_pink and ob.height < LASER_MIN_VISIBLE_HEIGHT]
    if not candidates:
        candidates = [ob for ob in pen.obstacles if ob.is_pink]
    if not candidates:
        return 1.0
    area = max(camera.gain * 2.0 * ob.radius * ob.height / d_stop ** 2
               for ob in candidates)
    return 100.0 / area


def derive_run_seed(base_seed: int, median: float, run_index: int) -> int:
    """Stable per-(median, run) seed: sha256 of the pair XOR the base seed."""
    digest = hashlib.sha256(f"{median!r}/{run_index}".encode()).digest()
    return (base_seed ^ int.from_bytes(digest[:8], "big")) & (2 ** 64 - 1)


@dataclass
class RunResult:
    median: float
    run_index: int
    seed: int
    run_dir: str
    error_rows: list
    final: ErrorRates
    n_presentations: int
    conservation_violations: int
    blocked_ticks: int
    dropped_emissions: int


def _resolve(config: ExperimentConfig):
    if config.pen_file is not None:
        setup = load_pen_file(config.pen_file)
    else:
        setup = WorldSetup(default_pen(), DEFAULT_START, SensorSuite(),
                           WanderParams(), RobotParams(), None)
    noise = config.noise_sigma
    if noise is None:
        noise = setup.noise_sigma if setup.noise_sigma is not None \
            else DEFAULT_NOISE_SIGMA
    table = (RangeLookup(tuple((float(d), float(s)) for d, s in config.range_table))
             if config.range_table is not None else RangeLookup())
    return setup, noise, table


def median_label(median: float) -> str:
    return f"M{median:g}"


def run_single(config: ExperimentConfig, median: float,
               run_index: int) -> RunResult:
    """One seeded run; writes its five CSVs plus the effective config."""
    config.validate()
    if median <= 0:
        raise ValueError(f"median must be > 0, got {median}")
    setup, noise_sigma, range_table = _resolve(config)
    seed = derive_run_seed(config.base_seed, median, run_index)
    ss_engine, ss_world = np.random.SeedSequence(seed).spawn(2)
    world = World(setup.pen, setup.start, setup.sensors, setup.wander,
                  setup.robot, noise_sigma, np.random.default_rng(ss_world))
    engine = DCEngine(config.population_size, median, config.migration_spread,
                      WeightMatrix(config.weights), config.max_antigen_per_cell,
                      config.accumulation, np.random.default_rng(ss_engine))
    grid = PenGrid(setup.pen.width, setup.pen.height)
    truth = compute_truth(setup.pen, grid)
    pamp_scale = default_pamp_scale(setup.pen, setup.sensors.camera,
                                    setup.wander.d_stop)

    dt = 1.0 / config.tick_hz
    ticks_per_cycle = max(1, round(config.cycle_s * config.tick_hz))
    n_ticks = round(config.duration_s * config.tick_hz)

    traj_rows = [(0.0, world.true_pose.x, world.true_pose.y,
                  world.true_pose.heading, world.odom_pose.x,
                  world.odom_pose.y, world.odom_pose.heading,
                  world.v, world.theta_dot)]
    pres_rows: list[tuple] = []
    mcav_rows: list[tuple] = []
    error_rows: list[tuple] = []
    counts: dict[int, list[int]] = {}
    conservation_violations = 0
    dropped = 0
    final = ErrorRates(0.0, 0.0, 0, 0)

    for i in range(n_ticks):
        world.step(dt)
        t = (i + 1) / config.tick_hz
        traj_rows.append((t, world.true_pose.x, world.true_pose.y,
                          world.true_pose.heading, world.odom_pose.x,
                          world.odom_pose.y, world.odom_pose.heading,
                          world.v, world.theta_dot))
        if (i + 1) % ticks_per_cycle:
            continue

        lrf = world.lrf_scan()
        sonar = world.sonar_scan()
        signals = SignalVector(
            pamp=pamp_from_blob(world.camera_blob(), pamp_scale),
            danger=danger_from_sonar(sonar, DEFAULT_SIGNAL_FOV, range_table),
            safe=safe_from_lrf(lrf, DEFAULT_SIGNAL_FOV, range_table))
        pose = world.true_pose if config.perfect_localization else world.odom_pose
        copies = emit_antigen(pose, world.v, world.theta_dot, grid,
                              setup.robot.v_max, setup.robot.theta_dot_max)
        dropped += not copies
        engine.add_antigen(copies)
        engine.set_signals(signals)
        presented = engine.cycle()
        conservation_violations += not engine.conservation_holds()

        for p in presented:
            pres_rows.append((t, p.antigen, p.context))
            entry = counts.setdefault(p.antigen, [0, 0])
            entry[0] += p.context == ANOMALOUS
            entry[1] += 1
        predicted = {}
        for a in sorted(counts):
            mature, total = counts[a]
            mcav = mature / total
            mcav_rows.append((t, a, mature, total, mcav))
            predicted[a] = ANOMALOUS if mcav > config.mcav_threshold else NORMAL
        final = error_rates(predicted, truth, predicted.keys())
        error_rows.append((t, final.fp_rate, final.fn_rate, len(predicted)))

    run_dir = os.path.join(config.out_dir, median_label(median),
                           f"run{run_index}")
    os.makedirs(run_dir, exist_ok=True)
    _write_csv(os.path.join(run_dir, "trajectory.csv"),
               TRAJECTORY_HEADER, traj_rows)
    _write_csv(os.path.join(run_dir, "presentations.csv"),
               PRESENTATION_HEADER, pres_rows)
    _write_csv(os.path.join(run_dir, "mcav.csv"), MCAV_HEADER, mcav_rows)
    _write_csv(os.path.join(run_dir, "error_series.csv"),
               ERROR_HEADER, error_rows)
    _write_csv(os.path.join(run_dir, "truth.csv"), TRUTH_HEADER,
               [(a, int(truth[a])) for a in range(grid.n_types)])
    replace(config, out_dir=run_dir).write_json(
        os.path.join(run_dir, "effective_config.json"))

    log.info("%s run %d: %d presentations, final fp=%.4f fn=%.4f",
             median_label(median), run_index, len(pres_rows),
             final.fp_rate, final.fn_rate)
    return RunResult(median, run_index, seed, run_dir, error_rows, final,
                     len(pres_rows), conservation_violations,
                     world.blocked_ticks, dropped)


def _run_job(config_dict: dict, median: float, run_index: int) -> RunResult:
    return run_single(ExperimentConfig.from_dict(config_dict), median, run_index)


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[RunResult]:
    """All (median, run) combinations plus the averaged summary CSV.

    Outputs are a pure function of (config, base seed): runs have
    independent derived seeds and write disjoint files, so parallel
    dispatch cannot change any byte.
    """
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    config.write_json(os.path.join(config.out_dir, "effective_config.json"))
    jobs = [(median, run_index) for median in config.medians
            for run_index in range(config.runs_per_median)]
    results: dict[tuple, RunResult] = {}
    if workers > 1:
        cfg = config.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {(m, r): pool.submit(_run_job, cfg, m, r)
                       for m, r in jobs}
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for m, r in jobs:
            results[(m, r)] = run_single(config, m, r)

    summary_rows = []
    for median in config.medians:
        runs = [results[(median, r)] for r in range(config.runs_per_median)]
        if not runs[0].error_rows:
            continue
        stacked = np.array([[row[1:3] for row in r.error_rows] for r in runs])
        means = stacked.mean(axis=0)
        for row, (mean_fp, mean_fn) in zip(runs[0].error_rows, means):
            summary_rows.append((median_label(median), row[0],
                                 float(mean_fp), float(mean_fn)))
    _write_csv(os.path.join(config.out_dir, "summary.csv"),
               SUMMARY_HEADER, summary_rows)
    return [results[key] for key in jobs]


@dataclass
class SyntheticResult:
    out_dir: str
    presentations: list
    mcav: dict[int, float]
    classification: dict[int, int]


def run_synthetic(config: ExperimentConfig, stream_path) -> SyntheticResult:
    """Feed a stream file straight into the engine, no simulator involved.

    Uses the first configured median for the population. Writes the
    presentation log, the per-record MCAV series, and the final
    classification.
    """
    config.validate()
    records = read_stream(stream_path)
    median = config.medians[0]
    seed = derive_run_seed(config.base_seed, median, 0)
    engine = DCEngine(config.population_size, median, config.migration_spread,
                      WeightMatrix(config.weights), config.max_antigen_per_cell,
                      config.accumulation, np.random.default_rng(
                          np.random.SeedSequence(seed).spawn(1)[0]))
    pres_rows: list[tuple] = []
    mcav_rows: list[tuple] = []
    counts: dict[int, list[int]] = {}
    for rec in records:
        expanded = [a for a, n in rec.antigen for _ in range(n)]
        engine.add_antigen(expanded)
        engine.set_signals(rec.signals)
        for p in engine.cycle():
            pres_rows.append((rec.t, p.antigen, p.context))
            entry = counts.setdefault(p.antigen, [0, 0])
            entry[0] += p.context == ANOMALOUS
            entry[1] += 1
        for a in sorted(counts):
            mature, total = counts[a]
            mcav_rows.append((rec.t, a, mature, total, mature / total))

    mcav = {a: m / t for a, (m, t) in sorted(counts.items())}
    classification = {a: (ANOMALOUS if v > config.mcav_threshold else NORMAL)
                      for a, v in mcav.items()}
    out_dir = os.path.join(config.out_dir, "synthetic")
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(os.path.join(out_dir, "presentations.csv"),
               PRESENTATION_HEADER, pres_rows)
    _write_csv(os.path.join(out_dir, "mcav.csv"), MCAV_HEADER, mcav_rows)
    _write_csv(os.path.join(out_dir, "classification.csv"),
               CLASSIFICATION_HEADER,
               [(a, mcav[a], label) for a, label in classification.items()])
    replace(config, out_dir=out_dir).write_json(
        os.path.join(out_dir, "effective_config.json"))
    return SyntheticResult(out_dir, pres_rows, mcav, classification)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
