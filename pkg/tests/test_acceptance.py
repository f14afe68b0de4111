"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the criterion
lines. The default sweep fixtures are session-scoped; the whole module
exercises the full default protocol (5 medians x 3 runs x 600 s) twice,
once serial and once under parallel dispatch.
"""

import csv
import math
import time
from pathlib import Path

import numpy as np
import pytest

from dcasim.antigen import multiplicity
from dcasim.experiment import ExperimentConfig, run_single, run_sweep, run_synthetic
from dcasim.signals import RangeLookup, strength_from_distance
from dcasim.world import World, default_pen


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num}] {name}: {status}" + (f" ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def default_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep_serial")
    cfg = ExperimentConfig(out_dir=str(out))
    t0 = time.perf_counter()
    results = run_sweep(cfg, workers=1)
    elapsed = time.perf_counter() - t0
    return cfg, results, elapsed


@pytest.fixture(scope="session")
def parallel_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep_parallel")
    cfg = ExperimentConfig(out_dir=str(out))
    results = run_sweep(cfg, workers=3)
    return cfg, results


def summary_by_median(cfg):
    with open(Path(cfg.out_dir) / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    table = {}
    for row in rows:
        table.setdefault(row["median"], {})[float(row["t"])] = (
            float(row["mean_fp"]), float(row["mean_fn"]))
    return table


def test_criterion_1_engine_separation(tmp_path):
    """Synthetic streams: safe-only types stay low, pamp/danger-only high,
    for every migration median."""
    lines = []
    for t in range(500):
        if (t // 50) % 2 == 0:
            lines.append(f"{t + 1},0,0,100,0*3;1*3")
        else:
            lines.append(f"{t + 1},100,50,0,2*2;3*2;4*2")
    stream = tmp_path / "stream.txt"
    stream.write_text("\n".join(lines) + "\n")

    t0 = time.perf_counter()
    failures = []
    for median in (15.0, 30.0, 60.0, 120.0, 240.0):
        cfg = ExperimentConfig(medians=[median],
                               out_dir=str(tmp_path / f"M{median:g}"))
        result = run_synthetic(cfg, stream)
        counts = {}
        for _, antigen_id, _ in result.presentations:
            counts[antigen_id] = counts.get(antigen_id, 0) + 1
        for antigen_id in range(5):
            if counts.get(antigen_id, 0) < 100:
                failures.append(f"M{median:g}: type {antigen_id} presented "
                                f"{counts.get(antigen_id, 0)} < 100 times")
        for antigen_id in (0, 1):
            if not result.mcav[antigen_id] <= 0.1:
                failures.append(f"M{median:g}: mcav({antigen_id})="
                                f"{result.mcav[antigen_id]:.3f} > 0.1")
        for antigen_id in (2, 3, 4):
            if not result.mcav[antigen_id] >= 0.9:
                failures.append(f"M{median:g}: mcav({antigen_id})="
                                f"{result.mcav[antigen_id]:.3f} < 0.9")
    elapsed = time.perf_counter() - t0
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.2f} s >= 5 s")
    report(1, "engine separation", not failures, f"{elapsed:.2f} s")
    assert not failures, failures


def test_criterion_2_multiplicity_bounds():
    """Exact bounds of the antigen multiplication function."""
    t0 = time.perf_counter()
    ok = multiplicity(400.0, 1.5, 400.0, 1.5) == 2
    ok &= multiplicity(0.0, 0.0, 400.0, 1.5) == 102
    for v in np.linspace(-400.0, 400.0, 101):
        for w in np.linspace(-1.5, 1.5, 101):
            ok &= 2 <= multiplicity(float(v), float(w), 400.0, 1.5) <= 102
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    report(2, "multiplication bounds", ok, f"{elapsed:.2f} s")
    assert ok


def test_criterion_3_lookup_fidelity():
    """Lookup-table knots exact, interpolated midpoint, monotone sweep."""
    table = RangeLookup()
    ok = all(strength_from_distance(table, d) == s
             for d, s in ((0, 100), (300, 90), (600, 50), (900, 20), (1200, 0)))
    ok &= strength_from_distance(table, 450) == pytest.approx(70.0)
    prev = math.inf
    for mm in range(0, 2001):
        s = strength_from_distance(table, float(mm))
        ok &= s <= prev + 1e-12
        prev = s
    report(3, "lookup table fidelity", ok)
    assert ok


def test_criterion_4_conservation(tmp_path):
    """Exact antigen conservation, checked at every cycle of a full run."""
    cfg = ExperimentConfig(out_dir=str(tmp_path / "conservation"))
    result = run_single(cfg, 30.0, 0)
    n_cycles = len(result.error_rows)
    ok = result.conservation_violations == 0 and n_cycles == 600
    report(4, "antigen conservation", ok,
           f"{n_cycles} cycles, {result.conservation_violations} violations")
    assert ok


def test_criterion_5_determinism(default_sweep, parallel_sweep):
    """Serial and parallel sweeps with one base seed are byte-identical."""
    cfg_s, _, _ = default_sweep
    cfg_p, _ = parallel_sweep
    serial = sorted(Path(cfg_s.out_dir).rglob("*.csv"))
    parallel = sorted(Path(cfg_p.out_dir).rglob("*.csv"))
    rel_s = [p.relative_to(cfg_s.out_dir) for p in serial]
    rel_p = [p.relative_to(cfg_p.out_dir) for p in parallel]
    ok = rel_s == rel_p and len(serial) == 5 * 3 * 5 + 1
    mismatched = []
    for a, b in zip(serial, parallel):
        if a.read_bytes() != b.read_bytes():
            mismatched.append(str(a.relative_to(cfg_s.out_dir)))
            ok = False
    report(5, "sweep determinism", ok,
           f"{len(serial)} files" + (f"; mismatches: {mismatched}" if mismatched else ""))
    assert ok, mismatched


def test_criterion_6_qualitative_trends(default_sweep):
    """Median-sweep trends: M30 beats M240 on final fp, early fp is low
    everywhere, M15 is noisier than M30 overall; sweep under 5 minutes."""
    cfg, _, elapsed = default_sweep
    table = summary_by_median(cfg)
    finals = {m: table[m][600.0] for m in table}
    firsts = {m: table[m][60.0] for m in table}
    a = finals["M30"][0] < finals["M240"][0]
    b = all(firsts[m][0] < 0.2 for m in firsts)
    c = sum(finals["M15"]) > sum(finals["M30"])
    runtime_ok = elapsed < 300.0
    ok = a and b and c and runtime_ok
    report(6, "qualitative trend reproduction", ok,
           f"fp30={finals['M30'][0]:.3f} fp240={finals['M240'][0]:.3f}, "
           f"max fp@60={max(v[0] for v in firsts.values()):.3f}, "
           f"t15={sum(finals['M15']):.3f} t30={sum(finals['M30']):.3f}, "
           f"sweep {elapsed:.0f} s")
    assert a, "final fp(M30) must be below final fp(M240)"
    assert b, "every median's fp at the first reporting minute must be < 0.2"
    assert c, "M15 total error must exceed M30 total error"
    assert runtime_ok, f"sweep took {elapsed:.0f} s"


def test_criterion_7_drift_effect(default_sweep, tmp_path):
    """Cumulative total error grows from 120 s to 600 s under default
    drift noise; with zero noise, conservation and determinism still hold."""
    cfg, _, _ = default_sweep
    table = summary_by_median(cfg)
    t120 = sum(table["M30"][120.0])
    t600 = sum(table["M30"][600.0])
    trend_ok = t600 >= t120

    cfg_a = ExperimentConfig(noise_sigma=0.0, out_dir=str(tmp_path / "nz_a"))
    cfg_b = ExperimentConfig(noise_sigma=0.0, out_dir=str(tmp_path / "nz_b"))
    ra = run_single(cfg_a, 30.0, 0)
    rb = run_single(cfg_b, 30.0, 0)
    zero_noise_ok = ra.conservation_violations == 0
    for name in ("trajectory.csv", "presentations.csv", "mcav.csv",
                 "error_series.csv"):
        zero_noise_ok &= (Path(ra.run_dir) / name).read_bytes() \
            == (Path(rb.run_dir) / name).read_bytes()
    with open(Path(ra.run_dir) / "trajectory.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            zero_noise_ok &= row["true_x"] == row["odom_x"]
            zero_noise_ok &= row["true_heading"] == row["odom_heading"]

    ok = trend_ok and zero_noise_ok
    report(7, "dead-reckoning drift effect", ok,
           f"total@120={t120:.3f} total@600={t600:.3f}, "
           f"zero-noise suites {'ok' if zero_noise_ok else 'broken'}")
    assert trend_ok, f"cumulative total error fell: {t600:.3f} < {t120:.3f}"
    assert zero_noise_ok


def test_criterion_8_wander_safety():
    """Ten seeded 600 s runs with zero collisions."""
    collisions = 0
    for seed in range(10):
        world = World(default_pen(), rng=np.random.default_rng(1000 + seed))
        for _ in range(6000):
            world.step(0.1)
            if world.clearance() < -1e-9:
                collisions += 1
    ok = collisions == 0
    report(8, "wander safety", ok, f"{collisions} collisions in 10 runs")
    assert ok
