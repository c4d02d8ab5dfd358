"""Acceptance criteria, one test each, at the stated tolerances and runtime budgets.

Every test records a ``[PASS]`` / ``[FAIL]`` line that is printed in the
terminal summary (see conftest.py), whether or not the assertion holds.
"""

import filecmp
import math
import time
from pathlib import Path

import numpy as np
import pytest

from echonav.acoustics import MagnitudeScan, ScanConfig, resolution
from echonav.control import ControllerState, OAParams, raw_policy, step
from echonav.control import ControlCommand
from echonav.dsp import Detection, FilterState, detect_closest, slow_time_update, state_size_bytes
from echonav.experiments import ExperimentSpec, run
from echonav.sim import DroneState, kinematics_step

SILENT = {"noise.floor_std_unfiltered": "0", "noise.outlier_prob": "0"}


def verdict(log, number, title, ok, detail):
    log.append(f"[{'PASS' if ok else 'FAIL'}] #{number:<2} {title}: {detail}")
    assert ok, detail


class Timed:
    def __init__(self, fn):
        start = time.perf_counter()
        self.value = fn()
        self.seconds = time.perf_counter() - start


def _specs(root: Path):
    return {
        "noise": ExperimentSpec("noise", seeds=(0,), output_dir=root / "noise"),
        "characterize_90": ExperimentSpec("characterize", env_path="wall_90", output_dir=root / "char90"),
        "characterize_45": ExperimentSpec("characterize", env_path="wall_45", output_dir=root / "char45"),
        "explore": ExperimentSpec("explore", env_path="office", seeds=tuple(range(10)), output_dir=root / "explore"),
        "corridor": ExperimentSpec("corridor", env_path="corridor", output_dir=root / "corridor"),
        "calibrate": ExperimentSpec("calibrate", output_dir=root / "calibrate"),
    }


@pytest.fixture(scope="module")
def campaign(tmp_path_factory):
    """Run each experiment once with outputs on disk; results and wall-clock times are shared."""
    root = tmp_path_factory.mktemp("first")
    specs = _specs(root)
    runs = {name: Timed(lambda s=spec: run(s)) for name, spec in specs.items()}
    return root, specs, runs


def test_01_resolution_and_range(acceptance_log):
    cfg = ScanConfig()
    res_cm = resolution(cfg) * 100
    ok = 1.35 <= res_cm <= 1.38 and 4.55 <= cfg.max_range <= 4.70
    verdict(
        acceptance_log, 1, "resolution/range", ok,
        f"resolution {res_cm:.4f} cm in [1.35, 1.38], max range {cfg.max_range:.4f} m in [4.55, 4.70]",
    )


def test_02_ema_noise_reduction(acceptance_log, campaign):
    _, specs, runs = campaign
    rows = {(r.k_slow, r.k_fast): r for r in runs["noise"].value}
    base, ema = rows[(1, 1)], rows[(3, 1)]
    n_scans = specs["noise"].knob("noise_exp.scans")
    ratio = ema.std / base.std
    ok = (
        n_scans >= 10_000
        and abs(ratio - 0.447) <= 0.045
        and abs(ema.mean - 1700) <= 0.02 * 1700
        and runs["noise"].seconds < 10
    )
    verdict(
        acceptance_log, 2, "EMA reduction", ok,
        f"{n_scans} scans, std ratio {ratio:.4f} (0.447 +/- 0.045), filtered mean {ema.mean:.1f} AU "
        f"(1700 +/- 2%), {runs['noise'].seconds:.1f} s (< 10 s)",
    )


def test_03_memory_budget(acceptance_log):
    n = state_size_bytes(ScanConfig())
    verdict(acceptance_log, 3, "memory budget", n == 1400, f"state_size_bytes = {n} (== 1400)")


def test_04_controller_table(acceptance_log):
    p = OAParams()
    table = {
        0.30: raw_policy(0.30, p),
        0.60: raw_policy(0.60, p),
        None: raw_policy(None, p),
        0.80: raw_policy(0.80, p),
    }
    expected = {0.30: (0.0, 83.25), 0.60: (0.15, 41.625), None: (1.15, 0.0), 0.80: (0.20, 0.0)}
    # 41.625 is reached through (0.8 - 0.6) / 0.4, one rounding step away in binary
    table_ok = all(
        table[d][0] == expected[d][0] and abs(table[d][1] - expected[d][1]) <= 1e-12 for d in expected
    )

    s = ControllerState()
    rng = np.random.default_rng(0)
    ticks = 0
    while True:
        ticks += 1
        if step(s, Detection(), p, 0.030, rng).forward_velocity >= p.max_velocity:
            break
    yaw_deg = math.degrees(kinematics_step(DroneState(), ControlCommand(0.0, p.max_yaw_rate), 0.030).heading)

    ok = table_ok and ticks == 23 and abs(yaw_deg - 2.4975) <= 1e-12
    verdict(
        acceptance_log, 4, "controller table", ok,
        f"policy {table}, ramp {ticks} ticks (== 23), heading step {yaw_deg:.6f} deg (== 2.4975)",
    )


def test_05_characterization(acceptance_log, campaign):
    _, specs, runs = campaign
    c90, c45 = runs["characterize_90"].value, runs["characterize_45"].value
    seconds = runs["characterize_90"].seconds + runs["characterize_45"].seconds
    ringdown = ScanConfig().ringdown_samples

    rates = {d: c90.detection_rate(d) for d in c90.distances}
    near = {d: r for d, r in rates.items() if d <= 2.5 + 1e-9}
    rates_ok = len(near) == 5 and all(r >= 0.95 for r in near.values())
    scans_ok = all(len(c90.detections[d]) == 100 for d in c90.distances)
    sweep_ok = c90.distances == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] and c45.distances == c90.distances

    offsets45 = {d: c45.peak_index(d, ringdown) - c45.expected_index(d) for d in c45.distances}
    peaks_ok = all(abs(v) <= 2 for v in offsets45.values())
    ok = rates_ok and scans_ok and sweep_ok and peaks_ok and abs(c90.angle_deg - 90) < 1e-9 and seconds < 30

    rate_txt = ", ".join(f"{d:g} m: {r:.2f}" for d, r in near.items())
    verdict(
        acceptance_log, 5, "characterization", ok,
        f"90 deg detect rates <= 2.5 m [{rate_txt}] (>= 0.95); 45 deg peak offsets {list(offsets45.values())} "
        f"samples (|.| <= 2); {seconds:.1f} s (< 30 s)",
    )


def test_06_glass_parity(acceptance_log):
    common = {**SILENT, "char.scans": "3"}
    concrete = run(ExperimentSpec("characterize", env_path="wall_90", overrides=common))
    glass = run(ExperimentSpec("characterize", env_path="wall_90_glass", overrides=common))
    label_c, label_g = concrete.material_label, glass.material_label
    same_refl = label_c.split(" ", 1)[1] == label_g.split(" ", 1)[1] and label_g.startswith("glass")
    identical = all(
        np.array_equal(concrete.profiles[d][k], glass.profiles[d][k])
        for d in concrete.distances
        for k in ("mean", "min", "max")
    )
    verdict(
        acceptance_log, 6, "glass parity", same_refl and identical,
        f"{label_g!r} vs {label_c!r}, noise-free profiles identical at {len(concrete.distances)} distances: {identical}",
    )


def test_07_head_to_head_exploration(acceptance_log, campaign):
    _, specs, runs = campaign
    result, seconds = runs["explore"].value, runs["explore"].seconds
    us, tof = result.tables["us"], result.tables["tof"]
    ratio = result.ratio()
    ok = len(us) == 10 and len(tof) == 10 and tof.crash_rate >= 0.90 and ratio >= 5.0 and seconds < 120
    verdict(
        acceptance_log, 7, "head-to-head exploration", ok,
        f"ToF crash rate {100 * tof.crash_rate:.0f}% (>= 90%), US {us.mean_distance:.1f} m vs ToF "
        f"{tof.mean_distance:.1f} m = {ratio:.2f}x (>= 5x), US crash rate {100 * us.crash_rate:.0f}%, "
        f"{seconds:.1f} s (< 120 s)",
    )


def test_08_corridor(acceptance_log, campaign):
    _, specs, runs = campaign
    result, seconds = runs["corridor"].value, runs["corridor"].seconds
    stats = result.by_region()

    def section(name):
        region = next(r for r in result.regions if r.name == name)
        return np.flatnonzero((result.x >= region.x_min) & (result.x <= region.x_max))

    glass = section("glass")
    tof_absent = all(result.tof_distance[i] is None for i in glass)
    us_rate = float(np.mean([result.us_distance[i] is not None for i in glass]))
    soft_peak = result.us_peak[section("soft")].max()
    concrete_peak = result.us_peak[section("concrete")].max()
    ok = glass.size > 0 and tof_absent and us_rate >= 0.90 and soft_peak < concrete_peak and seconds < 10
    verdict(
        acceptance_log, 8, "corridor", ok,
        f"glass: ToF absent every tick {tof_absent} over {glass.size} ticks, US present {100 * us_rate:.0f}% "
        f"(>= 90%); soft peak {soft_peak:.0f} AU < concrete peak {concrete_peak:.0f} AU "
        f"(means {stats['soft']['us_peak']:.0f} / {stats['concrete']['us_peak']:.0f}); {seconds:.1f} s (< 10 s)",
    )


def test_09_determinism(acceptance_log, campaign, tmp_path):
    first_root, _, _ = campaign
    second = _specs(tmp_path)
    for spec in second.values():
        run(spec)
    compared, mismatched = 0, []
    for name, spec in _specs(first_root).items():
        a, b = spec.output_dir, second[name].output_dir
        names_a = sorted(p.name for p in a.iterdir())
        names_b = sorted(p.name for p in b.iterdir())
        if names_a != names_b:
            mismatched.append(f"{name}: file sets differ")
            continue
        _, diff, errors = filecmp.cmpfiles(a, b, names_a, shallow=False)
        mismatched += [f"{name}/{f}" for f in diff + errors]
        compared += len(names_a)
    ok = compared > 0 and not mismatched
    verdict(
        acceptance_log, 9, "determinism", ok,
        f"{compared} output files (CSV, JSON, PNG) across 6 runs re-generated byte-identically; mismatches {mismatched}",
    )


def test_10_property_suites(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    p = OAParams()

    # slew limit over a fuzzed stream of 1e5 detections
    n = 100_000
    absent = rng.random(n) < 0.3
    dists = rng.uniform(0.0, 5.0, n)
    s, ctl_rng, prev, worst = ControllerState(), np.random.default_rng(1), 0.0, -math.inf
    for k in range(n):
        cmd = step(s, Detection() if absent[k] else Detection(float(dists[k])), p, 0.030, ctl_rng)
        worst = max(worst, cmd.forward_velocity - prev)
        prev = cmd.forward_velocity
    slew_ok = worst <= p.accel_limit + 1e-12

    # threshold monotonicity over 1e4 random scans
    cfg = ScanConfig()
    violations = 0
    for _ in range(10_000):
        x = rng.integers(0, 20_000, cfg.num_samples).astype(np.uint16)
        t1 = float(rng.uniform(1.0, 20_000.0))
        t2 = t1 + float(rng.uniform(0.0, 10_000.0))
        lo = detect_closest(MagnitudeScan(x), t1, cfg)
        hi = detect_closest(MagnitudeScan(x), t2, cfg)
        if hi.present and (not lo.present or hi.distance < lo.distance):
            violations += 1

    # EMA fixed point on constant input
    converged = True
    for k_slow in (2, 3, 5, 16):
        for c in (0, 1700, 6001, 65535):
            state = FilterState(np.full(cfg.num_samples, float(rng.integers(0, 65536))), np.zeros(0), True)
            for _ in range(1000):
                out = slow_time_update(state, np.full(cfg.num_samples, c), k_slow)
            converged &= bool(np.all(out.samples == c))

    seconds = time.perf_counter() - start
    ok = slew_ok and violations == 0 and converged and seconds < 30
    verdict(
        acceptance_log, 10, "property suites", ok,
        f"max velocity increase {worst:.6f} <= 0.05 over {n} steps; {violations} monotonicity violations in "
        f"10000 scans; EMA fixed point reached: {converged}; {seconds:.1f} s (< 30 s)",
    )
