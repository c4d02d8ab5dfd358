"""Experiment families driven by the command line.

Each ``run_*`` function takes an :class:`ExperimentSpec`, computes its result
in memory, writes CSV (and optionally PNG) files to ``spec.output_dir`` and
returns the result object for programmatic use.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io as csvio
from .acoustics import (
    EchoModel,
    Environment,
    NoiseModel,
    ScanConfig,
    Segment,
    CONCRETE,
    load_calibration,
    motor_noise_only_scan,
    resolution,
    synthesize_scan,
)
from .control import OAParams
from .dsp import EchoProcessor, FilterParams, FilterState, fast_time_filter, slow_time_update
from .envfile import Region, Scene, SceneError, resolve_scene
from .geometry import closest_in_cone
from .sim import (
    SENSOR_KINDS,
    DroneState,
    FlightParams,
    LoopTiming,
    TofConfig,
    run_flight,
    tof_measure,
)

log = logging.getLogger(__name__)

KINDS = ("noise", "characterize", "explore", "corridor", "calibrate")
DEFAULT_SCENES = {"characterize": "wall_90", "explore": "office", "corridor": "corridor"}

SECTION_TYPES = {
    "scan": ScanConfig,
    "noise": NoiseModel,
    "echo": EchoModel,
    "filter": FilterParams,
    "oa": OAParams,
    "timing": LoopTiming,
    "tof": TofConfig,
}

KNOBS = {
    "flight.battery_limit": 440.0,
    "flight.drone_radius": 0.06,
    "noise_exp.scans": 10_000,
    "noise_exp.configs": "1x1,1x3,3x1,5x1",
    "char.scans": 100,
    "char.distances": "0.5:4.0:0.5",
    "char.tolerance_samples": 2,
    "corridor.speed": 0.1,
    "corridor.end_x": "",
    "corridor.waterfall_every": 5,
    "explore.logs": 1,
    "calib.distance": 4.0,
    "calib.target": 8000.0,
    "calib.tolerance": 50.0,
}


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


class CalibrationError(RuntimeError):
    """Amplitude search failed to converge (exit code 3)."""


# --------------------------------------------------------------------------
# configuration


def parse_seeds(text) -> tuple[int, ...]:
    """``"0-9"``, ``"1,4,7"`` or a mix such as ``"0-2,10"``."""
    if isinstance(text, (list, tuple)):
        return tuple(int(s) for s in text)
    seeds: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"bad seed list {text!r}") from exc
    if not seeds:
        raise ConfigError("seed list is empty")
    return tuple(seeds)


def parse_assignment(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def load_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = parse_assignment(line)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{n}: {exc}") from exc
        out[key] = value
    return out


def _coerce(value, like, key):
    if isinstance(value, str) and not isinstance(like, str):
        try:
            if isinstance(like, bool):
                return value.lower() in ("1", "true", "yes")
            if isinstance(like, int):
                return int(value)
            if isinstance(like, float):
                return float(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    return value


def _apply_section(obj, section: str, overrides: dict):
    changes = {}
    names = {f.name for f in fields(obj)}
    for key, value in overrides.items():
        prefix, _, name = key.partition(".")
        if prefix != section:
            continue
        if name not in names:
            raise ConfigError(f"unknown setting {key!r}; {section}.* accepts {sorted(names)}")
        changes[name] = _coerce(value, getattr(obj, name), key)
    if not changes:
        return obj
    try:
        return replace(obj, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def validate_overrides(overrides: dict):
    for key in overrides:
        prefix = key.partition(".")[0]
        if prefix not in SECTION_TYPES and key not in KNOBS:
            raise ConfigError(f"unknown setting {key!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    env_path: str | None = None
    seeds: tuple[int, ...] = (0,)
    overrides: dict = field(default_factory=dict)
    output_dir: Path | None = None
    sensor: str = "both"
    plots: bool = True
    calibration: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.sensor not in ("us", "tof", "both"):
            raise ConfigError(f"sensor must be us, tof or both, got {self.sensor!r}")
        validate_overrides(self.overrides)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))

    @property
    def sensors(self) -> tuple[str, ...]:
        return SENSOR_KINDS if self.sensor == "both" else (self.sensor,)

    def knob(self, key):
        default = KNOBS[key]
        return _coerce(self.overrides.get(key, default), default, key)

    def scene(self) -> Scene:
        ref = self.env_path or DEFAULT_SCENES.get(self.kind)
        if ref is None:
            raise ConfigError(f"experiment {self.kind!r} needs --env")
        return resolve_scene(ref)

    def echo_model(self) -> EchoModel:
        base = EchoModel(a0=load_calibration(self.calibration)["a0"]) if self.calibration else EchoModel()
        return _apply_section(base, "echo", self.overrides)

    def flight_params(self, start: DroneState | None = None) -> FlightParams:
        o = self.overrides
        return FlightParams(
            start=start or DroneState(),
            battery_limit=self.knob("flight.battery_limit"),
            drone_radius=self.knob("flight.drone_radius"),
            scan=_apply_section(ScanConfig(), "scan", o),
            noise=_apply_section(NoiseModel(), "noise", o),
            echo=self.echo_model(),
            filter=_apply_section(FilterParams(), "filter", o),
            oa=_apply_section(OAParams(), "oa", o),
            timing=_apply_section(LoopTiming(), "timing", o),
            tof=_apply_section(TofConfig(), "tof", o),
        )

    def out(self, name: str) -> Path | None:
        return None if self.output_dir is None else self.output_dir / name


def _parse_range(text: str) -> list[float]:
    """``"0.5:4.0:0.5"`` (inclusive) or a comma list."""
    text = str(text)
    try:
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [round(lo + k * step, 10) for k in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad distance list {text!r}") from exc


# --------------------------------------------------------------------------
# motor noise


@dataclass(frozen=True)
class NoiseRow:
    k_slow: int
    k_fast: int
    std: float
    mean: float
    std_ratio: float
    samples: int


def filter_noise_stream(raw: np.ndarray, k_slow: int, k_fast: int, burn_in: int) -> np.ndarray:
    """Run a (scans, samples) receive-only block through the filters; drop transients."""
    state = FilterState(np.zeros(raw.shape[1]), np.zeros(0))
    out = []
    for n, scan in enumerate(raw):
        y = fast_time_filter(slow_time_update(state, scan, k_slow), k_fast)
        if n >= burn_in:
            out.append(y.samples[k_fast - 1 :])
    return np.asarray(out, dtype=float)


def run_noise_experiment(spec: ExperimentSpec) -> list[NoiseRow]:
    params = spec.flight_params()
    n_scans = spec.knob("noise_exp.scans")
    configs = []
    for item in str(spec.knob("noise_exp.configs")).split(","):
        ks, _, kf = item.strip().partition("x")
        try:
            configs.append((int(ks), int(kf)))
        except ValueError as exc:
            raise ConfigError(f"bad noise_exp.configs entry {item!r}") from exc

    streams = []
    for seed in spec.seeds:
        rng = np.random.default_rng([seed, 2, params.noise.rng_seed])
        streams.append(
            np.stack([motor_noise_only_scan(params.scan, params.noise, rng, t).samples for t in range(n_scans)])
        )

    pooled = {}
    for ks, kf in configs:
        pooled[(ks, kf)] = np.concatenate(
            [filter_noise_stream(raw, ks, kf, burn_in=10 * ks).ravel() for raw in streams]
        )
    baseline = pooled.get((1, 1))
    base_std = float(np.std(baseline, ddof=1)) if baseline is not None else float("nan")
    rows = []
    for ks, kf in configs:
        values = pooled[(ks, kf)]
        std = float(np.std(values, ddof=1))
        rows.append(NoiseRow(ks, kf, std, float(values.mean()), std / base_std, int(values.size)))

    if spec.output_dir is not None:
        csvio.write_rows(
            spec.out("noise_stats.csv"),
            ["k_slow", "k_fast", "std_au", "mean_au", "std_ratio", "samples"],
            ([r.k_slow, r.k_fast, r.std, r.mean, r.std_ratio, r.samples] for r in rows),
        )
        if spec.plots:
            from .plotting import plot_noise

            rng = np.random.default_rng(0)
            subsample = {k: rng.choice(v, size=min(20_000, v.size), replace=False) for k, v in pooled.items()}
            plot_noise(rows, subsample, spec.out("noise.png"))
    return rows


# --------------------------------------------------------------------------
# characterisation


@dataclass
class CharacterizationResult:
    angle_deg: float
    material_label: str
    threshold: float
    distances: list[float]
    ranges: np.ndarray
    expected: dict
    profiles: dict
    detections: dict
    tolerance_samples: int

    def expected_index(self, d: float) -> int:
        res = self.ranges[1] - self.ranges[0]
        return int(math.floor(self.expected[d] / res + 0.5))

    def peak_index(self, d: float, ringdown: int) -> int:
        return int(np.argmax(self.profiles[d]["mean"][ringdown:])) + ringdown

    def detection_rate(self, d: float) -> float:
        target = self.expected_index(d)
        hits = [
            det.sample_index is not None and abs(det.sample_index - target) <= self.tolerance_samples
            for det in self.detections[d]
        ]
        return sum(hits) / len(hits)


def wall_geometry(scene: Scene):
    """Foot point, outward unit normal and sensor-to-wall angle for a single-wall scene.

    The angle follows the bench convention: 90 deg means the sensor points
    straight at the wall.
    """
    if len(scene.env.segments) != 1:
        raise SceneError(f"{scene.source}: characterisation needs exactly one wall segment")
    if scene.start is None:
        raise SceneError(f"{scene.source}: characterisation needs a start pose")
    seg = scene.env.segments[0]
    a = np.array(seg.p1, dtype=float)
    u = np.array(seg.p2, dtype=float) - a
    u /= np.linalg.norm(u)
    p = np.array(scene.start.position)
    foot = a + np.dot(p - a, u) * u
    normal = p - foot
    if np.linalg.norm(normal) == 0:
        raise SceneError(f"{scene.source}: start pose lies on the wall")
    normal /= np.linalg.norm(normal)
    heading = scene.start.heading
    facing = -np.array([math.cos(heading), math.sin(heading)])
    incidence = math.degrees(math.acos(float(np.clip(np.dot(facing, normal), -1.0, 1.0))))
    return seg, foot, normal, 90.0 - incidence


def run_characterization(spec: ExperimentSpec) -> CharacterizationResult:
    scene = spec.scene()
    params = spec.flight_params()
    cfg = params.scan
    seg, foot, normal, wall_angle = wall_geometry(scene)
    heading = scene.start.heading
    distances = _parse_range(spec.knob("char.distances"))
    n_scans = spec.knob("char.scans")
    env = scene.env
    m = seg.material
    label = f"{m.optical_kind} r={m.reflectivity:g} s={m.softness:g}"
    ranges = np.arange(cfg.num_samples) * resolution(cfg)

    expected, profiles, detections = {}, {}, {}
    for k, d in enumerate(distances):
        pose = DroneState(tuple(foot + d * normal), heading)
        _, dist, _ = closest_in_cone(env.starts, env.directions, pose.position, heading, cfg.half_fov)
        expected[d] = float(dist[0])
        rng = np.random.default_rng([spec.seeds[0], 3, k, params.noise.rng_seed])
        proc = EchoProcessor(cfg, params.filter, params.oa.threshold)
        block, dets = [], []
        for t in range(n_scans):
            filtered, det = proc.process(synthesize_scan(pose, env, cfg, params.noise, rng, params.echo, t))
            block.append(filtered.samples)
            dets.append(det)
        block = np.asarray(block, dtype=float)
        profiles[d] = {"mean": block.mean(axis=0), "min": block.min(axis=0), "max": block.max(axis=0)}
        detections[d] = dets

    result = CharacterizationResult(
        wall_angle, label, params.oa.threshold, distances, ranges, expected, profiles, detections,
        spec.knob("char.tolerance_samples"),
    )
    if spec.output_dir is not None:
        _write_characterization(spec, result, cfg)
    return result


def _write_characterization(spec, result: CharacterizationResult, cfg: ScanConfig):
    profile_rows = []
    for d in result.distances:
        prof = result.profiles[d]
        for i, r in enumerate(result.ranges):
            profile_rows.append([d, i, float(r), float(prof["mean"][i]), float(prof["min"][i]), float(prof["max"][i])])
    csvio.write_rows(
        spec.out("characterize_profiles.csv"),
        ["distance_m", "sample_index", "range_m", "mean_au", "min_au", "max_au"],
        profile_rows,
    )
    csvio.write_rows(
        spec.out("characterize_detections.csv"),
        ["distance_m", "scan", "detected_m", "sample_index", "peak_au"],
        (
            [d, t, det.distance, det.sample_index, det.peak_value]
            for d in result.distances
            for t, det in enumerate(result.detections[d])
        ),
    )
    csvio.write_rows(
        spec.out("characterize_summary.csv"),
        ["distance_m", "wall_angle_deg", "expected_m", "expected_index", "peak_index", "detect_rate"],
        (
            [
                d,
                result.angle_deg,
                result.expected[d],
                result.expected_index(d),
                result.peak_index(d, cfg.ringdown_samples),
                result.detection_rate(d),
            ]
            for d in result.distances
        ),
    )
    if spec.plots:
        from .plotting import plot_characterization

        plot_characterization(result, spec.out("characterize.png"))


# --------------------------------------------------------------------------
# exploration campaigns


@dataclass
class ExplorationResult:
    tables: dict
    records: dict

    def ratio(self, num="us", den="tof") -> float:
        d = self.tables[den].mean_distance
        return self.tables[num].mean_distance / d if d > 0 else math.inf


def run_exploration(spec: ExperimentSpec, echo=print) -> ExplorationResult:
    scene = spec.scene()
    if scene.start is None:
        raise SceneError(f"{scene.source}: exploration needs a start pose")
    params = spec.flight_params(scene.start)
    write_logs = bool(spec.knob("explore.logs"))
    tables, records = {}, {}
    for sensor in spec.sensors:
        recs = []
        for seed in spec.seeds:
            rec = run_flight(scene.env, sensor, params, seed)
            log.info("%s seed %d: %s after %.1f s, %.1f m", sensor, seed, rec.outcome, rec.total_time, rec.total_distance)
            if spec.output_dir is not None and write_logs:
                csvio.write_flight_csv(spec.out(f"flight_{sensor}_seed{seed}.csv"), rec)
            recs.append(rec)
        table = csvio.SummaryTable([csvio.SummaryRow.from_record(r) for r in recs])
        tables[sensor], records[sensor] = table, recs
        if echo is not None:
            echo(f"[{sensor}] {scene.name or 'scene'}, {len(recs)} flights")
            echo(table.format())
    result = ExplorationResult(tables, records)
    if spec.output_dir is not None:
        for sensor, table in tables.items():
            csvio.write_summary_csv(spec.out(f"summary_{sensor}.csv"), table)
        if spec.plots:
            from .plotting import plot_exploration_summary, plot_policy, plot_trajectories

            for sensor, recs in records.items():
                plot_trajectories(scene.env, recs, spec.out(f"trajectories_{sensor}.png"), title=sensor)
            plot_exploration_summary(tables, spec.out("summary.png"))
            plot_policy(params.oa, spec.out("policy.png"), params.scan.max_range)
    return result


# --------------------------------------------------------------------------
# corridor fly-by


@dataclass
class CorridorResult:
    ticks: np.ndarray
    x: np.ndarray
    ranges: np.ndarray
    waterfall: np.ndarray
    us_distance: list
    us_peak: np.ndarray
    tof_distance: list
    regions: tuple[Region, ...]

    def region_of(self, x: float) -> str:
        for region in self.regions:
            if region.x_min <= x <= region.x_max:
                return region.name
        return ""

    def by_region(self) -> dict:
        stats = {}
        for region in self.regions:
            mask = (self.x >= region.x_min) & (self.x <= region.x_max)
            idx = np.flatnonzero(mask)
            if idx.size == 0:
                continue
            stats[region.name] = {
                "ticks": int(idx.size),
                "us_present": float(np.mean([self.us_distance[i] is not None for i in idx])),
                "tof_present": float(np.mean([self.tof_distance[i] is not None for i in idx])),
                "us_peak": float(self.us_peak[idx].mean()),
            }
        return stats


def run_corridor(spec: ExperimentSpec) -> CorridorResult:
    scene = spec.scene()
    if scene.start is None:
        raise SceneError(f"{scene.source}: corridor needs a start pose")
    params = spec.flight_params(scene.start)
    cfg, env = params.scan, scene.env
    speed = spec.knob("corridor.speed")
    end_x = spec.knob("corridor.end_x")
    if end_x in ("", None):
        end_x = max([r.x_max for r in scene.regions], default=env.bounds[2] - 1.0) + 0.5
    end_x = float(end_x)
    dt = params.timing.tick_period
    rng = np.random.default_rng([spec.seeds[0], 4, params.noise.rng_seed])
    proc = EchoProcessor(cfg, params.filter, params.oa.threshold)

    x0, y0 = scene.start.position
    heading = scene.start.heading
    n_ticks = int(math.floor((end_x - x0) / (speed * dt))) + 1
    if n_ticks < 1:
        raise ConfigError("corridor.end_x lies behind the start pose")
    xs, waterfall, us_d, us_peak, tof_d = [], [], [], [], []
    for t in range(n_ticks):
        pose = DroneState((x0 + speed * dt * t, y0), heading, t, t * dt)
        filtered, det = proc.process(synthesize_scan(pose, env, cfg, params.noise, rng, params.echo, t))
        xs.append(pose.position[0])
        waterfall.append(filtered.samples)
        us_d.append(det.distance)
        us_peak.append(det.peak_value)
        tof_d.append(tof_measure(pose, env, params.tof).distance)

    result = CorridorResult(
        np.arange(n_ticks),
        np.array(xs),
        np.arange(cfg.num_samples) * resolution(cfg),
        np.asarray(waterfall, dtype=float),
        us_d,
        np.array(us_peak, dtype=float),
        tof_d,
        scene.regions,
    )
    if spec.output_dir is not None:
        every = max(1, int(spec.knob("corridor.waterfall_every")))
        csvio.write_rows(
            spec.out("corridor_trace.csv"),
            ["tick", "elapsed", "x", "region", "us_distance", "us_peak", "tof_distance"],
            (
                [t, t * dt, float(result.x[t]), result.region_of(result.x[t]), us_d[t], us_peak[t], tof_d[t]]
                for t in range(n_ticks)
            ),
        )
        csvio.write_rows(
            spec.out("corridor_waterfall.csv"),
            ["tick", "sample_index", "value"],
            (
                [t, i, int(v)]
                for t in range(0, n_ticks, every)
                for i, v in enumerate(result.waterfall[t])
            ),
        )
        stats = result.by_region()
        csvio.write_rows(
            spec.out("corridor_regions.csv"),
            ["region", "ticks", "us_present", "tof_present", "us_peak_mean"],
            ([name, s["ticks"], s["us_present"], s["tof_present"], s["us_peak"]] for name, s in stats.items()),
        )
        if spec.plots:
            from .plotting import plot_corridor

            plot_corridor(result, spec.out("corridor.png"))
    return result


# --------------------------------------------------------------------------
# amplitude calibration


@dataclass(frozen=True)
class CalibrationResult:
    a0: float
    peak: float
    iterations: int
    distance: float
    target: float


def perpendicular_wall(distance: float, length: float = 20.0) -> tuple[Environment, DroneState]:
    """Rigid wall ``distance`` metres ahead of a drone at the origin facing +x."""
    half = length / 2.0
    env = Environment((Segment((distance, -half), (distance, half), CONCRETE),), (-1.0, -half, distance + 1.0, half))
    return env, DroneState((0.0, 0.0), 0.0)


def noise_free_peak(a0: float, distance: float, cfg: ScanConfig, echo: EchoModel, floor_mean: float) -> float:
    env, pose = perpendicular_wall(distance)
    scan = synthesize_scan(pose, env, cfg, NoiseModel.silent(floor_mean), np.random.default_rng(0), replace(echo, a0=a0))
    return float(scan.samples[cfg.ringdown_samples :].max())


def calibrate_amplitude(spec: ExperimentSpec) -> CalibrationResult:
    params = spec.flight_params()
    cfg, echo = params.scan, params.echo
    floor = params.noise.floor_mean
    distance = spec.knob("calib.distance")
    target = spec.knob("calib.target")
    tol = spec.knob("calib.tolerance")
    if distance > cfg.max_range:
        raise ConfigError(f"calibration distance {distance} m lies beyond max range {cfg.max_range:.3f} m")

    def peak(a0):
        return noise_free_peak(a0, distance, cfg, echo, floor)

    lo, hi = 0.0, 1.0
    iterations = 0
    while peak(hi) < target:
        hi *= 2.0
        iterations += 1
        if iterations > 80:
            raise CalibrationError("amplitude search did not bracket the target")
    for _ in range(200):
        iterations += 1
        mid = 0.5 * (lo + hi)
        p = peak(mid)
        if abs(p - target) <= 0.5:
            lo = hi = mid
            break
        if p < target:
            lo = mid
        else:
            hi = mid
    a0 = 0.5 * (lo + hi)
    achieved = peak(a0)
    if abs(achieved - target) > tol:
        raise CalibrationError(f"calibrated peak {achieved} AU misses {target} +/- {tol} AU")
    result = CalibrationResult(a0, achieved, iterations, distance, target)

    if spec.output_dir is not None:
        calib = replace(echo, a0=a0)
        payload = {
            "a0": a0,
            "alpha": echo.alpha,
            "reference_distance_m": distance,
            "target_peak_au": target,
            "achieved_peak_au": achieved,
            "peak_at_0.5m_au": peak_at(calib, cfg, floor, 0.5),
            "floor_mean_au": floor,
            "speed_of_sound": cfg.speed_of_sound,
        }
        path = spec.out("calibration.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        csvio.write_rows(
            spec.out("amplitude_law.csv"),
            ["distance_m", "peak_au"],
            ([d, peak_at(calib, cfg, floor, d)] for d in _parse_range("0.5:4.5:0.25")),
        )
        if spec.plots:
            from .plotting import plot_amplitude_law

            plot_amplitude_law(calib, cfg, params.oa.threshold, floor, spec.out("amplitude_law.png"))
    return result


def peak_at(echo: EchoModel, cfg: ScanConfig, floor: float, distance: float) -> float:
    return noise_free_peak(echo.a0, distance, cfg, echo, floor)


RUNNERS = {
    "noise": run_noise_experiment,
    "characterize": run_characterization,
    "explore": run_exploration,
    "corridor": run_corridor,
    "calibrate": calibrate_amplitude,
}


def run(spec: ExperimentSpec):
    return RUNNERS[spec.kind](spec)
