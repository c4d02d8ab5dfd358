"""Closed-loop flight: unicycle kinematics, pipelined sensor latency, crash and battery limits.

Two perception front ends plug into the same loop: the ultrasonic chain
(scan synthesis + on-board filtering) and a narrow-cone single-zone laser
ranger that cannot see glass or dark absorptive surfaces.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from .acoustics import EchoModel, Environment, MagnitudeScan, NoiseModel, ScanConfig, synthesize_scan
from .control import ControlCommand, Controller, OAParams
from .dsp import Detection, EchoProcessor, FilterParams
from .geometry import point_segment_distance, ray_hits, wrap_angle

SENSOR_KINDS = ("us", "tof")
CRASH = "crash"
BATTERY_OUT = "battery_out"


class SimulationError(RuntimeError):
    """A flight violated one of the simulator's own invariants."""


@dataclass(frozen=True)
class DroneState:
    position: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0
    tick: int = 0
    elapsed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))
        if not all(math.isfinite(c) for c in self.position):
            raise ValueError(f"non-finite position {self.position}")


@dataclass(frozen=True)
class LoopTiming:
    tick_period: float = 0.030
    sensor_latency_ticks: int = 1

    def __post_init__(self):
        if self.tick_period <= 0:
            raise ValueError("tick_period must be positive")
        if self.sensor_latency_ticks < 0:
            raise ValueError("sensor_latency_ticks must be >= 0")


@dataclass(frozen=True)
class TofConfig:
    fov_deg: float = 27.0
    max_range: float = 4.0
    rays: int = 9

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov_deg must lie in (0, 180)")
        if self.rays < 1 or self.rays % 2 == 0:
            raise ValueError("rays must be a positive odd count so the boresight ray exists")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")

    @property
    def ray_offsets(self) -> np.ndarray:
        half = math.radians(self.fov_deg) / 2.0
        return np.linspace(-half, half, self.rays) if self.rays > 1 else np.zeros(1)


@dataclass(frozen=True)
class FlightRow:
    tick: int
    elapsed: float
    x: float
    y: float
    heading: float
    sensor: str
    distance: float | None
    sample_index: int | None
    peak_value: float
    source_tick: int
    velocity: float
    yaw_rate: float


@dataclass
class FlightRecord:
    sensor: str
    seed: int
    rows: list[FlightRow] = field(default_factory=list)
    outcome: str | None = None
    total_distance: float = 0.0
    total_time: float = 0.0
    scans: list[MagnitudeScan] | None = None
    final_state: DroneState | None = None

    def finish(self, outcome: str, total_time: float):
        if self.outcome is not None:
            raise SimulationError("flight outcome set twice")
        self.outcome = outcome
        self.total_time = total_time

    @property
    def crashed(self) -> bool:
        return self.outcome == CRASH


@dataclass(frozen=True)
class FlightParams:
    start: DroneState = field(default_factory=DroneState)
    battery_limit: float = 440.0
    drone_radius: float = 0.06
    scan: ScanConfig = field(default_factory=ScanConfig)
    noise: NoiseModel = field(default_factory=NoiseModel)
    echo: EchoModel = field(default_factory=EchoModel)
    filter: FilterParams = field(default_factory=FilterParams)
    oa: OAParams = field(default_factory=OAParams)
    timing: LoopTiming = field(default_factory=LoopTiming)
    tof: TofConfig = field(default_factory=TofConfig)


def kinematics_step(state: DroneState, cmd: ControlCommand, dt: float) -> DroneState:
    """Unicycle update: rotate first, then advance along the new heading."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    heading = wrap_angle(state.heading + math.radians(cmd.yaw_rate) * dt)
    step = cmd.forward_velocity * dt
    x = state.position[0] + step * math.cos(heading)
    y = state.position[1] + step * math.sin(heading)
    return DroneState((x, y), heading, state.tick + 1, state.elapsed + dt)


def tof_measure(pose, env: Environment, cfg: TofConfig) -> Detection:
    """Minimum range over the laser cone; non-diffuse surfaces are transparent to it."""
    visible = env.optically_visible
    if not visible.any():
        return Detection()
    hits = ray_hits(env.starts[visible], env.directions[visible], pose.position, pose.heading + cfg.ray_offsets)
    nearest = float(hits.min())
    if nearest > cfg.max_range:
        return Detection()
    return Detection(nearest)


def check_crash(pose, env: Environment, drone_radius: float = 0.06) -> bool:
    if drone_radius <= 0:
        raise ValueError("drone_radius must be positive")
    if not env.contains(pose.position):
        return True
    if not env.segments:
        return False
    return bool(point_segment_distance(env.starts, env.directions, pose.position).min() <= drone_radius)


def flight_rngs(seed: int, noise: NoiseModel) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (sensor, control) streams; reseeding the noise leaves exploration unchanged."""
    sensor = np.random.default_rng([int(seed), 1, int(noise.rng_seed)])
    control = np.random.default_rng([int(seed), 0])
    return sensor, control


def make_sensor(kind: str, env: Environment, params: FlightParams, rng: np.random.Generator):
    """Return ``measure(pose) -> (Detection, raw scan or None)`` for one sensor kind."""
    if kind == "us":
        processor = EchoProcessor(params.scan, params.filter, params.oa.threshold)

        def measure(pose):
            scan = synthesize_scan(pose, env, params.scan, params.noise, rng, params.echo, pose.tick)
            _, detection = processor.process(scan)
            return detection, scan

    elif kind == "tof":

        def measure(pose):
            return tof_measure(pose, env, params.tof), None

    else:
        raise ValueError(f"unknown sensor kind {kind!r}; expected one of {SENSOR_KINDS}")
    return measure


def iter_flight(
    env: Environment,
    sensor: str,
    params: FlightParams,
    seed: int,
    record: FlightRecord,
) -> Iterator[FlightRow]:
    """Run the loop, yielding each logged row; fills ``record`` as it goes."""
    state = params.start
    if not env.contains(state.position) or check_crash(state, env, params.drone_radius):
        raise ValueError(f"start pose {state.position} is in collision or out of bounds")
    sensor_rng, control_rng = flight_rngs(seed, params.noise)
    measure = make_sensor(sensor, env, params, sensor_rng)
    controller = Controller(params.oa, control_rng)
    dt = params.timing.tick_period
    latency = params.timing.sensor_latency_ticks
    pending: deque[tuple[int, Detection]] = deque()

    while True:
        detection, scan = measure(state)
        if record.scans is not None and scan is not None:
            record.scans.append(scan)
        pending.append((state.tick, detection))
        if len(pending) > latency:
            source_tick, applied = pending.popleft()
        else:
            source_tick, applied = -1, Detection()
        cmd = controller(applied, dt)

        nxt = kinematics_step(state, cmd, dt)
        record.total_distance += cmd.forward_velocity * dt
        row = FlightRow(
            tick=state.tick,
            elapsed=state.elapsed,
            x=state.position[0],
            y=state.position[1],
            heading=state.heading,
            sensor=sensor,
            distance=detection.distance,
            sample_index=detection.sample_index,
            peak_value=detection.peak_value,
            source_tick=source_tick,
            velocity=cmd.forward_velocity,
            yaw_rate=cmd.yaw_rate,
        )
        record.rows.append(row)
        yield row
        state = nxt
        if check_crash(state, env, params.drone_radius):
            record.finish(CRASH, state.elapsed)
            break
        if state.elapsed >= params.battery_limit - 1e-9:
            record.finish(BATTERY_OUT, state.elapsed)
            break
    record.final_state = state


def run_flight(
    env: Environment,
    sensor: str,
    params: FlightParams | None = None,
    seed: int = 0,
    battery_limit: float | None = None,
    keep_scans: bool = False,
    on_row: Callable[[FlightRow], None] | None = None,
) -> FlightRecord:
    params = params or FlightParams()
    if battery_limit is not None:
        params = replace(params, battery_limit=battery_limit)
    record = FlightRecord(sensor, seed, scans=[] if keep_scans else None)
    for row in iter_flight(env, sensor, params, seed, record):
        if on_row is not None:
            on_row(row)
    if record.total_distance > params.oa.max_velocity * record.total_time + 1e-9:
        raise SimulationError("distance exceeds max_velocity * time")
    return record
