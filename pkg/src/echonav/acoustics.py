"""Ultrasonic magnitude-scan synthesis.

A scan is the 340-sample magnitude envelope the transceiver reports for one
ping. Each obstacle segment that reaches into the sensor cone contributes one
echo whose onset sits at the range of its closest in-cone point; the motor
noise floor and the transmit ringdown are superimposed on top.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .geometry import closest_in_cone

MAX_AU = 65535
OPTICAL_KINDS = ("diffuse", "glass", "dark_absorptive")


@dataclass(frozen=True)
class ScanConfig:
    f_op: float = 50_000.0
    decim: int = 4
    num_samples: int = 340
    tx_cycles: int = 512
    ringdown_samples: int = 20
    fov_deg: float = 55.0
    speed_of_sound: float = 343.0

    def __post_init__(self):
        if self.decim not in (2, 4, 8):
            raise ValueError(f"decim must be one of 2, 4, 8, got {self.decim}")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if not 0 <= self.ringdown_samples <= self.num_samples:
            raise ValueError("ringdown_samples must lie in [0, num_samples]")
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov_deg must lie in (0, 180)")
        if self.speed_of_sound <= 0.0 or self.f_op <= 0.0:
            raise ValueError("speed_of_sound and f_op must be positive")

    @property
    def sample_period(self) -> float:
        return self.decim / self.f_op

    @property
    def resolution(self) -> float:
        return resolution(self)

    @property
    def max_range(self) -> float:
        return self.num_samples * self.resolution

    @property
    def half_fov(self) -> float:
        return math.radians(self.fov_deg) / 2.0

    @property
    def burst_duration(self) -> float:
        # MUTCLK runs at 16 * f_op.
        return self.tx_cycles / (16.0 * self.f_op)


@dataclass(frozen=True)
class Material:
    reflectivity: float = 1.0
    optical_kind: str = "diffuse"
    softness: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError("reflectivity must lie in [0, 1]")
        if not 0.0 <= self.softness <= 1.0:
            raise ValueError("softness must lie in [0, 1]")
        if self.optical_kind not in OPTICAL_KINDS:
            raise ValueError(f"optical_kind must be one of {OPTICAL_KINDS}, got {self.optical_kind!r}")

    @property
    def acoustic_gain(self) -> float:
        return self.reflectivity * (1.0 - self.softness)

    @property
    def optically_visible(self) -> bool:
        return self.optical_kind == "diffuse"


CONCRETE = Material(1.0, "diffuse", 0.0)
GLASS = Material(1.0, "glass", 0.0)

MATERIALS = {
    "concrete": CONCRETE,
    "glass": GLASS,
    "wood": Material(0.9, "diffuse", 0.0),
    "metal": Material(1.0, "diffuse", 0.0),
    "dark": Material(0.9, "dark_absorptive", 0.0),
    "fabric": Material(0.8, "diffuse", 0.5),
    "upholstery": Material(0.7, "diffuse", 0.9),
}


@dataclass(frozen=True)
class Segment:
    p1: tuple[float, float]
    p2: tuple[float, float]
    material: Material = CONCRETE

    def __post_init__(self):
        if tuple(self.p1) == tuple(self.p2):
            raise ValueError(f"degenerate segment at {self.p1}")

    @property
    def length(self) -> float:
        return math.dist(self.p1, self.p2)


@dataclass(frozen=True)
class Environment:
    """Line-segment obstacles inside an axis-aligned rectangle (xmin, ymin, xmax, ymax)."""

    segments: tuple[Segment, ...]
    bounds: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"empty bounds {self.bounds}")
        for seg in self.segments:
            for x, y in (seg.p1, seg.p2):
                if not (xmin <= x <= xmax and ymin <= y <= ymax):
                    raise ValueError(f"segment endpoint ({x}, {y}) outside bounds {self.bounds}")

    def contains(self, point: Sequence[float]) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= point[0] <= xmax and ymin <= point[1] <= ymax

    @cached_property
    def starts(self) -> np.ndarray:
        return np.array([s.p1 for s in self.segments], dtype=float).reshape(-1, 2)

    @cached_property
    def directions(self) -> np.ndarray:
        ends = np.array([s.p2 for s in self.segments], dtype=float).reshape(-1, 2)
        return ends - self.starts

    @cached_property
    def acoustic_gain(self) -> np.ndarray:
        return np.array([s.material.acoustic_gain for s in self.segments], dtype=float)

    @cached_property
    def optically_visible(self) -> np.ndarray:
        return np.array([s.material.optically_visible for s in self.segments], dtype=bool)


@dataclass
class MagnitudeScan:
    samples: np.ndarray
    tick: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError("scan samples must be one-dimensional")
        if samples.size and (samples.min() < 0 or samples.max() > MAX_AU):
            raise ValueError("scan samples must lie in [0, 65535]")
        self.samples = samples

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class NoiseModel:
    floor_mean: float = 1700.0
    floor_std_unfiltered: float = 700.0
    outlier_prob: float = 0.001
    outlier_scale: float = 3000.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.floor_mean < 0 or self.floor_std_unfiltered < 0 or self.outlier_scale < 0:
            raise ValueError("noise levels must be non-negative")
        if not 0.0 <= self.outlier_prob <= 1.0:
            raise ValueError("outlier_prob must lie in [0, 1]")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)

    @classmethod
    def silent(cls, floor_mean: float = 1700.0) -> "NoiseModel":
        return cls(floor_mean=floor_mean, floor_std_unfiltered=0.0, outlier_prob=0.0)


def _calibrated_a0() -> float:
    return load_calibration()["a0"]


@dataclass(frozen=True)
class EchoModel:
    """Amplitude law and pulse shape of a single-bounce echo.

    The envelope peaks at the closest in-cone range with a steep leading edge
    (``rise_sigma_m``) and a burst-length trailing decay (``pulse_sigma_m``).
    """

    a0: float = field(default_factory=_calibrated_a0)
    alpha: float = 1.5
    pulse_sigma_m: float = 0.055
    rise_sigma_m: float = 0.007
    edge_floor: float = 0.2
    ringdown_peak: float = 40_000.0
    ringdown_decay_samples: float = 4.0

    def amplitude(self, distance, gain=1.0, bearing=0.0):
        """Noise-free peak height in AU for an echo at ``distance`` metres."""
        angle_factor = np.maximum(np.cos(bearing), self.edge_floor)
        return self.a0 * gain * angle_factor / (1.0 + np.asarray(distance)) ** self.alpha


CALIBRATION_FILE = "calibration.json"


@lru_cache(maxsize=1)
def _packaged_calibration_text() -> str:
    return resources.files("echonav").joinpath("data").joinpath(CALIBRATION_FILE).read_text()


def load_calibration(path=None) -> dict:
    """Read a calibration file; the packaged one when ``path`` is None."""
    if path is None:
        text = _packaged_calibration_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    if "a0" not in data:
        raise ValueError(f"calibration file {path or CALIBRATION_FILE} has no 'a0' entry")
    return data


def resolution(cfg: ScanConfig) -> float:
    """Range covered by one sample, in metres (two-way travel)."""
    return cfg.speed_of_sound * cfg.decim / (2.0 * cfg.f_op)


def sample_index_to_distance(i: int, cfg: ScanConfig) -> float:
    if not 0 <= i < cfg.num_samples:
        raise IndexError(f"sample index {i} outside [0, {cfg.num_samples})")
    return i * resolution(cfg)


def distance_to_sample_index(distance: float, cfg: ScanConfig) -> int:
    """Nearest sample index for a range; may exceed the scan for far ranges."""
    if distance < 0:
        raise ValueError("distance must be non-negative")
    return int(math.floor(distance / resolution(cfg) + 0.5))


def ringdown_template(cfg: ScanConfig, echo: EchoModel) -> np.ndarray:
    idx = np.arange(cfg.ringdown_samples, dtype=float)
    return echo.ringdown_peak * np.exp(-idx / echo.ringdown_decay_samples)


def _quantize(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, MAX_AU).astype(np.uint16)


def _noise_floor(cfg: ScanConfig, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    n = cfg.num_samples
    if noise.floor_std_unfiltered > 0:
        floor = noise.floor_mean + noise.floor_std_unfiltered * rng.standard_normal(n)
    else:
        floor = np.full(n, float(noise.floor_mean))
    if noise.outlier_prob > 0 and noise.outlier_scale > 0:
        hits = rng.random(n) < noise.outlier_prob
        if hits.any():
            floor[hits] += noise.outlier_scale * np.abs(rng.standard_normal(int(hits.sum())))
    return floor


def echo_profile(pose, env: Environment, cfg: ScanConfig, echo: EchoModel | None = None) -> np.ndarray:
    """Noise-free echo energy per sample (AU above the floor), excluding ringdown.

    ``pose`` is anything exposing ``position`` (x, y) and ``heading`` (radians).
    """
    echo = echo or EchoModel()
    profile = np.zeros(cfg.num_samples)
    if not env.segments:
        return profile
    visible, dist, bearing = closest_in_cone(
        env.starts, env.directions, tuple(pose.position), pose.heading, cfg.half_fov
    )
    visible &= (dist <= cfg.max_range) & (env.acoustic_gain > 0)
    if not visible.any():
        return profile

    d_star = dist[visible][:, None]
    peak = echo.amplitude(d_star, env.acoustic_gain[visible][:, None], bearing[visible][:, None])
    offset = np.arange(cfg.num_samples) * resolution(cfg) - d_star
    sigma = np.where(offset < 0.0, echo.rise_sigma_m, echo.pulse_sigma_m)
    return (peak * np.exp(-0.5 * (offset / sigma) ** 2)).sum(axis=0)


def synthesize_scan(
    pose,
    env: Environment,
    cfg: ScanConfig,
    noise: NoiseModel,
    rng: np.random.Generator,
    echo: EchoModel | None = None,
    tick: int = 0,
) -> MagnitudeScan:
    """One full ping: echoes + motor noise floor + transmit ringdown, quantised to 16 bit."""
    if not env.contains(pose.position):
        raise ValueError(f"pose {tuple(pose.position)} outside environment bounds")
    echo = echo or EchoModel()
    values = _noise_floor(cfg, noise, rng) + echo_profile(pose, env, cfg, echo)
    values[: cfg.ringdown_samples] += ringdown_template(cfg, echo)
    return MagnitudeScan(_quantize(values), tick)


def motor_noise_only_scan(
    cfg: ScanConfig, noise: NoiseModel, rng: np.random.Generator, tick: int = 0
) -> MagnitudeScan:
    """Receive-only scan: the motor noise floor with no transmit and no echoes."""
    return MagnitudeScan(_quantize(_noise_floor(cfg, noise, rng)), tick)
