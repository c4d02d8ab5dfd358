"""On-board filtering and first-echo detection.

The chain mirrors what the flight controller runs per ping:

    raw scan -> ringdown compensation -> slow-time EMA -> fast-time average -> threshold

Only the EMA row and the ringdown reference persist between pings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acoustics import MAX_AU, MagnitudeScan, ScanConfig, resolution

DEFAULT_THRESHOLD = 6000.0
BYTES_PER_SAMPLE = 2


@dataclass(frozen=True)
class FilterParams:
    k_slow: int = 3
    k_fast: int = 1

    def __post_init__(self):
        for name in ("k_slow", "k_fast"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")


@dataclass
class FilterState:
    """Per-stream memory. ``ema`` is the wide accumulator; stores are rounded."""

    ema: np.ndarray
    ringdown_ref: np.ndarray
    initialized: bool = False
    ringdown_initialized: bool = False

    @classmethod
    def for_config(cls, cfg: ScanConfig) -> "FilterState":
        return cls(np.zeros(cfg.num_samples), np.zeros(cfg.ringdown_samples))


@dataclass(frozen=True)
class Detection:
    distance: float | None = None
    sample_index: int | None = None
    peak_value: float = 0.0

    @property
    def present(self) -> bool:
        return self.distance is not None


def _values(scan) -> np.ndarray:
    samples = scan.samples if isinstance(scan, MagnitudeScan) else scan
    return np.asarray(samples, dtype=float)


def _store(values: np.ndarray, tick: int) -> MagnitudeScan:
    # Round half up, saturate to the 16-bit magnitude range.
    return MagnitudeScan(np.clip(np.floor(values + 0.5), 0, MAX_AU).astype(np.uint16), tick)


def _tick(scan) -> int:
    return scan.tick if isinstance(scan, MagnitudeScan) else 0


def slow_time_update(state: FilterState, scan, k_slow: int) -> MagnitudeScan:
    """Exponential moving average across pings, per sample.

    y[n] = (k_slow - 1) / k_slow * y[n-1] + x[n] / k_slow; the first scan seeds y.
    """
    x = _values(scan)
    if len(x) != len(state.ema):
        raise ValueError(f"scan has {len(x)} samples, filter state expects {len(state.ema)}")
    if not state.initialized or k_slow == 1:
        state.ema = x.copy()
        state.initialized = True
    else:
        state.ema = (k_slow - 1) / k_slow * state.ema + x / k_slow
    return _store(state.ema, _tick(scan))


def fast_time_filter(scan, k_fast: int) -> MagnitudeScan:
    """Causal moving average along the sample axis.

    The first ``k_fast - 1`` outputs average over the available prefix so that
    indices stay aligned with range.
    """
    x = _values(scan)
    if k_fast > len(x):
        raise ValueError(f"k_fast={k_fast} exceeds scan length {len(x)}")
    if k_fast == 1:
        return _store(x, _tick(scan))
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(len(x))
    start = np.maximum(idx - k_fast + 1, 0)
    y = (csum[idx + 1] - csum[start]) / (idx - start + 1)
    return _store(y, _tick(scan))


def ringdown_compensate(state: FilterState, scan, k_slow: int = 1) -> MagnitudeScan:
    """Subtract the stored ringdown magnitudes from the leading samples.

    The reference is then updated as an EMA (same window as slow time) of the
    raw leading magnitudes. The very first call seeds the reference with the
    scan itself.
    """
    x = _values(scan)
    n = len(state.ringdown_ref)
    raw = x[:n].copy()
    if not state.ringdown_initialized:
        state.ringdown_ref = raw.copy()
        state.ringdown_initialized = True
    out = x.copy()
    out[:n] = np.maximum(raw - state.ringdown_ref, 0.0)
    state.ringdown_ref = (k_slow - 1) / k_slow * state.ringdown_ref + raw / k_slow
    return _store(out, _tick(scan))


def detect_closest(scan, threshold: float, cfg: ScanConfig) -> Detection:
    """First sample past the ringdown zone whose value exceeds ``threshold``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    x = _values(scan)[cfg.ringdown_samples :]
    if x.size == 0:
        return Detection()
    peak = float(x.max())
    above = np.flatnonzero(x > threshold)
    if above.size == 0:
        return Detection(peak_value=peak)
    index = int(above[0]) + cfg.ringdown_samples
    return Detection(index * resolution(cfg), index, peak)


def state_size_bytes(cfg: ScanConfig) -> int:
    """16-bit payload: the in-place IQ scan buffer plus the saved ringdown row."""
    return cfg.num_samples * 2 * BYTES_PER_SAMPLE + cfg.ringdown_samples * BYTES_PER_SAMPLE


@dataclass
class EchoProcessor:
    """Stateful per-sensor chain from raw scans to detections."""

    cfg: ScanConfig = field(default_factory=ScanConfig)
    params: FilterParams = field(default_factory=FilterParams)
    threshold: float = DEFAULT_THRESHOLD
    state: FilterState | None = None

    def __post_init__(self):
        if self.state is None:
            self.state = FilterState.for_config(self.cfg)

    def filter(self, scan: MagnitudeScan) -> MagnitudeScan:
        compensated = ringdown_compensate(self.state, scan, self.params.k_slow)
        filtered = slow_time_update(self.state, compensated, self.params.k_slow)
        return fast_time_filter(filtered, self.params.k_fast)

    def process(self, scan: MagnitudeScan) -> tuple[MagnitudeScan, Detection]:
        filtered = self.filter(scan)
        return filtered, detect_closest(filtered, self.threshold, self.cfg)


def ema_std_factor(k_slow: int) -> float:
    """Steady-state std ratio of the slow-time EMA on white noise."""
    return math.sqrt(1.0 / (2 * k_slow - 1))
