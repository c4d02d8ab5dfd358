"""Distance-scaled obstacle-avoidance policy with random exploration direction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import Detection


@dataclass(frozen=True)
class OAParams:
    threshold: float = 6000.0
    stop_dist: float = 0.40
    yaw_zero_dist: float = 0.80
    max_yaw_rate: float = 83.25
    vel_divisor: float = 4.0
    max_velocity: float = 1.15
    accel_limit: float = 0.05
    reroll_period: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.stop_dist < self.yaw_zero_dist:
            raise ValueError("need 0 < stop_dist < yaw_zero_dist")
        for name in ("threshold", "max_yaw_rate", "vel_divisor", "max_velocity", "accel_limit", "reroll_period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ControlCommand:
    forward_velocity: float
    yaw_rate: float  # deg/s, positive turns counter-clockwise


@dataclass
class ControllerState:
    yaw_sign: int = 1
    last_velocity: float = 0.0
    time_since_reroll: float = 0.0


def raw_policy(distance: float | None, p: OAParams) -> tuple[float, float]:
    """Unslewed (velocity m/s, yaw magnitude deg/s) for the closest-obstacle range."""
    if distance is None:
        return p.max_velocity, 0.0
    if distance < 0:
        raise ValueError(f"negative distance {distance}")
    if distance < p.stop_dist:
        return 0.0, p.max_yaw_rate
    velocity = min(distance / p.vel_divisor, p.max_velocity)
    if distance <= p.yaw_zero_dist:
        yaw = p.max_yaw_rate * (p.yaw_zero_dist - distance) / (p.yaw_zero_dist - p.stop_dist)
        return velocity, yaw
    return velocity, 0.0


def _draw_sign(rng: np.random.Generator) -> int:
    return 1 if rng.random() < 0.5 else -1


class Controller:
    """Single-drone state machine wrapping :func:`step`."""

    def __init__(self, params: OAParams | None = None, rng: np.random.Generator | None = None):
        self.params = params or OAParams()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.state = ControllerState(yaw_sign=_draw_sign(self.rng))

    def __call__(self, detection: Detection, dt: float) -> ControlCommand:
        return step(self.state, detection, self.params, dt, self.rng)


def step(
    state: ControllerState,
    detection: Detection,
    p: OAParams,
    dt: float,
    rng: np.random.Generator,
) -> ControlCommand:
    if dt <= 0:
        raise ValueError("dt must be positive")
    distance = detection.distance if detection is not None else None
    velocity, yaw = raw_policy(distance, p)
    # Only increases are slew-limited.
    velocity = min(velocity, state.last_velocity + p.accel_limit)
    velocity = min(max(velocity, 0.0), p.max_velocity)

    state.time_since_reroll += dt
    close = distance is not None and distance < p.stop_dist
    if state.time_since_reroll >= p.reroll_period and not close:
        state.yaw_sign = _draw_sign(rng)
        state.time_since_reroll = 0.0

    state.last_velocity = velocity
    return ControlCommand(velocity, state.yaw_sign * yaw)
