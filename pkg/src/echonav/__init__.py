"""Deterministic 2D simulator for ultrasonic first-echo obstacle avoidance on nano-drones."""

from .acoustics import (
    EchoModel,
    Environment,
    MagnitudeScan,
    Material,
    NoiseModel,
    ScanConfig,
    Segment,
    motor_noise_only_scan,
    resolution,
    sample_index_to_distance,
    synthesize_scan,
)
from .control import ControlCommand, Controller, ControllerState, OAParams, raw_policy
from .dsp import Detection, EchoProcessor, FilterParams, FilterState, detect_closest, state_size_bytes
from .sim import DroneState, FlightParams, FlightRecord, LoopTiming, TofConfig, run_flight

__version__ = "0.1.0"
