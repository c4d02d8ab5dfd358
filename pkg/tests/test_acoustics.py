import math
from dataclasses import replace

import numpy as np
import pytest

from echonav.acoustics import (
    CONCRETE,
    GLASS,
    EchoModel,
    Environment,
    MagnitudeScan,
    Material,
    NoiseModel,
    ScanConfig,
    Segment,
    distance_to_sample_index,
    echo_profile,
    motor_noise_only_scan,
    resolution,
    sample_index_to_distance,
    synthesize_scan,
)
from echonav.sim import DroneState

CFG = ScanConfig()
SILENT = NoiseModel.silent()


def wall_ahead(distance, material=CONCRETE, half_length=20.0):
    env = Environment(
        (Segment((distance, -half_length), (distance, half_length), material),),
        (-1.0, -half_length - 1.0, distance + 1.0, half_length + 1.0),
    )
    return env, DroneState((0.0, 0.0), 0.0)


def quiet_scan(env, pose, cfg=CFG, echo=None):
    return synthesize_scan(pose, env, cfg, SILENT, np.random.default_rng(0), echo).samples.astype(float)


def argmax_beyond_ringdown(samples, cfg=CFG):
    return int(np.argmax(samples[cfg.ringdown_samples :])) + cfg.ringdown_samples


class TestScanConfig:
    def test_resolution_at_337_5_mps(self):
        cfg = ScanConfig(speed_of_sound=337.5)
        assert resolution(cfg) == pytest.approx(0.0135, abs=1e-12)

    def test_nominal_resolution_and_range(self):
        # 343 * 4 / (2 * 50e3)
        assert resolution(CFG) == pytest.approx(0.01372, abs=1e-12)
        assert 4.55 <= CFG.max_range <= 4.70

    def test_decimation_linearity(self):
        assert resolution(ScanConfig(decim=2)) == pytest.approx(0.00686, abs=1e-12)
        assert resolution(ScanConfig(decim=8)) == pytest.approx(4 * resolution(ScanConfig(decim=2)))

    def test_sample_period_and_burst(self):
        assert CFG.sample_period == pytest.approx(8e-5)
        assert CFG.burst_duration == pytest.approx(0.64e-3)

    @pytest.mark.parametrize(
        "kwargs",
        [{"decim": 3}, {"num_samples": 0}, {"fov_deg": 0.0}, {"fov_deg": 180.0}, {"speed_of_sound": 0.0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ScanConfig(**kwargs)


class TestIndexMapping:
    def test_zero(self):
        assert sample_index_to_distance(0, CFG) == 0.0

    def test_last_index(self):
        assert sample_index_to_distance(339, CFG) == pytest.approx(4.65108, abs=1e-9)
        assert sample_index_to_distance(339, CFG) == pytest.approx(4.652, abs=2e-3)

    def test_round_trip(self):
        assert sample_index_to_distance(36, CFG) == pytest.approx(0.49392, abs=1e-9)
        assert distance_to_sample_index(sample_index_to_distance(36, CFG), CFG) == 36
        for i in range(CFG.num_samples):
            assert distance_to_sample_index(sample_index_to_distance(i, CFG), CFG) == i

    @pytest.mark.parametrize("i", [-1, 340, 1000])
    def test_out_of_range(self, i):
        with pytest.raises(IndexError):
            sample_index_to_distance(i, CFG)


class TestTypes:
    def test_material_bounds(self):
        with pytest.raises(ValueError):
            Material(reflectivity=1.2)
        with pytest.raises(ValueError):
            Material(softness=-0.1)
        with pytest.raises(ValueError):
            Material(optical_kind="mirror")

    def test_segment_endpoints_distinct(self):
        with pytest.raises(ValueError):
            Segment((1.0, 1.0), (1.0, 1.0))

    def test_environment_bounds(self):
        with pytest.raises(ValueError):
            Environment((Segment((0, 0), (5, 0)),), (-1, -1, 4, 1))

    def test_scan_range_checked(self):
        with pytest.raises(ValueError):
            MagnitudeScan(np.array([-1, 2]))
        with pytest.raises(ValueError):
            MagnitudeScan(np.array([70000]))


class TestSynthesis:
    def test_perpendicular_wall_argmax(self):
        env, pose = wall_ahead(2.0)
        samples = quiet_scan(env, pose)
        # brute force over the synthesized array
        assert argmax_beyond_ringdown(samples) == round(2.0 / resolution(CFG)) == 146

    def test_empty_room_is_floor(self):
        env = Environment((), (-5, -5, 5, 5))
        samples = quiet_scan(env, DroneState())
        assert np.all(samples[CFG.ringdown_samples :] == 1700)
        assert samples[0] > 30000  # ringdown template

    def test_oblique_wall_peaks_at_closest_in_cone_point(self):
        env, _ = wall_ahead(1.0)
        pose = DroneState((0.0, 0.0), math.radians(45.0))
        samples = quiet_scan(env, pose)
        peak = argmax_beyond_ringdown(samples) * resolution(CFG)
        closest = 1.0 / math.cos(math.radians(45.0 - 27.5))
        assert peak == pytest.approx(closest, abs=2 * resolution(CFG))
        assert abs(peak - 1.0) < abs(peak - math.sqrt(2.0))

    def test_determinism(self):
        env, pose = wall_ahead(1.3)
        noise = NoiseModel()
        a = synthesize_scan(pose, env, CFG, noise, np.random.default_rng(42))
        b = synthesize_scan(pose, env, CFG, noise, np.random.default_rng(42))
        assert a.samples.dtype == np.uint16
        assert np.array_equal(a.samples, b.samples)

    def test_monotone_amplitude(self):
        peaks = []
        for d in np.arange(0.5, 4.6, 0.1):
            env, pose = wall_ahead(float(d))
            peaks.append(echo_profile(pose, env, CFG).max())
        assert all(np.diff(peaks) < 0)

    @pytest.mark.parametrize("d", [0.4, 0.9, 1.77, 2.5, 3.3, 4.4])
    def test_closest_point_law_single_segment(self, d):
        # short segment fully inside the cone, off-axis
        seg = Segment((d, 0.1), (d + 0.3, 0.4))
        env = Environment((seg,), (-1, -2, 6, 2))
        pose = DroneState((0.0, 0.0), 0.0)
        samples = quiet_scan(env, pose)
        nearest = min(math.hypot(d + 0.3 * t, 0.1 + 0.3 * t) for t in np.linspace(0, 1, 10001))
        idx = argmax_beyond_ringdown(samples)
        assert abs(idx - nearest / resolution(CFG)) <= 2

    def test_glass_parity(self):
        env_c, pose = wall_ahead(1.7, CONCRETE)
        env_g, _ = wall_ahead(1.7, GLASS)
        assert np.array_equal(quiet_scan(env_c, pose), quiet_scan(env_g, pose))

    def test_beyond_range_contributes_nothing(self):
        env, pose = wall_ahead(CFG.max_range + 0.01)
        assert not echo_profile(pose, env, CFG).any()
        env, pose = wall_ahead(5.0)
        samples = quiet_scan(env, pose)
        assert np.all(samples[CFG.ringdown_samples :] == 1700)

    def test_softness_attenuates(self):
        env_hard, pose = wall_ahead(1.0)
        env_soft, _ = wall_ahead(1.0, Material(1.0, "diffuse", 0.5))
        hard = echo_profile(pose, env_hard, CFG).max()
        soft = echo_profile(pose, env_soft, CFG).max()
        assert soft == pytest.approx(0.5 * hard)

    def test_amplitude_linear_in_a0(self):
        env, pose = wall_ahead(2.0)
        echo = EchoModel()
        one = echo_profile(pose, env, CFG, echo).max()
        two = echo_profile(pose, env, CFG, replace(echo, a0=2 * echo.a0)).max()
        assert two == pytest.approx(2 * one)

    def test_edge_factor(self):
        echo = EchoModel()
        assert echo.amplitude(1.0, bearing=math.radians(27.5)) == pytest.approx(
            math.cos(math.radians(27.5)) * echo.amplitude(1.0)
        )
        assert echo.amplitude(1.0, bearing=math.radians(89.0)) == pytest.approx(0.2 * echo.amplitude(1.0))

    def test_pose_outside_bounds(self):
        env, _ = wall_ahead(2.0)
        with pytest.raises(ValueError):
            synthesize_scan(DroneState((50.0, 0.0)), env, CFG, SILENT, np.random.default_rng(0))


class TestMotorNoise:
    def test_constant_when_silent(self):
        scan = motor_noise_only_scan(CFG, SILENT, np.random.default_rng(1))
        assert np.all(scan.samples == 1700)

    def test_std_matches_model(self):
        noise = NoiseModel(floor_std_unfiltered=500.0, outlier_prob=0.0)
        rng = np.random.default_rng(7)
        pooled = np.concatenate([motor_noise_only_scan(CFG, noise, rng).samples for _ in range(30)])
        assert pooled.size >= 10_000
        assert np.std(pooled.astype(float)) == pytest.approx(500.0, rel=0.05)

    def test_same_seed_same_scan(self):
        noise = NoiseModel()
        a = motor_noise_only_scan(CFG, noise, noise.generator())
        b = motor_noise_only_scan(CFG, noise, noise.generator())
        assert np.array_equal(a.samples, b.samples)

    def test_no_ringdown_in_receive_only(self):
        scan = motor_noise_only_scan(CFG, SILENT, np.random.default_rng(0))
        assert scan.samples[0] == 1700
