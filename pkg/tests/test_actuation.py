import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arcsim.actuation import (
    EncoderPair,
    FrictionParams,
    SCREW_DRIVE,
    TransmissionSpec,
    UJOINT_DRIVE,
    apply_friction,
    dequantize_encoder,
    detect_slip,
    encoder_tick_deg,
    estimate_torque_from_current,
    motor_current_for_joint_torque,
    output_speed,
    quantize_encoder,
    screw_lead_speed,
)


class TestTransmission:
    def test_screw_drive_numbers(self):
        assert SCREW_DRIVE.total_ratio == pytest.approx(119.0)
        assert output_speed(SCREW_DRIVE, 12000.0) == pytest.approx(100.8403361)

    def test_ujoint_drive_numbers(self):
        assert UJOINT_DRIVE.total_ratio == pytest.approx(137.5)
        assert output_speed(UJOINT_DRIVE, 12000.0) == pytest.approx(87.2727272)

    def test_zero_in_zero_out(self):
        assert output_speed(SCREW_DRIVE, 0.0) == 0.0

    def test_clamps_above_limit(self):
        top = output_speed(SCREW_DRIVE, 12000.0)
        assert output_speed(SCREW_DRIVE, 90000.0) == pytest.approx(top)
        assert output_speed(SCREW_DRIVE, -90000.0) == pytest.approx(-top)

    @given(st.floats(-30000, 30000), st.floats(-30000, 30000))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert output_speed(UJOINT_DRIVE, lo) <= output_speed(UJOINT_DRIVE, hi) + 1e-12

    def test_efficiency_validation(self):
        with pytest.raises(ValueError):
            TransmissionSpec(12000.0, (10.0,), 1.0, 2.0, efficiency=0.0)
        with pytest.raises(ValueError):
            TransmissionSpec(12000.0, (10.0,), 1.0, 2.0, efficiency=1.2)

    def test_peak_must_cover_continuous(self):
        with pytest.raises(ValueError):
            TransmissionSpec(12000.0, (10.0,), 2.0, 1.0)


class TestLeadSpeed:
    def test_max_screw_lead_speed(self):
        rpm = output_speed(SCREW_DRIVE, 12000.0)
        assert screw_lead_speed(rpm, 137.0) == pytest.approx(0.2302521, rel=1e-6)

    def test_zero_rpm(self):
        assert screw_lead_speed(0.0, 137.0) == 0.0

    def test_hand_arithmetic(self):
        # 60 RPM at 100 mm pitch advances 100 mm per second.
        assert screw_lead_speed(60.0, 100.0) == pytest.approx(0.1)

    def test_nonpositive_pitch(self):
        with pytest.raises(ValueError):
            screw_lead_speed(10.0, 0.0)
        with pytest.raises(ValueError):
            screw_lead_speed(10.0, -3.0)


class TestFriction:
    def test_moving_subtracts_coulomb(self):
        p = FrictionParams(coulomb_nm=0.48, viscous_nm_per_rad_s=0.0,
                           stiction_nm=0.48)
        assert apply_friction(p, 1.0, 0.5) == pytest.approx(0.52)

    def test_zero_torque_at_rest(self):
        p = FrictionParams()
        assert apply_friction(p, 0.0, 0.0) == 0.0

    def test_stationary_holds_below_stiction(self):
        p = FrictionParams(coulomb_nm=0.3, stiction_nm=0.5)
        assert apply_friction(p, 0.49, 0.0) == 0.0
        assert apply_friction(p, -0.5, 0.0) == 0.0

    def test_breakaway(self):
        p = FrictionParams(coulomb_nm=0.3, stiction_nm=0.5)
        assert apply_friction(p, 0.6, 0.0) == pytest.approx(0.3)
        assert apply_friction(p, -0.6, 0.0) == pytest.approx(-0.3)

    def test_viscous_term(self):
        p = FrictionParams(coulomb_nm=0.1, viscous_nm_per_rad_s=0.2,
                           stiction_nm=0.1)
        assert apply_friction(p, 1.0, 2.0) == pytest.approx(1.0 - 0.1 - 0.4)

    def test_stationary_sign_preserved(self):
        p = FrictionParams(coulomb_nm=0.3, stiction_nm=0.5)
        out = apply_friction(p, 0.8, 0.0)
        assert 0.0 < out <= 0.8

    @given(tau=st.floats(-3, 3), v=st.floats(-10, 10))
    def test_friction_dissipates(self, tau, v):
        # Friction never adds energy: the torque it removes opposes motion.
        p = FrictionParams(coulomb_nm=0.48, viscous_nm_per_rad_s=0.05,
                           stiction_nm=0.48)
        out = apply_friction(p, tau, v)
        if abs(v) > p.v_stop_rad_s:
            assert (tau - out) * v >= 0.0
        else:
            assert abs(out) <= abs(tau) + 1e-12
            assert out == 0.0 or math.copysign(1, out) == math.copysign(1, tau)

    def test_stiction_below_coulomb_rejected(self):
        with pytest.raises(ValueError):
            FrictionParams(coulomb_nm=0.5, stiction_nm=0.3)

    def test_quasi_static_sweep_loop_width(self):
        # Dense numerical sweep of a gravity load: lifting needs +coulomb,
        # lowering needs -coulomb, so the loop width is 2*coulomb.
        p = FrictionParams(coulomb_nm=0.48, viscous_nm_per_rad_s=0.0,
                           stiction_nm=0.48)
        mgl = 1.47
        thetas = np.linspace(-0.7, 0.7, 4000)
        up = np.array([mgl * math.sin(t) - apply_friction(p, 0.0, +0.1) for t in thetas])
        down = np.array([mgl * math.sin(t) - apply_friction(p, 0.0, -0.1) for t in thetas])
        width = np.max(up - down)
        assert width == pytest.approx(2 * 0.48, rel=0.02)

    def test_zero_friction_zero_loop(self):
        p = FrictionParams(coulomb_nm=0.0, viscous_nm_per_rad_s=0.0,
                           stiction_nm=0.0)
        assert apply_friction(p, 0.7, 0.3) == pytest.approx(0.7)


class TestTorqueEstimation:
    def test_zero_current(self):
        assert estimate_torque_from_current(0.0, 0.0136, UJOINT_DRIVE) == 0.0

    def test_round_trip_at_continuous_rating(self):
        k_t = 0.0136
        current = motor_current_for_joint_torque(2.1, k_t, UJOINT_DRIVE)
        assert estimate_torque_from_current(current, k_t, UJOINT_DRIVE) == pytest.approx(2.1)

    @given(tau=st.floats(-2.7, 2.7))
    def test_inverse_property(self, tau):
        k_t = 0.0136
        current = motor_current_for_joint_torque(tau, k_t, UJOINT_DRIVE)
        assert estimate_torque_from_current(current, k_t, UJOINT_DRIVE) == pytest.approx(tau, abs=1e-12)

    def test_efficiency_scales_estimate(self):
        spec = TransmissionSpec(12000.0, (44.0, 3.125), 2.1, 2.7, efficiency=0.8)
        assert estimate_torque_from_current(1.0, 0.01, spec) == pytest.approx(
            1.0 * 0.01 * 137.5 * 0.8
        )


class TestEncoders:
    def test_tick_resolution(self):
        assert encoder_tick_deg(14) == pytest.approx(0.02197265625)
        assert abs(encoder_tick_deg(14) - 0.022) < 0.0005

    def test_zero(self):
        assert quantize_encoder(0.0, 14) == 0

    def test_pi_is_half_range(self):
        assert quantize_encoder(math.pi, 14) == 8192

    def test_bits_bounds(self):
        with pytest.raises(ValueError):
            quantize_encoder(0.1, 0)
        with pytest.raises(ValueError):
            quantize_encoder(0.1, 33)

    @given(st.floats(0.0, 2 * math.pi - 1e-9))
    def test_round_trip_within_half_tick(self, theta):
        tick = 2 * math.pi / 2 ** 14
        back = dequantize_encoder(quantize_encoder(theta, 14), 14)
        err = abs(back - theta)
        err = min(err, 2 * math.pi - err)
        assert err <= tick / 2 + 1e-12


class TestSlipDetection:
    def test_consistent_pair(self):
        # 90 degrees on the joint, matching count on the motor side.
        pair = EncoderPair(joint_ticks=4096, motor_ticks=137500 // 4,
                           gear_ratio=137.5, motor_ticks_per_rev=1000)
        assert detect_slip(pair, math.radians(1.0)) == "ok"

    def test_motor_advanced_joint_static(self):
        # Motor turned 10 degrees worth at the joint; joint never moved.
        motor_ticks = round(10.0 / 360.0 * 137.5 * 1000)
        pair = EncoderPair(joint_ticks=0, motor_ticks=motor_ticks,
                           gear_ratio=137.5, motor_ticks_per_rev=1000)
        assert detect_slip(pair, math.radians(1.0)) == "slip"

    def test_boundary_is_ok(self):
        # Discrepancy exactly at the threshold: strict inequality, no slip.
        pair = EncoderPair(joint_ticks=0, motor_ticks=1000,
                           gear_ratio=1.0, motor_ticks_per_rev=16384)
        threshold = pair.motor_angle_rad
        assert detect_slip(pair, threshold) == "ok"

    def test_threshold_validation(self):
        pair = EncoderPair(0, 0, 1.0)
        with pytest.raises(ValueError):
            detect_slip(pair, 0.0)
