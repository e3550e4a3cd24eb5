"""Motor, gearbox, and transmission models.

Covers speed/torque limited transmissions, screw lead speed, Karnopp-style
stick-slip friction, current-based torque estimation, encoder quantization,
and redundant-encoder slip detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

# Cogging repeats per output revolution; only matters when an amplitude is set.
COGGING_CYCLES_PER_REV = 12


@dataclass(frozen=True)
class TransmissionSpec:
    """Motor speed limit plus stacked reduction stages and torque ratings."""

    motor_speed_limit_rpm: float
    stage_ratios: tuple[float, ...]
    continuous_torque_nm: float
    peak_torque_nm: float
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")
        if self.peak_torque_nm < self.continuous_torque_nm:
            raise ValueError("peak torque must be >= continuous torque")

    @property
    def total_ratio(self) -> float:
        r = 1.0
        for s in self.stage_ratios:
            r *= s
        return r

    @property
    def output_speed_limit_rpm(self) -> float:
        return self.motor_speed_limit_rpm / self.total_ratio


# Screw drive: 35:1 gearhead into a 3.4:1 pinion-ring stage.
SCREW_DRIVE = TransmissionSpec(
    motor_speed_limit_rpm=12000.0,
    stage_ratios=(35.0, 3.4),
    continuous_torque_nm=1.6,
    peak_torque_nm=2.0,
)

# U-joint drive: 44:1 gearhead into a 3.125:1 timing-belt stage.
UJOINT_DRIVE = TransmissionSpec(
    motor_speed_limit_rpm=12000.0,
    stage_ratios=(44.0, 3.125),
    continuous_torque_nm=2.1,
    peak_torque_nm=2.7,
)


@dataclass(frozen=True)
class FrictionParams:
    """Joint-output friction decomposition. All torques in N*m."""

    coulomb_nm: float = 0.48
    viscous_nm_per_rad_s: float = 0.0
    stiction_nm: float = 0.48
    cogging_amplitude_nm: float = 0.0
    # Below this speed the joint is treated as stationary (Karnopp switch).
    v_stop_rad_s: float = 1e-3

    def __post_init__(self) -> None:
        for name in ("coulomb_nm", "viscous_nm_per_rad_s", "stiction_nm",
                     "cogging_amplitude_nm", "v_stop_rad_s"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.stiction_nm < self.coulomb_nm:
            raise ValueError("stiction must be >= coulomb")


@dataclass(frozen=True)
class EncoderPair:
    """Unwrapped tick counts from the joint-side absolute encoder and the
    motor-side incremental encoder, related through the gear ratio."""

    joint_ticks: int
    motor_ticks: int
    gear_ratio: float
    joint_bits: int = 14
    motor_ticks_per_rev: int = 1024

    @property
    def joint_angle_rad(self) -> float:
        return self.joint_ticks * TWO_PI / (1 << self.joint_bits)

    @property
    def motor_angle_rad(self) -> float:
        return self.motor_ticks * TWO_PI / self.motor_ticks_per_rev


def output_speed(spec: TransmissionSpec, motor_rpm: float) -> float:
    """Output-shaft speed after clamping motor speed to its electronic limit."""
    lim = spec.motor_speed_limit_rpm
    clamped = min(max(motor_rpm, -lim), lim)
    return clamped / spec.total_ratio


def screw_lead_speed(screw_rpm: float, helical_pitch_mm: float) -> float:
    """Axial advance speed (m/s) of a screw turning at screw_rpm."""
    if helical_pitch_mm <= 0.0:
        raise ValueError("helical pitch must be positive")
    return helical_pitch_mm * 1e-3 * screw_rpm / 60.0


def apply_friction(
    params: FrictionParams,
    applied_torque_nm: float,
    velocity_rad_s: float,
    angle_rad: float = 0.0,
) -> float:
    """Torque transmitted to the joint output through the friction stage.

    Moving: coulomb, viscous, and cogging terms are subtracted from the
    applied torque. Stationary: nothing is transmitted until the applied
    torque exceeds stiction (breakaway), after which coulomb applies.
    """
    cogging = params.cogging_amplitude_nm * math.sin(COGGING_CYCLES_PER_REV * angle_rad)
    if abs(velocity_rad_s) > params.v_stop_rad_s:
        return (
            applied_torque_nm
            - math.copysign(params.coulomb_nm, velocity_rad_s)
            - params.viscous_nm_per_rad_s * velocity_rad_s
            - cogging
        )
    if abs(applied_torque_nm) <= params.stiction_nm:
        return 0.0
    return applied_torque_nm - math.copysign(params.coulomb_nm, applied_torque_nm)


def estimate_torque_from_current(
    current_a: float, torque_constant_nm_per_a: float, spec: TransmissionSpec
) -> float:
    """Joint-side torque inferred from motor current through the reduction."""
    return current_a * torque_constant_nm_per_a * spec.total_ratio * spec.efficiency


def motor_current_for_joint_torque(
    joint_torque_nm: float, torque_constant_nm_per_a: float, spec: TransmissionSpec
) -> float:
    """Inverse of estimate_torque_from_current; used by the plant model."""
    return joint_torque_nm / (spec.total_ratio * spec.efficiency * torque_constant_nm_per_a)


def quantize_encoder(angle_rad: float, bits: int = 14) -> int:
    """Tick count of an absolute encoder with 2**bits counts per revolution."""
    if not 1 <= bits <= 32:
        raise ValueError("bits must be in [1, 32]")
    n = 1 << bits
    return round(angle_rad / (TWO_PI / n)) % n


def dequantize_encoder(ticks: int, bits: int = 14) -> float:
    """Angle in [0, 2*pi) represented by a tick count."""
    n = 1 << bits
    return (ticks % n) * (TWO_PI / n)


def encoder_tick_deg(bits: int = 14) -> float:
    return 360.0 / (1 << bits)


def detect_slip(pair: EncoderPair, threshold_rad: float) -> str:
    """Compare the two encoders through the gear ratio.

    Returns "slip" when the unwrapped angles disagree by strictly more than
    the threshold, else "ok".
    """
    if threshold_rad <= 0.0:
        raise ValueError("threshold must be positive")
    discrepancy = abs(pair.joint_angle_rad - pair.motor_angle_rad / pair.gear_ratio)
    return "slip" if discrepancy > threshold_rad else "ok"
