"""Per-module control stack.

Each module runs two logical periodic tasks: a 125 Hz loop that regulates the
two U-joint axes with PID on quantized absolute-encoder feedback, tracks the
screw velocity setpoint through a first-order driver model, and integrates
the simulated joint motion; and a 50 Hz loop that snapshots a ModuleState for
publication. Modules are independent of each other; all cross-module
interaction goes over the bus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .actuation import (
    TWO_PI,
    EncoderPair,
    FrictionParams,
    TransmissionSpec,
    SCREW_DRIVE,
    UJOINT_DRIVE,
    apply_friction,
    dequantize_encoder,
    detect_slip,
    motor_current_for_joint_torque,
    output_speed,
    quantize_encoder,
)
from .kinematics import JOINT_LIMIT_RAD, JointAngles, wrap_angle

CONTROL_RATE_HZ = 125.0
INTERFACE_RATE_HZ = 50.0

AXIS_NAMES = ("pitch", "yaw")


@dataclass
class PidState:
    """Gains and runtime state of one PID position loop.

    Output is a duty fraction clamped to +/- output_limit; the integral is
    clamped to +/- integral_limit. The derivative acts on the error and is
    low-pass filtered to survive encoder quantization noise.
    """

    kp: float
    ki: float
    kd: float
    output_limit: float = 1.0
    integral_limit: float = 0.05
    derivative_cutoff_hz: float = 20.0
    integral: float = 0.0
    last_error: Optional[float] = None
    d_filtered: float = 0.0

    def reset(self) -> None:
        self.integral = 0.0
        self.last_error = None
        self.d_filtered = 0.0


def pid_step(state: PidState, setpoint: float, measurement: float, dt: float) -> float:
    """One PID update; mutates state and returns the clamped duty fraction."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    error = setpoint - measurement
    d_raw = 0.0 if state.last_error is None else (error - state.last_error) / dt
    tau_f = 1.0 / (2.0 * math.pi * state.derivative_cutoff_hz)
    alpha = dt / (dt + tau_f)
    state.d_filtered += alpha * (d_raw - state.d_filtered)
    state.last_error = error
    # Anti-windup: clamp the integral, and when the output would saturate in
    # the error's direction, pin the integral at the saturation boundary
    # (never moving it beyond this step's natural range).
    candidate = min(
        max(state.integral + error * dt, -state.integral_limit), state.integral_limit
    )
    unsat = state.kp * error + state.ki * candidate + state.kd * state.d_filtered
    if abs(unsat) <= state.output_limit or unsat * error <= 0.0:
        state.integral = candidate
    elif state.ki > 0.0:
        boundary = (
            math.copysign(state.output_limit, unsat)
            - state.kp * error
            - state.kd * state.d_filtered
        ) / state.ki
        lo, hi = min(state.integral, candidate), max(state.integral, candidate)
        state.integral = min(max(boundary, lo), hi)
    out = state.kp * error + state.ki * state.integral + state.kd * state.d_filtered
    return min(max(out, -state.output_limit), state.output_limit)


@dataclass(frozen=True)
class JointCommand:
    """Setpoint message for one module. Targets are clamped on receipt."""

    module_id: int
    q_target: JointAngles
    screw_velocity_target_rpm: float = 0.0
    stamp: float = 0.0

    def to_dict(self) -> dict:
        return {
            "module_id": self.module_id,
            "q_p": self.q_target.q_p,
            "q_y": self.q_target.q_y,
            "screw_rpm": self.screw_velocity_target_rpm,
            "stamp": self.stamp,
        }

    @staticmethod
    def from_dict(d: dict) -> "JointCommand":
        return JointCommand(
            module_id=int(d["module_id"]),
            q_target=JointAngles(float(d["q_p"]), float(d["q_y"])),
            screw_velocity_target_rpm=float(d.get("screw_rpm", 0.0)),
            stamp=float(d.get("stamp", 0.0)),
        )


@dataclass
class ModuleState:
    """Telemetry snapshot published by the 50 Hz interface task."""

    module_id: int
    timestamp: float
    q_measured: JointAngles
    q_setpoint: JointAngles
    screw_velocity_measured_rpm: float
    screw_velocity_setpoint_rpm: float
    joint_currents_a: tuple[float, float]
    screw_current_a: float
    imu_orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    temperature_c: float = 25.0
    slip_flags: tuple[bool, bool, bool] = (False, False, False)
    control_cycle: int = 0

    def to_dict(self) -> dict:
        return {
            "module_id": self.module_id,
            "timestamp": self.timestamp,
            "q_measured": [self.q_measured.q_p, self.q_measured.q_y],
            "q_setpoint": [self.q_setpoint.q_p, self.q_setpoint.q_y],
            "screw_rpm": self.screw_velocity_measured_rpm,
            "screw_rpm_setpoint": self.screw_velocity_setpoint_rpm,
            "joint_currents_a": list(self.joint_currents_a),
            "screw_current_a": self.screw_current_a,
            "imu_orientation": list(self.imu_orientation),
            "temperature_c": self.temperature_c,
            "slip_flags": list(self.slip_flags),
            "control_cycle": self.control_cycle,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModuleState":
        return ModuleState(
            module_id=int(d["module_id"]),
            timestamp=float(d["timestamp"]),
            q_measured=JointAngles(*[float(v) for v in d["q_measured"]]),
            q_setpoint=JointAngles(*[float(v) for v in d["q_setpoint"]]),
            screw_velocity_measured_rpm=float(d["screw_rpm"]),
            screw_velocity_setpoint_rpm=float(d["screw_rpm_setpoint"]),
            joint_currents_a=tuple(float(v) for v in d["joint_currents_a"]),
            screw_current_a=float(d["screw_current_a"]),
            imu_orientation=tuple(float(v) for v in d["imu_orientation"]),
            temperature_c=float(d.get("temperature_c", 25.0)),
            slip_flags=tuple(bool(v) for v in d.get("slip_flags", (False,) * 3)),
            control_cycle=int(d.get("control_cycle", 0)),
        )


@dataclass(frozen=True)
class ModuleParams:
    """Everything a module simulation needs, bundled from the config file."""

    ujoint_spec: TransmissionSpec = UJOINT_DRIVE
    screw_spec: TransmissionSpec = SCREW_DRIVE
    friction: FrictionParams = FrictionParams()
    kp: float = 40.0
    ki: float = 600.0
    kd: float = 1.0
    output_limit: float = 1.0
    integral_limit: float = 0.0025
    derivative_cutoff_hz: float = 20.0
    joint_inertia_kg_m2: float = 0.01
    screw_time_constant_s: float = 0.05
    screw_inertia_kg_m2: float = 0.002
    screw_drag_nm_per_rad_s: float = 0.05
    encoder_bits: int = 14
    torque_constant_nm_per_a: float = 0.0136
    current_noise_sigma_a: float = 0.0
    command_staleness_s: float = 0.5
    ambient_temperature_c: float = 25.0
    # Breakaway assist as a fraction of stiction, applied only while the
    # joint is stuck more than one encoder tick from target. Linear PID
    # alone cannot reach tick-level accuracy against stiction this large.
    stiction_ff_fraction: float = 0.3
    # Analog current-sense chain bandwidth; smooths control jitter out of
    # the reported motor currents without touching the plant dynamics.
    current_filter_cutoff_hz: float = 5.0

    def make_pid(self) -> PidState:
        return PidState(
            kp=self.kp,
            ki=self.ki,
            kd=self.kd,
            output_limit=self.output_limit,
            integral_limit=self.integral_limit,
            derivative_cutoff_hz=self.derivative_cutoff_hz,
        )


class ModuleSim:
    """Single module: joint plant, screw driver, PID loops, telemetry.

    One owner steps control_tick at 125 Hz and interface_tick at 50 Hz in
    simulated time. The instance is sendable between threads but must not be
    stepped concurrently.
    """

    def __init__(self, module_id: int, params: ModuleParams = ModuleParams(),
                 seed: int = 0):
        self.module_id = module_id
        self.params = params
        self.rng = np.random.default_rng(seed + 1000003 * module_id)
        self.t = 0.0
        self.control_cycle = 0
        self.missed_deadline_count = 0
        # Joint plant state, [pitch, yaw].
        self.q = np.zeros(2)
        self.omega = np.zeros(2)
        self.q_setpoint = np.zeros(2)
        # Screw state (output-shaft RPM after the reduction).
        self.screw_rpm = 0.0
        self.screw_rpm_setpoint = 0.0
        self.pids = [params.make_pid(), params.make_pid()]
        self.last_command_stamp = -math.inf
        # Hook for experiment loads: (axis_index, angle, t) -> external N*m.
        self.external_torque: Callable[[int, float, float], float] = (
            lambda axis, q, t: 0.0
        )
        self.imu_orientation = (1.0, 0.0, 0.0, 0.0)
        # Fault injection: offsets between motor-side and joint-side angles
        # make the redundant-encoder comparison trip (pitch, yaw, screw).
        self.motor_encoder_offset_rad = [0.0, 0.0, 0.0]
        self.slip_threshold_rad = math.radians(1.0)
        self.screw_angle = 0.0
        self.slip_flags = (False, False, False)
        self._joint_currents = (0.0, 0.0)
        self._screw_current = 0.0
        self._current_filt = [0.0, 0.0, 0.0]
        self._last_efforts = {"pitch_nm": 0.0, "yaw_nm": 0.0, "screw_nm": 0.0}

    def _tick_rad(self) -> float:
        return 2.0 * math.pi / (1 << self.params.encoder_bits)

    def _filter_current(self, channel: int, raw_a: float, dt: float) -> float:
        fc = self.params.current_filter_cutoff_hz
        if fc <= 0.0:
            return raw_a
        alpha = dt / (dt + 1.0 / (2.0 * math.pi * fc))
        self._current_filt[channel] += alpha * (raw_a - self._current_filt[channel])
        return self._current_filt[channel]

    def measured_angle(self, axis: int) -> float:
        ticks = quantize_encoder(self.q[axis], self.params.encoder_bits)
        return wrap_angle(dequantize_encoder(ticks, self.params.encoder_bits))

    def apply_command(self, cmd: JointCommand) -> None:
        """Latest command wins; targets are clamped, never rejected."""
        if cmd.stamp < self.last_command_stamp:
            return
        self.last_command_stamp = cmd.stamp
        clamped = cmd.q_target.clamped()
        self.q_setpoint[0] = clamped.q_p
        self.q_setpoint[1] = clamped.q_y
        spec = self.params.screw_spec
        self.screw_rpm_setpoint = output_speed(
            spec, cmd.screw_velocity_target_rpm * spec.total_ratio
        )

    def command_is_stale(self) -> bool:
        return self.t - self.last_command_stamp > self.params.command_staleness_s

    def control_tick(self, dt: float = 1.0 / CONTROL_RATE_HZ,
                     late_by_s: float = 0.0) -> dict:
        """One 125 Hz cycle. Returns the actuator efforts it produced."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        if late_by_s > 0.5 * dt:
            self.missed_deadline_count += 1
        p = self.params
        efforts = {}
        currents = []
        for axis in range(2):
            meas = self.measured_angle(axis)
            # Regulate to the setpoint as the encoder can see it; below one
            # tick the loop has no information and would only hunt.
            sp = wrap_angle(
                dequantize_encoder(
                    quantize_encoder(self.q_setpoint[axis], p.encoder_bits),
                    p.encoder_bits,
                )
            )
            duty = pid_step(self.pids[axis], sp, meas, dt)
            tau_cmd = duty * p.ujoint_spec.peak_torque_nm
            err = sp - meas
            if (
                abs(self.omega[axis]) <= p.friction.v_stop_rad_s
                and abs(err) > self._tick_rad()
            ):
                tau_cmd += math.copysign(
                    p.stiction_ff_fraction * p.friction.stiction_nm, err
                )
            tau_cmd = min(
                max(tau_cmd, -p.ujoint_spec.peak_torque_nm),
                p.ujoint_spec.peak_torque_nm,
            )
            tau_ext = self.external_torque(axis, self.q[axis], self.t)
            tau_app = tau_cmd + tau_ext
            tau_net = apply_friction(p.friction, tau_app, self.omega[axis], self.q[axis])
            v = self.omega[axis]
            if abs(v) <= p.friction.v_stop_rad_s and tau_net == 0.0:
                v_new = 0.0
            else:
                v_new = v + tau_net / p.joint_inertia_kg_m2 * dt
                # Coulomb friction alone never reverses motion: when the step
                # would flip the sign without enough torque to break stiction,
                # the joint sticks instead.
                if v * v_new < 0.0 and abs(tau_app) <= p.friction.stiction_nm:
                    v_new = 0.0
            self.omega[axis] = v_new
            self.q[axis] += v_new * dt
            # Hard stop at the joint limit. Integrating into the stop is
            # windup against plant saturation; dump that part of the integral.
            if abs(self.q[axis]) > JOINT_LIMIT_RAD:
                self.q[axis] = math.copysign(JOINT_LIMIT_RAD, self.q[axis])
                self.omega[axis] = 0.0
                pid = self.pids[axis]
                if pid.integral * self.q[axis] > 0.0:
                    pid.integral = 0.0
            current = motor_current_for_joint_torque(
                tau_cmd, p.torque_constant_nm_per_a, p.ujoint_spec
            )
            if p.current_noise_sigma_a > 0.0:
                current += self.rng.normal(0.0, p.current_noise_sigma_a)
            currents.append(self._filter_current(axis, current, dt))
            efforts[f"{AXIS_NAMES[axis]}_nm"] = tau_cmd

        # Screw velocity loop lives in the driver model: ideal first order
        # toward the clamped setpoint, acceleration limited by peak torque.
        rpm_err = self.screw_rpm_setpoint - self.screw_rpm
        rpm_rate = rpm_err / p.screw_time_constant_s
        max_rate = (
            p.screw_spec.peak_torque_nm / p.screw_inertia_kg_m2 * 60.0 / (2 * math.pi)
        )
        rpm_rate = min(max(rpm_rate, -max_rate), max_rate)
        self.screw_rpm += rpm_rate * dt
        omega_screw = self.screw_rpm * 2 * math.pi / 60.0
        screw_tau = (
            p.screw_inertia_kg_m2 * rpm_rate * 2 * math.pi / 60.0
            + p.screw_drag_nm_per_rad_s * omega_screw
        )
        screw_tau = min(
            max(screw_tau, -p.screw_spec.peak_torque_nm), p.screw_spec.peak_torque_nm
        )
        efforts["screw_nm"] = screw_tau
        self._screw_current = self._filter_current(
            2,
            motor_current_for_joint_torque(
                screw_tau, p.torque_constant_nm_per_a, p.screw_spec
            ),
            dt,
        )

        self.screw_angle += omega_screw * dt
        self._joint_currents = (currents[0], currents[1])
        self._last_efforts = efforts
        self.slip_flags = self._check_slip()
        self.control_cycle += 1
        self.t += dt
        return efforts

    def _check_slip(self) -> tuple[bool, bool, bool]:
        """Redundant-encoder comparison per actuator."""
        p = self.params
        flags = []
        for axis, (angle, spec) in enumerate((
            (self.q[0], p.ujoint_spec),
            (self.q[1], p.ujoint_spec),
            (self.screw_angle, p.screw_spec),
        )):
            ratio = spec.total_ratio
            motor_angle = (angle + self.motor_encoder_offset_rad[axis]) * ratio
            pair = EncoderPair(
                joint_ticks=round(angle / TWO_PI * (1 << p.encoder_bits)),
                motor_ticks=round(motor_angle / TWO_PI * 1024),
                gear_ratio=ratio,
                joint_bits=p.encoder_bits,
                motor_ticks_per_rev=1024,
            )
            flags.append(detect_slip(pair, self.slip_threshold_rad) == "slip")
        return (flags[0], flags[1], flags[2])

    def interface_tick(self, dt: float = 1.0 / INTERFACE_RATE_HZ) -> ModuleState:
        """Snapshot for publication; copies everything from one control cycle."""
        return ModuleState(
            module_id=self.module_id,
            timestamp=self.t,
            q_measured=JointAngles(self.measured_angle(0), self.measured_angle(1)),
            q_setpoint=JointAngles(self.q_setpoint[0], self.q_setpoint[1]),
            screw_velocity_measured_rpm=self.screw_rpm,
            screw_velocity_setpoint_rpm=self.screw_rpm_setpoint,
            joint_currents_a=self._joint_currents,
            screw_current_a=self._screw_current,
            imu_orientation=self.imu_orientation,
            temperature_c=self.params.ambient_temperature_c,
            slip_flags=self.slip_flags,
            control_cycle=self.control_cycle,
        )
