"""Deterministic fixed-step simulation world.

One stepper owns the virtual clock and advances every module node in id
order. The base tick is 4 ms: the 125 Hz control loops run every second base
tick and the 50 Hz interface loops every fifth, which reproduces the 2/3
alternation of control cycles between state publications. All randomness
comes from the seed, so equal seeds give bit-identical runs.
"""

from __future__ import annotations

import math
import threading
from typing import Callable, Optional

import numpy as np

from ..config import SimConfig
from ..control import JointCommand, ModuleParams, ModuleSim, ModuleState
from ..kinematics import JointAngles, chain_fk, rotation_to_quaternion
from ..locomotion import (
    PlanarPose,
    TerrainParams,
    Twist2_5D,
    contacts_from_chain,
    integrate_pose,
    solve_body_twist,
)

BASE_DT = 0.004
CONTROL_EVERY = 2    # 125 Hz
INTERFACE_EVERY = 5  # 50 Hz

RPM_TO_RAD_S = 2.0 * math.pi / 60.0


def module_params_from_config(config: SimConfig) -> ModuleParams:
    c = config.control
    return ModuleParams(
        ujoint_spec=config.ujoint_drive,
        screw_spec=config.screw_drive,
        friction=config.friction,
        kp=c.kp,
        ki=c.ki,
        kd=c.kd,
        output_limit=c.output_limit,
        integral_limit=c.integral_limit,
        derivative_cutoff_hz=c.derivative_cutoff_hz,
        joint_inertia_kg_m2=c.joint_inertia_kg_m2,
        screw_time_constant_s=c.screw_time_constant_s,
        screw_inertia_kg_m2=c.screw_inertia_kg_m2,
        screw_drag_nm_per_rad_s=c.screw_drag_nm_per_rad_s,
        encoder_bits=c.encoder_bits,
        torque_constant_nm_per_a=c.torque_constant_nm_per_a,
        current_noise_sigma_a=c.current_noise_sigma_a,
        command_staleness_s=c.command_staleness_s,
        ambient_temperature_c=c.ambient_temperature_c,
        stiction_ff_fraction=c.stiction_ff_fraction,
        current_filter_cutoff_hz=c.current_filter_cutoff_hz,
    )


class SimWorld:
    """Module sims plus the locomotion integrator under one virtual clock.

    Module i's U-joint shapes the chain between body i and body i+1; the last
    module's U-joint is the spare attachment point and does not enter the
    chain geometry.
    """

    def __init__(self, config: SimConfig, seed: int = 0,
                 terrain: Optional[TerrainParams] = None,
                 n_modules: Optional[int] = None,
                 locomotion_enabled: bool = True):
        self.config = config
        self.chain = config.chain
        n = n_modules if n_modules is not None else config.chain.n_bodies
        params = module_params_from_config(config)
        self.modules = [ModuleSim(i, params, seed) for i in range(n)]
        self.terrain = terrain if terrain is not None else config.terrain
        self.locomotion_enabled = locomotion_enabled and n >= 1
        self.pose = PlanarPose()
        self.last_twist = Twist2_5D(0.0, 0.0, 0.0)
        self.tick = 0
        self.series: list[dict] = []
        self.record_series = True
        self.on_sample: Optional[Callable[[dict], None]] = None
        self._pending: list[JointCommand] = []
        self._pending_lock = threading.Lock()
        self._encoder_tick_rad = 2.0 * math.pi / (1 << params.encoder_bits)

    # Time ------------------------------------------------------------------

    @property
    def time_s(self) -> float:
        return self.tick * BASE_DT

    # Commands ----------------------------------------------------------------

    def enqueue_command(self, cmd: JointCommand) -> None:
        """Thread-safe entry point for bus-delivered commands."""
        with self._pending_lock:
            self._pending.append(cmd)

    def command_module(self, cmd: JointCommand) -> None:
        if not 0 <= cmd.module_id < len(self.modules):
            return
        self.modules[cmd.module_id].apply_command(cmd)

    def command_joints(self, all_q: list[JointAngles],
                       screw_rpm: float = 0.0) -> None:
        """Setpoints for the chain joints; unlisted modules get zeros."""
        for i, m in enumerate(self.modules):
            q = all_q[i] if i < len(all_q) else JointAngles()
            m.apply_command(JointCommand(i, q, screw_rpm, stamp=self.time_s))

    def command_screws(self, rpm: float) -> None:
        for m in self.modules:
            m.apply_command(
                JointCommand(
                    m.module_id,
                    JointAngles(m.q_setpoint[0], m.q_setpoint[1]),
                    rpm,
                    stamp=self.time_s,
                )
            )

    # Stepping ------------------------------------------------------------------

    def step_base_tick(self) -> Optional[dict]:
        """Advance one 4 ms base tick; returns the sample on interface ticks."""
        self.tick += 1
        sample = None
        if self.tick % CONTROL_EVERY == 0:
            with self._pending_lock:
                pending, self._pending = self._pending, []
            for cmd in pending:
                self.command_module(cmd)
            dt = BASE_DT * CONTROL_EVERY
            for m in self.modules:
                m.control_tick(dt)
        # Pose integrates every base tick so 50 Hz samples always span the
        # same number of integration steps.
        if self.locomotion_enabled:
            self._update_locomotion(BASE_DT)
        if self.tick % INTERFACE_EVERY == 0:
            sample = self._interface_sample()
            if self.record_series:
                self.series.append(sample)
            if self.on_sample is not None:
                self.on_sample(sample)
        return sample

    def run_for(self, seconds: float) -> None:
        n = round(seconds / BASE_DT)
        for _ in range(n):
            self.step_base_tick()

    def run_until(self, predicate: Callable[["SimWorld"], bool],
                  timeout_s: float) -> bool:
        """Step until the predicate holds at an interface tick; False on
        timeout."""
        deadline = self.time_s + timeout_s
        while self.time_s < deadline:
            sample = self.step_base_tick()
            if sample is not None and predicate(self):
                return True
        return False

    # Derived state ------------------------------------------------------------

    def chain_joint_angles(self) -> list[JointAngles]:
        return [
            JointAngles(m.q[0], m.q[1])
            for m in self.modules[: self.chain.n_joints]
        ]

    def joints_converged(self, tol_rad: Optional[float] = None) -> bool:
        tol = tol_rad if tol_rad is not None else self._encoder_tick_rad
        for m in self.modules:
            for axis in range(2):
                if abs(m.measured_angle(axis) - m.q_setpoint[axis]) > tol:
                    return False
        return True

    def _update_locomotion(self, dt: float) -> None:
        if len(self.modules) < self.chain.n_bodies:
            return
        all_q = [
            JointAngles(m.q[0], m.q[1]).clamped()
            for m in self.modules[: self.chain.n_joints]
        ]
        poses = chain_fk(self.chain, all_q)
        contacts = contacts_from_chain(
            self.chain, poses, self.terrain, self.config.screw_geometry.lead_m
        )
        if not contacts:
            self.last_twist = Twist2_5D(0.0, 0.0, 0.0)
            return
        omegas = [
            self.modules[c.body_index].screw_rpm * RPM_TO_RAD_S for c in contacts
        ]
        self.last_twist = solve_body_twist(contacts, omegas)
        self.pose = integrate_pose(self.pose, self.last_twist, dt)

    def _interface_sample(self) -> dict:
        t = self.time_s
        states = []
        poses = None
        if len(self.modules) >= self.chain.n_bodies:
            all_q = [
                JointAngles(m.q[0], m.q[1]).clamped()
                for m in self.modules[: self.chain.n_joints]
            ]
            poses = chain_fk(self.chain, all_q)
        for i, m in enumerate(self.modules):
            if poses is not None and i < len(poses):
                ct, st = math.cos(self.pose.theta), math.sin(self.pose.theta)
                rz = np.array([[ct, -st, 0.0], [st, ct, 0.0], [0.0, 0.0, 1.0]])
                world_rot = rz @ poses[i].rotation
                m.imu_orientation = rotation_to_quaternion(world_rot)
            state = m.interface_tick()
            state.timestamp = t
            states.append(state.to_dict())
        sample = {
            "t": t,
            "pose": self.pose.to_dict(),
            "twist": {
                "vx": self.last_twist.vx,
                "vy": self.last_twist.vy,
                "omega_z": self.last_twist.omega_z,
            },
            "modules": states,
        }
        if poses is not None:
            sample["body_poses"] = [
                {
                    "position_cm": [float(v) for v in p.translation],
                    "quaternion": list(rotation_to_quaternion(p.rotation)),
                }
                for p in poses
            ]
        return sample
