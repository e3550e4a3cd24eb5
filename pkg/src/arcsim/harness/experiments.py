"""Scripted experiment runs and their derived metrics.

Every experiment produces an ExperimentRecord: a config snapshot, the raw
50 Hz sample series, and a metrics dict that is recomputable from the series
alone. Runs are deterministic for a fixed seed, so the canonical metrics
bytes double as a regression fingerprint.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..actuation import output_speed
from ..config import SimConfig
from ..control import JointCommand
from ..kinematics import JOINT_LIMIT_RAD, JointAngles, preset_configuration
from .simworld import BASE_DT, SimWorld
from .power import power_budget_check, supply

G = 9.80665

EXPERIMENT_NAMES = ("config", "transparency", "pendulum")


@dataclass
class ExperimentRecord:
    name: str
    config_snapshot: dict
    series: list[dict] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    def metrics_block(self) -> bytes:
        """Canonical bytes of the metrics dict; equal runs give equal bytes."""
        return json.dumps(self.metrics, sort_keys=True,
                          separators=(",", ":")).encode("utf-8")

    def metrics_sha256(self) -> str:
        return hashlib.sha256(self.metrics_block()).hexdigest()


def _round9(x: float) -> float:
    # Metrics are stored at nanoscale resolution so recomputation from the
    # JSON round trip stays within 1e-9.
    return float(round(x, 9))


# Configuration experiment ----------------------------------------------------

def run_configuration_experiment(config: SimConfig, preset: str, seed: int = 0,
                                 settle_timeout_s: float = 10.0,
                                 drive_duration_s: float = 5.0,
                                 terrain_name: str | None = None) -> ExperimentRecord:
    """Regulate the joints to a preset, then drive the screws and record the
    pose track."""
    angles = preset_configuration(preset, config.chain.n_joints)
    if terrain_name is None:
        terrain_name = "rigid" if preset == "square" else "granular"
    terrain = config.terrains[terrain_name]
    world = SimWorld(config, seed=seed, terrain=terrain)
    world.command_joints(angles)

    converged = world.run_until(lambda w: w.joints_converged(), settle_timeout_s)
    if converged:
        # Hold the pose briefly, then drive.
        world.run_for(0.2)
        screw_rpm = output_speed(config.screw_drive,
                                 config.screw_drive.motor_speed_limit_rpm)
        world.command_screws(screw_rpm)
        world.run_for(drive_duration_s)

    record = ExperimentRecord(
        name="config",
        config_snapshot=config.snapshot(),
        series=world.series,
    )
    record.metrics = compute_configuration_metrics(
        record.series, record.config_snapshot, preset
    )
    return record


def compute_configuration_metrics(series: list[dict], snapshot: dict,
                                  preset: str) -> dict:
    tick_rad = 2.0 * math.pi / (1 << snapshot["control"]["encoder_bits"])

    def sample_converged(s: dict) -> bool:
        return all(
            abs(m["q_measured"][a] - m["q_setpoint"][a]) <= tick_rad
            for m in s["modules"]
            for a in range(2)
        )

    # Convergence time: first sample from which every later sample stays
    # within one encoder tick of the setpoints.
    convergence_time = None
    ok_flags = [sample_converged(s) for s in series]
    for i in range(len(series)):
        if all(ok_flags[i:]):
            convergence_time = series[i]["t"]
            break
    converged = convergence_time is not None

    speeds = []
    xs = []
    for i in range(1, len(series)):
        dt = series[i]["t"] - series[i - 1]["t"]
        if dt <= 0:
            continue
        dx = series[i]["pose"]["x"] - series[i - 1]["pose"]["x"]
        dy = series[i]["pose"]["y"] - series[i - 1]["pose"]["y"]
        speeds.append(math.hypot(dx, dy) / dt)
        xs.append(series[i]["pose"]["x"])
    final = series[-1]["pose"] if series else {"x": 0.0, "y": 0.0, "theta": 0.0}
    x_monotone = all(b >= a - 1e-12 for a, b in zip(xs, xs[1:])) if xs else True
    max_yaw_rate = max(
        (abs(s["twist"]["omega_z"]) for s in series), default=0.0
    )
    power = power_budget_check(series, snapshot)
    return {
        "experiment": "config",
        "preset": preset,
        "converged": converged,
        "convergence_time_s": _round9(convergence_time) if converged else None,
        "max_speed_mps": _round9(max(speeds, default=0.0)),
        "max_yaw_rate_rad_s": _round9(max_yaw_rate),
        "x_monotone": x_monotone,
        "final_pose": {k: _round9(v) for k, v in final.items()},
        "power_ok": power["ok"],
        "max_module_w": _round9(power["max_module_w"]),
        "max_system_w": _round9(power["max_system_w"]),
        "samples": len(series),
    }


# Torque-transparency experiment -----------------------------------------------

def run_transparency_experiment(config: SimConfig, mass_kg: float | None = None,
                                length_m: float | None = None,
                                amplitude_deg: float | None = None,
                                period_s: float | None = None,
                                duration_s: float | None = None,
                                seed: int = 0) -> ExperimentRecord:
    """Quasi-static bidirectional sweep of a gravity-loaded joint, comparing
    current-estimated torque against the known gravity torque.

    The default duration is one full sweep cycle. A half cycle already
    visits every positive angle in both directions, so shorter runs still
    produce the loop.
    """
    ex = config.experiments
    mass = mass_kg if mass_kg is not None else ex.cantilever_mass_kg
    length = length_m if length_m is not None else ex.cantilever_length_m
    amp_deg = amplitude_deg if amplitude_deg is not None else ex.transparency_amplitude_deg
    period = period_s if period_s is not None else ex.transparency_period_s
    duration = duration_s if duration_s is not None else period
    amp = math.radians(amp_deg)
    if amp > JOINT_LIMIT_RAD:
        raise ValueError("sweep amplitude exceeds the joint limit")
    if period < 20.0:
        raise ValueError("sweep must be quasi-static (period >= 20 s)")

    world = SimWorld(config, seed=seed, n_modules=1, locomotion_enabled=False)
    module = world.modules[0]
    mgl = mass * G * length
    # The joint carries the cantilever against gravity on the pitch axis.
    module.external_torque = (
        lambda axis, q, t: -mgl * math.sin(q) if axis == 0 else 0.0
    )

    def sweep_step() -> None:
        sp = amp * math.sin(2.0 * math.pi * world.time_s / period)
        module.apply_command(
            JointCommand(0, JointAngles(sp, 0.0), 0.0, stamp=world.time_s)
        )

    n_ticks = round(duration / BASE_DT)
    for _ in range(n_ticks):
        sweep_step()
        world.step_base_tick()

    record = ExperimentRecord(
        name="transparency",
        config_snapshot=config.snapshot(),
        series=world.series,
    )
    record.metrics = compute_transparency_metrics(
        record.series, record.config_snapshot, mass, length
    )
    return record


def transparency_samples(series: list[dict], snapshot: dict, mass_kg: float,
                         length_m: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(angle, true torque, estimated torque) arrays from the raw series."""
    control = snapshot["control"]
    spec = snapshot["ujoint_drive"]
    ratio = 1.0
    for r in spec["stage_ratios"]:
        ratio *= r
    k_t = control["torque_constant_nm_per_a"]
    mgl = mass_kg * G * length_m
    angles = np.array([s["modules"][0]["q_measured"][0] for s in series])
    currents = np.array([s["modules"][0]["joint_currents_a"][0] for s in series])
    tau_est = currents * k_t * ratio * spec["efficiency"]
    tau_true = mgl * np.sin(angles)
    return angles, tau_true, tau_est


def compute_transparency_metrics(series: list[dict], snapshot: dict,
                                 mass_kg: float, length_m: float,
                                 n_bins: int = 25) -> dict:
    angles, tau_true, tau_est = transparency_samples(
        series, snapshot, mass_kg, length_m
    )
    err = np.abs(tau_est - tau_true)
    # Split by sweep direction and bin by angle; the loop width is the gap
    # between the ascending and descending branches at equal angle.
    d = np.diff(angles)
    direction = np.zeros(len(angles))
    eps = 1e-5
    direction[1:] = np.where(d > eps, 1.0, np.where(d < -eps, -1.0, 0.0))
    amax = np.max(np.abs(angles)) if len(angles) else 0.0
    edges = np.linspace(-0.8 * amax, 0.8 * amax, n_bins + 1)
    widths = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (angles >= lo) & (angles < hi)
        up = tau_est[sel & (direction > 0)]
        down = tau_est[sel & (direction < 0)]
        if len(up) and len(down):
            widths.append(float(np.mean(up) - np.mean(down)))
    return {
        "experiment": "transparency",
        "cantilever_mass_kg": _round9(mass_kg),
        "cantilever_length_m": _round9(length_m),
        "hysteresis_width_nm": _round9(max(widths)) if widths else 0.0,
        "max_error_nm": _round9(float(np.max(err))) if len(err) else 0.0,
        "samples": len(series),
    }


# Pendulum voltage-robustness experiment ---------------------------------------

def run_pendulum_voltage_experiment(config: SimConfig,
                                    v_in_list: tuple[float, ...] = (12.0, 24.0, 36.0),
                                    off_angle_deg: float | None = None,
                                    period_s: float | None = None,
                                    seed: int = 0) -> ExperimentRecord:
    """Single module clamped at the U-joint base tracking a circular
    trajectory, repeated across input voltages. The regulated rail makes the
    plant independent of the input, so healthy runs are identical."""
    ex = config.experiments
    off_deg = off_angle_deg if off_angle_deg is not None else ex.pendulum_off_angle_deg
    period = period_s if period_s is not None else ex.pendulum_circle_period_s
    amp = math.radians(off_deg)
    mgl = ex.pendulum_mass_kg * G * ex.pendulum_arm_m

    all_series: list[dict] = []
    faulted: list[float] = []
    for v_in in v_in_list:
        rail = supply(v_in, config.power)
        if rail.fault:
            faulted.append(float(v_in))
            continue
        world = SimWorld(config, seed=seed, n_modules=1, locomotion_enabled=False)
        module = world.modules[0]
        # Inverted-pendulum load: gravity pushes the body away from upright.
        module.external_torque = (
            lambda axis, q, t: mgl * math.sin(q)
        )
        warmup = period
        total = 2.0 * period
        n_ticks = round(total / BASE_DT)
        for _ in range(n_ticks):
            t = world.time_s
            sp_p = amp * math.cos(2.0 * math.pi * t / period)
            sp_y = amp * math.sin(2.0 * math.pi * t / period)
            module.apply_command(
                JointCommand(0, JointAngles(sp_p, sp_y), 0.0, stamp=t)
            )
            world.step_base_tick()
        for s in world.series:
            s["v_in"] = float(v_in)
            s["warmup_s"] = warmup
        all_series.extend(world.series)

    record = ExperimentRecord(
        name="pendulum",
        config_snapshot=config.snapshot(),
        series=all_series,
    )
    record.metrics = compute_pendulum_metrics(
        record.series, record.config_snapshot, [float(v) for v in v_in_list],
        faulted,
    )
    return record


def compute_pendulum_metrics(series: list[dict], snapshot: dict,
                             v_in_list: list[float],
                             faulted: list[float]) -> dict:
    by_voltage: dict[float, list[dict]] = {}
    for s in series:
        by_voltage.setdefault(s["v_in"], []).append(s)

    rms_by_voltage: dict[str, float] = {}
    trajs: dict[float, np.ndarray] = {}
    for v, samples in sorted(by_voltage.items()):
        warmup = samples[0].get("warmup_s", 0.0)
        q = np.array([s["modules"][0]["q_measured"] for s in samples])
        sp = np.array([s["modules"][0]["q_setpoint"] for s in samples])
        t = np.array([s["t"] for s in samples])
        steady = t >= warmup
        err = q[steady] - sp[steady]
        rms = math.degrees(float(np.sqrt(np.mean(err ** 2)))) if steady.any() else 0.0
        rms_by_voltage[f"{v:g}"] = _round9(rms)
        trajs[v] = q

    max_pairwise = 0.0
    voltages = sorted(trajs)
    for i in range(len(voltages)):
        for j in range(i + 1, len(voltages)):
            a, b = trajs[voltages[i]], trajs[voltages[j]]
            n = min(len(a), len(b))
            if n:
                max_pairwise = max(
                    max_pairwise, float(np.max(np.abs(a[:n] - b[:n])))
                )

    digest = hashlib.sha256()
    for v in voltages:
        digest.update(trajs[v].tobytes())

    return {
        "experiment": "pendulum",
        "voltages": [float(v) for v in v_in_list],
        "faulted_voltages": faulted,
        "rms_error_deg_by_voltage": rms_by_voltage,
        "max_pairwise_traj_diff_rad": _round9(max_pairwise),
        "trajectory_digest": digest.hexdigest(),
    }


# Shared dispatch ----------------------------------------------------------------

def recompute_metrics(record: ExperimentRecord) -> dict:
    """Rebuild the metrics dict from the raw series; must equal the stored
    metrics within 1e-9."""
    snap = record.config_snapshot
    if record.name == "config":
        m = record.metrics
        return compute_configuration_metrics(record.series, snap, m["preset"])
    if record.name == "transparency":
        m = record.metrics
        return compute_transparency_metrics(
            record.series, snap, m["cantilever_mass_kg"], m["cantilever_length_m"]
        )
    if record.name == "pendulum":
        m = record.metrics
        return compute_pendulum_metrics(
            record.series, snap, m["voltages"], m["faulted_voltages"]
        )
    raise KeyError(f"unknown experiment {record.name!r}")
