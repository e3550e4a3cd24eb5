"""Pydantic request/response models for the HTTP and WebSocket surfaces."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthOut(BaseModel):
    status: str = "ok"
    version: str
    broker_connected: bool = False
    modules_seen: int = 0


class PresetsOut(BaseModel):
    # name -> per-joint [pitch_deg, yaw_deg]
    presets: dict[str, list[list[float]]]


class CommandIn(BaseModel):
    """Teleop command for one module; degrees and output RPM at this surface."""

    kind: Literal["command"] = "command"
    module_id: int = Field(ge=0)
    pitch_deg: float = 0.0
    yaw_deg: float = 0.0
    screw_rpm: float = 0.0


class CommandAck(BaseModel):
    kind: Literal["ack"] = "ack"
    module_id: int
    applied_pitch_deg: float
    applied_yaw_deg: float
    applied_screw_rpm: float
    clamped: bool


class ErrorOut(BaseModel):
    kind: Literal["error"] = "error"
    detail: str


class ModuleStateOut(BaseModel):
    module_id: int
    timestamp: float
    q_measured_deg: list[float]
    q_setpoint_deg: list[float]
    screw_rpm: float
    screw_rpm_setpoint: float
    joint_currents_a: list[float]
    screw_current_a: float
    est_joint_torques_nm: list[float]
    imu_orientation: list[float]
    temperature_c: float
    slip_flags: list[bool]


class BodyPoseOut(BaseModel):
    position_cm: list[float]
    quaternion: list[float]


class PoseOut(BaseModel):
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0


class StateFrameOut(BaseModel):
    """One teleop stream frame; mirrors what the UI renders."""

    kind: Literal["state"] = "state"
    t: float
    modules: list[ModuleStateOut]
    body_poses: list[BodyPoseOut] = []
    world_pose: PoseOut = PoseOut()
    track: list[list[float]] = []


class ExperimentRequest(BaseModel):
    experiment: Literal["config", "transparency", "pendulum"]
    preset: str = "straight"
    vin: list[float] = [12.0, 24.0, 36.0]
    seed: int = 0
    config_path: Optional[str] = None
    include_series: bool = True


class ExperimentResponse(BaseModel):
    experiment: str
    metrics: dict
    metrics_sha256: str
    config_snapshot: dict
    series: Optional[list[dict]] = None
