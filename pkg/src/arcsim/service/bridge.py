"""Gateway bridge between the bus and web clients.

Subscribes to every module's state topic and the world pose, keeps only the
latest values, converts them into the UI frame schema (degrees at this
boundary), and forwards validated commands back onto the bus. Body poses are
taken from the authoritative simulation side so the UI never does kinematics.
"""

from __future__ import annotations

import math
import threading
import time
from collections import deque

from ..bus import BusNode, Frame
from ..config import SimConfig
from ..kinematics import JOINT_LIMIT_RAD
from ..actuation import estimate_torque_from_current, output_speed
from .models import (
    BodyPoseOut,
    CommandAck,
    CommandIn,
    ModuleStateOut,
    PoseOut,
    StateFrameOut,
)

TRACK_POINTS = 400


class GatewayBridge:
    def __init__(self, config: SimConfig, broker_host: str = "127.0.0.1",
                 broker_port: int | None = None):
        self.config = config
        port = broker_port if broker_port is not None else config.bus.port
        self.node = BusNode("gateway", broker_host, port)
        self._lock = threading.Lock()
        self._module_states: dict[int, dict] = {}
        self._world_pose = {"x": 0.0, "y": 0.0, "theta": 0.0}
        self._body_poses: list[dict] = []
        self._track: deque[list[float]] = deque(maxlen=TRACK_POINTS)
        self._last_update = 0.0

    def start(self) -> None:
        self.node.connect()
        self.node.subscribe("/module/*/state", self._on_state)
        self.node.subscribe("/system/pose", self._on_pose)
        self.node.subscribe("/system/body_poses", self._on_body_poses)

    def stop(self) -> None:
        self.node.close()

    @property
    def connected(self) -> bool:
        return self.node.connected

    @property
    def modules_seen(self) -> int:
        with self._lock:
            return len(self._module_states)

    # Bus callbacks -------------------------------------------------------

    def _on_state(self, frame: Frame) -> None:
        data = frame.data
        with self._lock:
            self._module_states[int(data["module_id"])] = data
            self._last_update = time.time()

    def _on_pose(self, frame: Frame) -> None:
        with self._lock:
            self._world_pose = {
                "x": frame.data["x"],
                "y": frame.data["y"],
                "theta": frame.data["theta"],
            }
            self._track.append([frame.data["x"], frame.data["y"]])

    def _on_body_poses(self, frame: Frame) -> None:
        with self._lock:
            self._body_poses = frame.data["poses"]

    # Outbound ------------------------------------------------------------

    def command(self, cmd: CommandIn) -> CommandAck:
        """Clamp, convert to radians, and forward to the module's topic."""
        limit_deg = math.degrees(JOINT_LIMIT_RAD)
        pitch = min(max(cmd.pitch_deg, -limit_deg), limit_deg)
        yaw = min(max(cmd.yaw_deg, -limit_deg), limit_deg)
        spec = self.config.screw_drive
        rpm = output_speed(spec, cmd.screw_rpm * spec.total_ratio)
        clamped = (pitch != cmd.pitch_deg or yaw != cmd.yaw_deg
                   or rpm != cmd.screw_rpm)
        self.node.publish(
            f"/module/{cmd.module_id}/cmd",
            "joint_command",
            {
                "module_id": cmd.module_id,
                "q_p": math.radians(pitch),
                "q_y": math.radians(yaw),
                "screw_rpm": rpm,
                "stamp": time.time(),
            },
        )
        return CommandAck(
            module_id=cmd.module_id,
            applied_pitch_deg=pitch,
            applied_yaw_deg=yaw,
            applied_screw_rpm=rpm,
            clamped=clamped,
        )

    def state_frame(self) -> StateFrameOut:
        spec = self.config.ujoint_drive
        k_t = self.config.control.torque_constant_nm_per_a
        with self._lock:
            states = [self._module_states[k] for k in sorted(self._module_states)]
            pose = dict(self._world_pose)
            body_poses = list(self._body_poses)
            track = [list(p) for p in self._track]
        modules = []
        t = 0.0
        for s in states:
            t = max(t, s["timestamp"])
            modules.append(
                ModuleStateOut(
                    module_id=s["module_id"],
                    timestamp=s["timestamp"],
                    q_measured_deg=[math.degrees(v) for v in s["q_measured"]],
                    q_setpoint_deg=[math.degrees(v) for v in s["q_setpoint"]],
                    screw_rpm=s["screw_rpm"],
                    screw_rpm_setpoint=s["screw_rpm_setpoint"],
                    joint_currents_a=list(s["joint_currents_a"]),
                    screw_current_a=s["screw_current_a"],
                    est_joint_torques_nm=[
                        estimate_torque_from_current(i, k_t, spec)
                        for i in s["joint_currents_a"]
                    ],
                    imu_orientation=list(s["imu_orientation"]),
                    temperature_c=s["temperature_c"],
                    slip_flags=list(s["slip_flags"]),
                )
            )
        return StateFrameOut(
            t=t,
            modules=modules,
            body_poses=[BodyPoseOut(**p) for p in body_poses],
            world_pose=PoseOut(**pose),
            track=track,
        )
