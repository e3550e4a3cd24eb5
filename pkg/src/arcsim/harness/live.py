"""Wall-clock robot for teleoperation.

Runs the same deterministic SimWorld, but paced to real time by a single
stepper thread. Each module gets its own bus node that registers its id,
publishes state and IMU frames on interface ticks, and feeds received
commands into the world's thread-safe command queue. Determinism guarantees
do not apply in this mode; experiments never use it.
"""

from __future__ import annotations

import logging
import threading
import time

from ..bus import BusNode
from ..config import SimConfig
from ..control import JointCommand
from ..kinematics import JointAngles
from .simworld import BASE_DT, SimWorld

log = logging.getLogger("arcsim.harness.live")


class LiveRobot:
    def __init__(self, config: SimConfig, broker_host: str = "127.0.0.1",
                 broker_port: int | None = None, n_modules: int | None = None,
                 seed: int = 0, rate: float = 1.0):
        self.config = config
        self.rate = rate
        port = broker_port if broker_port is not None else config.bus.port
        self.world = SimWorld(config, seed=seed, n_modules=n_modules)
        self.world.record_series = False
        self.nodes: list[BusNode] = []
        self._world_node = BusNode("world", broker_host, port)
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._broker = (broker_host, port)

    def start(self) -> None:
        host, port = self._broker
        self._world_node.connect()
        for m in self.world.modules:
            node = BusNode(f"module-{m.module_id}", host, port).connect()
            node.register_module(m.module_id)
            node.subscribe(
                f"/module/{m.module_id}/cmd",
                lambda frame, mid=m.module_id: self._on_command(mid, frame.data),
            )
            self.nodes.append(node)
        self.world.on_sample = self._publish_sample
        self._thread = threading.Thread(
            target=self._run, name="live-robot", daemon=True
        )
        self._thread.start()
        log.info("live robot running with %d modules", len(self.world.modules))

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        for node in self.nodes:
            node.close()
        self._world_node.close()

    def _on_command(self, module_id: int, data: dict) -> None:
        try:
            cmd = JointCommand.from_dict({**data, "module_id": module_id})
        except (KeyError, TypeError, ValueError) as e:
            log.warning("ignoring malformed command for module %d: %s", module_id, e)
            return
        self.world.enqueue_command(cmd)

    def _publish_sample(self, sample: dict) -> None:
        for state, node in zip(sample["modules"], self.nodes):
            mid = state["module_id"]
            node.publish(f"/module/{mid}/state", "module_state", state)
            node.publish(
                f"/module/{mid}/imu",
                "imu",
                {"orientation": state["imu_orientation"],
                 "timestamp": state["timestamp"]},
            )
        self._world_node.publish(
            "/system/pose",
            "planar_pose",
            {"t": sample["t"], **sample["pose"]},
        )
        if "body_poses" in sample:
            self._world_node.publish(
                "/system/body_poses",
                "body_poses",
                {"t": sample["t"], "poses": sample["body_poses"]},
            )

    def command_preset(self, angles: list[JointAngles]) -> None:
        for i, m in enumerate(self.world.modules):
            q = angles[i] if i < len(angles) else JointAngles()
            self.world.enqueue_command(
                JointCommand(i, q, 0.0, stamp=self.world.time_s)
            )

    def _run(self) -> None:
        start = time.monotonic()
        k = 0
        while not self._stop.is_set():
            self.world.step_base_tick()
            k += 1
            target = start + k * BASE_DT / self.rate
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            elif delay < -1.0:
                # Fell badly behind wall clock; resynchronize instead of
                # bursting to catch up.
                start = time.monotonic() - k * BASE_DT / self.rate
