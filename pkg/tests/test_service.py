import json
import math
import time

import pytest
from fastapi.testclient import TestClient

from arcsim.bus import Broker, BusNode
from arcsim.config import default_config
from arcsim.harness.live import LiveRobot
from arcsim.service import GatewayBridge, create_app
from arcsim.service.models import ExperimentRequest
from arcsim.service.runner import execute


@pytest.fixture(scope="module")
def stack():
    """Broker + wall-clock robot + gateway bridge + FastAPI test client."""
    config = default_config()
    broker = Broker(port=0)
    broker.start()
    robot = LiveRobot(config, "127.0.0.1", broker.port, n_modules=4, rate=4.0)
    robot.start()
    bridge = GatewayBridge(config, "127.0.0.1", broker.port)
    bridge.start()
    app = create_app(bridge)
    client = TestClient(app)
    yield config, broker, robot, bridge, client
    bridge.stop()
    robot.stop()
    broker.stop()


def wait_for(predicate, timeout=5.0, interval=0.01):
    deadline = time.time() + timeout
    while time.time() < deadline:
        if predicate():
            return True
        time.sleep(interval)
    return False


class TestRest:
    def test_health(self, stack):
        _, _, _, bridge, client = stack
        assert wait_for(lambda: bridge.modules_seen == 4)
        body = client.get("/api/health").json()
        assert body["status"] == "ok"
        assert body["broker_connected"] is True
        assert body["modules_seen"] == 4

    def test_presets_tables(self, stack):
        _, _, _, _, client = stack
        presets = client.get("/api/presets").json()["presets"]
        assert presets["straight"] == [[0.0, 0.0]] * 3
        assert presets["square"] == [[0.0, 90.0]] * 3
        assert [round(p[1]) for p in presets["m_shape"]] == [75, -75, 75]

    def test_experiment_endpoint(self, stack):
        _, _, _, _, client = stack
        resp = client.post("/api/experiments", json={
            "experiment": "pendulum", "vin": [24.0], "include_series": False,
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["experiment"] == "pendulum"
        assert body["series"] is None
        assert "rms_error_deg_by_voltage" in body["metrics"]

    def test_experiment_endpoint_matches_direct_execution(self, stack):
        _, _, _, _, client = stack
        req = {"experiment": "config", "preset": "straight", "seed": 1,
               "include_series": False}
        via_http = client.post("/api/experiments", json=req).json()
        direct = execute(ExperimentRequest(**req))
        assert via_http["metrics_sha256"] == direct.metrics_sha256


class TestWebSocket:
    def test_stream_and_command_round_trip(self, stack):
        config, broker, robot, bridge, client = stack
        assert wait_for(lambda: bridge.modules_seen == 4)

        # Observe the bus directly, like any other node would.
        observed = []
        spy = BusNode("spy", "127.0.0.1", broker.port, auto_reconnect=False).connect()
        spy.subscribe("/module/1/cmd", lambda f: observed.append(f.data))

        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({
                "kind": "command", "module_id": 1,
                "pitch_deg": 10.0, "yaw_deg": 45.0, "screw_rpm": 30.0,
            }))
            acked = False
            states = 0
            for _ in range(120):
                msg = json.loads(ws.receive_text())
                if msg["kind"] == "ack":
                    assert msg["module_id"] == 1
                    assert msg["applied_yaw_deg"] == pytest.approx(45.0)
                    assert msg["clamped"] is False
                    acked = True
                elif msg["kind"] == "state":
                    states += 1
                    if states >= 3 and acked:
                        break
            assert acked and states >= 3

        assert wait_for(lambda: len(observed) >= 1)
        cmd = observed[0]
        # The command on the wire equals the UI's setpoint within 1e-6 rad.
        assert cmd["q_y"] == pytest.approx(math.radians(45.0), abs=1e-6)
        assert cmd["q_p"] == pytest.approx(math.radians(10.0), abs=1e-6)

        # And the robot converges to it.
        assert wait_for(
            lambda: abs(robot.world.modules[1].q[1] - math.radians(45.0)) < 0.01,
            timeout=10.0,
        )
        spy.close()

    def test_malformed_command_keeps_connection(self, stack):
        _, _, _, _, client = stack
        with client.websocket_connect("/ws") as ws:
            ws.send_text("this is not json")
            saw_error = False
            for _ in range(40):
                msg = json.loads(ws.receive_text())
                if msg["kind"] == "error":
                    saw_error = True
                    break
            assert saw_error
            # Connection still alive: states keep flowing.
            kinds = {json.loads(ws.receive_text())["kind"] for _ in range(3)}
            assert "state" in kinds

    def test_unknown_fields_rejected_state_unchanged(self, stack):
        _, _, _, bridge, client = stack
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"kind": "command", "module_id": -3}))
            saw_error = False
            for _ in range(40):
                msg = json.loads(ws.receive_text())
                if msg["kind"] == "error":
                    saw_error = True
                    break
            assert saw_error

    def test_two_clients_see_the_same_stream(self, stack):
        _, _, _, _, client = stack
        with client.websocket_connect("/ws") as a, client.websocket_connect("/ws") as b:
            fa = _next_state(a)
            fb = _next_state(b)
            assert set(m["module_id"] for m in fa["modules"]) == \
                set(m["module_id"] for m in fb["modules"])
            assert len(fa["body_poses"]) == len(fb["body_poses"])

    def test_state_frames_carry_poses_and_degrees(self, stack):
        from arcsim.service.models import CommandIn

        _, _, robot, bridge, client = stack
        # Straighten the robot first; earlier tests may have bent it.
        for mid in range(4):
            bridge.command(CommandIn(module_id=mid))
        assert wait_for(
            lambda: all(abs(m.q[0]) < 0.01 and abs(m.q[1]) < 0.01
                        for m in robot.world.modules),
            timeout=10.0,
        )
        with client.websocket_connect("/ws") as ws:
            frame = _next_state(ws)
        assert len(frame["modules"]) == 4
        assert len(frame["body_poses"]) == 4
        m0 = frame["modules"][0]
        assert abs(m0["q_measured_deg"][0]) <= 90.0
        assert len(m0["est_joint_torques_nm"]) == 2
        # Straightened chain: head roughly 109 cm down the x axis.
        head = frame["body_poses"][-1]["position_cm"]
        assert head[0] == pytest.approx(109.2, abs=5.0)


def _next_state(ws, tries=40):
    for _ in range(tries):
        msg = json.loads(ws.receive_text())
        if msg["kind"] == "state":
            return msg
    raise AssertionError("no state frame received")


class TestAppWithoutBridge:
    def test_ws_reports_missing_bridge(self):
        client = TestClient(create_app(None))
        with client.websocket_connect("/ws") as ws:
            msg = json.loads(ws.receive_text())
            assert msg["kind"] == "error"

    def test_health_without_bridge(self):
        client = TestClient(create_app(None))
        body = client.get("/api/health").json()
        assert body["broker_connected"] is False
