"""FastAPI application: REST endpoints, teleop WebSocket, static console."""

from __future__ import annotations

import asyncio
import json
import math
import os

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from .. import __version__
from ..kinematics import PRESET_NAMES, preset_configuration
from .bridge import GatewayBridge
from .models import (
    CommandIn,
    ErrorOut,
    ExperimentRequest,
    ExperimentResponse,
    HealthOut,
    PresetsOut,
)
from . import runner

STREAM_PERIOD_S = 0.05  # 20 Hz state stream, decimated from the 50 Hz bus rate


def preset_tables_deg(n_joints: int = 3) -> dict[str, list[list[float]]]:
    return {
        name: [
            [math.degrees(q.q_p), math.degrees(q.q_y)]
            for q in preset_configuration(name, n_joints)
        ]
        for name in PRESET_NAMES
    }


def create_app(bridge: GatewayBridge | None = None,
               frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="arcsim gateway", version=__version__)
    app.state.bridge = bridge

    @app.get("/api/health", response_model=HealthOut)
    def health() -> HealthOut:
        b: GatewayBridge | None = app.state.bridge
        return HealthOut(
            version=__version__,
            broker_connected=bool(b and b.connected),
            modules_seen=b.modules_seen if b else 0,
        )

    @app.get("/api/presets", response_model=PresetsOut)
    def presets() -> PresetsOut:
        return PresetsOut(presets=preset_tables_deg())

    @app.post("/api/experiments", response_model=ExperimentResponse)
    def run_experiment(req: ExperimentRequest) -> ExperimentResponse:
        return runner.execute(req)

    @app.websocket("/ws")
    async def teleop(ws: WebSocket) -> None:
        await ws.accept()
        b: GatewayBridge | None = app.state.bridge
        if b is None:
            await ws.send_text(ErrorOut(detail="gateway has no bus bridge").model_dump_json())
            await ws.close()
            return
        send_lock = asyncio.Lock()

        async def stream() -> None:
            while True:
                await asyncio.sleep(STREAM_PERIOD_S)
                frame = b.state_frame()
                async with send_lock:
                    await ws.send_text(frame.model_dump_json())

        sender = asyncio.create_task(stream())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError as e:
                    reply = ErrorOut(detail=f"not JSON: {e}")
                else:
                    try:
                        cmd = CommandIn(**msg)
                        reply = b.command(cmd)
                    except (ValidationError, TypeError) as e:
                        reply = ErrorOut(detail=str(e))
                async with send_lock:
                    await ws.send_text(reply.model_dump_json())
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()

    if frontend_dir and os.path.isdir(frontend_dir):
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="console")

    return app
