"""Operator gateway: health/scenario endpoints plus a telemetry WebSocket.

The server wraps one MissionLoop.  A pacing thread steps the loop in wall
time (optionally faster); the WebSocket relays whatever the transport
session actually transmitted -- telemetry frames and command acks as
canonical JSON -- and feeds operator messages back into the loop.
"""

from __future__ import annotations

import asyncio
import threading
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .harness import MissionLoop
from .scenario import Scenario, ScenarioError, scenario_from_dict


class SimServer:
    """Owns the mission loop and its real-time pacing thread."""

    def __init__(self, loop: MissionLoop, rate: float = 1.0):
        if rate <= 0.0:
            raise ValueError("rate must be > 0")
        self.loop = loop
        self.rate = rate
        self._thread: threading.Thread | None = None
        self._running = threading.Event()

    def start(self) -> None:
        if self._thread is not None:
            return
        self._running.set()
        self._thread = threading.Thread(target=self._pace, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running.clear()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def _pace(self) -> None:
        period = self.loop.dt / self.rate
        next_due = time.monotonic()
        while self._running.is_set():
            loop = self.loop
            if loop.truth.t < loop.scenario.duration:
                loop.tick()
            next_due += period
            delay = next_due - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_due = time.monotonic()

    def replace_scenario(self, scenario: Scenario) -> None:
        self.loop = MissionLoop(scenario)


def create_app(server: SimServer) -> FastAPI:
    app = FastAPI(title="squidsim operator gateway")
    app.state.sim = server

    @app.get("/health")
    def health() -> dict:
        loop = server.loop
        return {"status": "ok", "t": loop.truth.t, "tick": loop.tick_index,
                "mode": loop.mode.describe(),
                "scenario": loop.scenario.name}

    @app.get("/scenario")
    def get_scenario() -> dict:
        return server.loop.scenario.to_dict()

    @app.post("/scenario")
    def post_scenario(body: dict):
        try:
            scenario = scenario_from_dict(body)
        except ScenarioError as err:
            return JSONResponse(status_code=422,
                                content={"errors": err.errors})
        server.replace_scenario(scenario)
        return {"status": "ok", "scenario": scenario.name}

    @app.websocket("/ws")
    async def operator_socket(ws: WebSocket) -> None:
        await ws.accept()

        async def pump_outbound():
            while True:
                loop = server.loop
                sent = False
                while loop.outbox:
                    await ws.send_text(
                        loop.outbox.popleft().decode("utf-8"))
                    sent = True
                await asyncio.sleep(0.0 if sent else 0.02)

        async def pump_inbound():
            while True:
                text = await ws.receive_text()
                server.loop.inject_command(text.encode("utf-8"))

        outbound = asyncio.ensure_future(pump_outbound())
        inbound = asyncio.ensure_future(pump_inbound())
        try:
            done, pending = await asyncio.wait(
                {outbound, inbound}, return_when=asyncio.FIRST_COMPLETED)
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(
                        exc, (WebSocketDisconnect, RuntimeError)):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            for task in (outbound, inbound):
                task.cancel()

    return app


def serve(loop: MissionLoop, host: str = "127.0.0.1", port: int = 8760,
          rate: float = 1.0) -> None:
    """Run the gateway until interrupted (blocking)."""
    import uvicorn

    server = SimServer(loop, rate=rate)
    server.start()
    try:
        uvicorn.run(create_app(server), host=host, port=port,
                    log_level="warning")
    finally:
        server.stop()
