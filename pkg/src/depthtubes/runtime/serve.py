"""WebSocket frame server: JSON control in, binary frames + JSON stats out.

Inbound control messages (text, JSON):
  {"type": "rotate", "dx": f, "dy": f}     trackball drag in NDC units
  {"type": "mapping", ...}                  partial MappingSpec mirror; fields
                                            enabled, radiusRange, nearColor,
                                            farColor, valueRange, alphaRange,
                                            orientation override the current
                                            spec, omitted ones are kept
  {"type": "resize", "width": i, "height": i}

Outbound per rendered frame:
  binary: u32 frameId, u32 width, u32 height (LE), then RGBA8 rows
  text:   {"type": "stats", "frameId", "frameMs", "sortMs", "sortRounds",
           "workers"}

Malformed input gets {"type": "error", "message": ...} and the connection
stays open.  Control messages are queued and coalesced: many rotations while
a frame is in flight yield one render of the final pose, never a backlog.
"""

from __future__ import annotations

import asyncio
import json
import logging
import struct

from ..raster import FrameTile
from ..stylemap import MappingSpec
from .engine import Engine, FrameStats

logger = logging.getLogger(__name__)

MAX_DIMENSION = 8192


def frame_message(frame_id: int, tile: FrameTile) -> bytes:
    return struct.pack("<III", frame_id, tile.width, tile.height) + tile.color.tobytes()


def stats_message(stats: FrameStats) -> str:
    return json.dumps({
        "type": "stats",
        "frameId": stats.frame_id,
        "frameMs": round(stats.frame_ms, 3),
        "sortMs": round(stats.sort_ms, 3),
        "sortRounds": stats.sort_rounds,
        "workers": stats.workers,
    })


def merge_mapping(spec: MappingSpec, msg: dict) -> MappingSpec:
    """Apply a partial mapping message on top of the current spec.

    Raises ValueError on anything out of range; the caller reports it back.
    """
    def pair(key):
        lo, hi = msg[key]
        return (float(lo), float(hi))

    def rgb(key):
        r, g, b = msg[key]
        return (float(r), float(g), float(b))

    try:
        return MappingSpec(
            enabled=frozenset(msg["enabled"]) if "enabled" in msg else spec.enabled,
            radius_range=pair("radiusRange") if "radiusRange" in msg else spec.radius_range,
            near_color=rgb("nearColor") if "nearColor" in msg else spec.near_color,
            far_color=rgb("farColor") if "farColor" in msg else spec.far_color,
            value_range=pair("valueRange") if "valueRange" in msg else spec.value_range,
            alpha_range=pair("alphaRange") if "alphaRange" in msg else spec.alpha_range,
            orientation=msg.get("orientation", spec.orientation),
        )
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed mapping message: {exc}") from exc


class FrameServer:
    """Serves one engine to any number of viewers."""

    def __init__(self, engine: Engine, host: str = "127.0.0.1", port: int = 8765):
        self.engine = engine
        self.host = host
        self.port = port
        self._clients: set = set()
        self._pending: list[tuple] = []
        self._dirty = asyncio.Event()
        self._latest: tuple[bytes, str] | None = None
        self._server = None
        self._render_task: asyncio.Task | None = None

    async def start(self) -> "FrameServer":
        from websockets.asyncio.server import serve
        self._server = await serve(self._handler, self.host, self.port, max_size=1 << 20)
        self.port = self._server.sockets[0].getsockname()[1]
        self._render_task = asyncio.create_task(self._render_loop())
        self._dirty.set()  # render and cache an initial frame
        logger.info("frame server listening on ws://%s:%d", self.host, self.port)
        return self

    async def stop(self) -> None:
        if self._render_task is not None:
            self._render_task.cancel()
            try:
                await self._render_task
            except asyncio.CancelledError:
                pass
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def _render_loop(self) -> None:
        loop = asyncio.get_running_loop()
        while True:
            await self._dirty.wait()
            self._dirty.clear()
            ops, self._pending = self._pending, []
            try:
                for op in ops:
                    if op[0] == "rotate":
                        self.engine.rotate(op[1], op[2])
                    elif op[0] == "mapping":
                        self.engine.set_mapping(op[1])
                    elif op[0] == "resize":
                        self.engine.set_viewport(op[1], op[2])
                tile, stats = await loop.run_in_executor(None, self.engine.render_frame)
            except asyncio.CancelledError:
                raise
            except Exception:
                logger.exception("render failed; server stays up")
                continue
            self._latest = (frame_message(stats.frame_id, tile), stats_message(stats))
            await self._send_all(*self._latest)

    async def _send_all(self, *messages) -> None:
        dead = []
        for ws in list(self._clients):
            try:
                for m in messages:
                    await ws.send(m)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self._clients.discard(ws)

    async def _handler(self, ws) -> None:
        self._clients.add(ws)
        try:
            if self._latest is not None:
                for m in self._latest:
                    await ws.send(m)
            async for raw in ws:
                reply = self._handle_control(raw)
                if reply is not None:
                    await ws.send(reply)
        finally:
            self._clients.discard(ws)

    def _handle_control(self, raw) -> str | None:
        """Queue one control message; returns an error reply or None."""
        if isinstance(raw, (bytes, bytearray)):
            return _error("expected a text control message")
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            return _error(f"bad JSON: {exc}")
        if not isinstance(msg, dict):
            return _error("control message must be a JSON object")
        kind = msg.get("type")
        try:
            if kind == "rotate":
                dx = float(msg["dx"])
                dy = float(msg["dy"])
                if not (abs(dx) <= 1.0 and abs(dy) <= 1.0):
                    raise ValueError("rotate deltas must be within [-1, 1]")
                self._pending.append(("rotate", dx, dy))
            elif kind == "mapping":
                base = self._queued_spec()
                self._pending.append(("mapping", merge_mapping(base, msg)))
            elif kind == "resize":
                width = int(msg["width"])
                height = int(msg["height"])
                if not (1 <= width <= MAX_DIMENSION and 1 <= height <= MAX_DIMENSION):
                    raise ValueError(f"viewport must be within 1..{MAX_DIMENSION}")
                self._pending.append(("resize", width, height))
            else:
                raise ValueError(f"unknown message type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            return _error(str(exc))
        self._dirty.set()
        return None

    def _queued_spec(self) -> MappingSpec:
        for op in reversed(self._pending):
            if op[0] == "mapping":
                return op[1]
        return self.engine.spec


def _error(message: str) -> str:
    return json.dumps({"type": "error", "message": message})


def run_server(engine: Engine, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Blocking entry point: serve until interrupted."""

    async def _main():
        server = await FrameServer(engine, host, port).start()
        try:
            await asyncio.Future()
        finally:
            await server.stop()

    try:
        asyncio.run(_main())
    except KeyboardInterrupt:
        logger.info("server stopped")
