// Viewer-side state machines, kept free of DOM and socket so they're testable.
// The viewer never decides anything about the image locally: every visible
// change round-trips through the engine.  What lives here is bookkeeping —
// which frames are stale, what the pointer has accumulated since the last
// animation tick, which mapping the engine last accepted.

import { MappingMirror, mappingMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "live" | "disconnected";

// Frames can arrive out of order relative to what's been painted only after a
// reconnect (the server pushes its latest frame to a fresh connection), but
// the rule is unconditional: never paint an id lower than the last painted.
// The gate survives reconnects so ids continue monotonically on screen.
export class FrameGate {
    private lastPainted = -1;

    accept(frameId: number): boolean {
        if (frameId < this.lastPainted) {
            return false;
        }
        this.lastPainted = frameId;
        return true;
    }

    get latest(): number {
        return this.lastPainted;
    }
}

// Exponential moving average over inbound frame intervals; fps is the
// reciprocal.  Needs two frames before it reports anything.
export class FpsEstimator {
    static readonly ALPHA = 0.2;
    private emaIntervalMs: number | null = null;
    private lastArrivalMs: number | null = null;

    onFrame(nowMs: number): void {
        if (this.lastArrivalMs !== null) {
            const interval = nowMs - this.lastArrivalMs;
            this.emaIntervalMs =
                this.emaIntervalMs === null
                    ? interval
                    : FpsEstimator.ALPHA * interval +
                      (1 - FpsEstimator.ALPHA) * this.emaIntervalMs;
        }
        this.lastArrivalMs = nowMs;
    }

    get fps(): number {
        if (this.emaIntervalMs === null || this.emaIntervalMs <= 0) {
            return 0;
        }
        return 1000 / this.emaIntervalMs;
    }
}

// Pointer deltas accumulate here between animation ticks; take() drains at
// most one rotate per tick no matter how fast the pointer reports.  Deltas
// are normalized against the viewport so a full-width drag is dx = 1.0, and
// clamped to the [-1, 1] the server accepts.
export class DragAccumulator {
    private dx = 0;
    private dy = 0;

    add(pixelDx: number, pixelDy: number, viewWidth: number, viewHeight: number): void {
        if (viewWidth <= 0 || viewHeight <= 0) {
            return;
        }
        this.dx += pixelDx / viewWidth;
        this.dy += pixelDy / viewHeight;
    }

    take(): { dx: number; dy: number } | null {
        if (this.dx === 0 && this.dy === 0) {
            return null;
        }
        const clamp = (v: number) => Math.max(-1, Math.min(1, v));
        const out = { dx: clamp(this.dx), dy: clamp(this.dy) };
        this.dx = 0;
        this.dy = 0;
        return out;
    }
}

// Tracks which mapping the engine has accepted versus what the UI just asked
// for.  A proposal stays "in flight" until either a stats message arrives
// (the engine rendered with it — commit) or an error reply arrives (revert,
// and the UI repaints its controls from the returned spec).
export class MappingControl {
    private acked: MappingMirror;
    private inflight: MappingMirror | null = null;

    constructor(initial: MappingMirror) {
        this.acked = initial;
    }

    get current(): MappingMirror {
        return this.inflight ?? this.acked;
    }

    propose(next: MappingMirror): string {
        this.inflight = next;
        return mappingMessage(next);
    }

    onStats(): void {
        if (this.inflight !== null) {
            this.acked = this.inflight;
            this.inflight = null;
        }
    }

    onError(): MappingMirror {
        this.inflight = null;
        return this.acked;
    }
}

// Reconnect delays: doubling from 500 ms, capped at 8 s.
export class Backoff {
    private attempt = 0;

    next(): number {
        const delay = Math.min(8000, 500 * 2 ** this.attempt);
        this.attempt += 1;
        return delay;
    }

    reset(): void {
        this.attempt = 0;
    }
}

// <input type="color"> speaks #rrggbb; the wire speaks float RGB triples.
export function hexToRgb(hex: string): [number, number, number] {
    const m = /^#([0-9a-f]{6})$/i.exec(hex);
    if (!m) {
        throw new Error(`not a #rrggbb color: ${hex}`);
    }
    const n = parseInt(m[1]!, 16);
    return [((n >> 16) & 0xff) / 255, ((n >> 8) & 0xff) / 255, (n & 0xff) / 255];
}

export function rgbToHex(rgb: readonly [number, number, number]): string {
    const byte = (v: number) =>
        Math.max(0, Math.min(255, Math.round(v * 255)))
            .toString(16)
            .padStart(2, "0");
    return `#${byte(rgb[0])}${byte(rgb[1])}${byte(rgb[2])}`;
}

// Server URL: ?ws=ws://host:port overrides, else the serving host's default
// frame port.
export function wsUrlFrom(search: string, hostname: string): string {
    const override = new URLSearchParams(search).get("ws");
    if (override) {
        return override;
    }
    return `ws://${hostname || "127.0.0.1"}:8765`;
}
