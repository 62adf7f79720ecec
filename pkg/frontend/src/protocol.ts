// Wire protocol shared with the frame server: JSON control messages go out,
// binary frames and JSON stats come back.  Everything here is pure data
// transformation so it can be tested without a socket.

export const FRAME_HEADER_BYTES = 12; // u32 frameId, u32 width, u32 height (LE)

export interface FrameMessage {
    frameId: number;
    width: number;
    height: number;
    pixels: Uint8ClampedArray<ArrayBuffer>; // RGBA8 rows, a view into the message buffer
}

export interface StatsMessage {
    type: "stats";
    frameId: number;
    frameMs: number;
    sortMs: number;
    sortRounds: number;
    workers: number;
}

export interface ErrorMessage {
    type: "error";
    message: string;
}

export type ServerMessage = StatsMessage | ErrorMessage;

export type Orientation = "near-max" | "near-min";

// Full client-side mirror of the engine's mapping state.  The server accepts
// partial updates, but the viewer always sends the whole mirror so the UI and
// the engine can't drift apart.
export interface MappingMirror {
    enabled: string[];
    radiusRange: [number, number];
    nearColor: [number, number, number];
    farColor: [number, number, number];
    valueRange: [number, number];
    alphaRange: [number, number];
    orientation: Orientation;
}

// Matches the engine's defaults, which is what `depthtubes serve` starts with
// unless given mapping flags.  If the server was started with different flags
// the first control change heals the mismatch (the full mirror is sent).
export const DEFAULT_MAPPING: MappingMirror = {
    enabled: ["color"],
    radiusRange: [0.002, 0.008],
    nearColor: [0.95, 0.42, 0.12],
    farColor: [0.10, 0.22, 0.80],
    valueRange: [0.25, 1.0],
    alphaRange: [0.15, 1.0],
    orientation: "near-max",
};

export function decodeFrame(buf: ArrayBuffer): FrameMessage {
    if (buf.byteLength < FRAME_HEADER_BYTES) {
        throw new Error(`frame message too short: ${buf.byteLength} bytes`);
    }
    const view = new DataView(buf);
    const frameId = view.getUint32(0, true);
    const width = view.getUint32(4, true);
    const height = view.getUint32(8, true);
    const expected = FRAME_HEADER_BYTES + width * height * 4;
    if (buf.byteLength !== expected) {
        throw new Error(
            `frame ${frameId}: ${width}x${height} needs ${expected} bytes, got ${buf.byteLength}`,
        );
    }
    return {
        frameId,
        width,
        height,
        pixels: new Uint8ClampedArray(buf, FRAME_HEADER_BYTES),
    };
}

export function parseServerMessage(text: string): ServerMessage {
    const msg = JSON.parse(text);
    if (msg && msg.type === "stats") {
        return msg as StatsMessage;
    }
    if (msg && msg.type === "error" && typeof msg.message === "string") {
        return msg as ErrorMessage;
    }
    throw new Error(`unrecognized server message: ${text.slice(0, 80)}`);
}

export function rotateMessage(dx: number, dy: number): string {
    return JSON.stringify({ type: "rotate", dx, dy });
}

export function mappingMessage(mirror: MappingMirror): string {
    return JSON.stringify({ type: "mapping", ...mirror });
}

export function resizeMessage(width: number, height: number): string {
    return JSON.stringify({ type: "resize", width, height });
}
