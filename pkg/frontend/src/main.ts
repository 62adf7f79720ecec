// DOM and socket wiring.  All decisions live server-side: this file just
// forwards control input, paints whatever frames come back, and keeps the
// widgets honest about what the engine actually accepted.

import {
    DEFAULT_MAPPING,
    MappingMirror,
    Orientation,
    decodeFrame,
    parseServerMessage,
    rotateMessage,
} from "./protocol.js";
import {
    Backoff,
    ConnectionStatus,
    DragAccumulator,
    FpsEstimator,
    FrameGate,
    MappingControl,
    hexToRgb,
    rgbToHex,
    wsUrlFrom,
} from "./state.js";

const canvas = document.getElementById("frame") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const toastEl = document.getElementById("toast")!;

const el = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
const checks = {
    size: el<HTMLInputElement>("map-size"),
    color: el<HTMLInputElement>("map-color"),
    value: el<HTMLInputElement>("map-value"),
    alpha: el<HTMLInputElement>("map-alpha"),
};
const inputs = {
    radiusMin: el<HTMLInputElement>("radius-min"),
    radiusMax: el<HTMLInputElement>("radius-max"),
    nearColor: el<HTMLInputElement>("near-color"),
    farColor: el<HTMLInputElement>("far-color"),
    valueMin: el<HTMLInputElement>("value-min"),
    valueMax: el<HTMLInputElement>("value-max"),
    alphaMin: el<HTMLInputElement>("alpha-min"),
    alphaMax: el<HTMLInputElement>("alpha-max"),
    orientation: el<HTMLSelectElement>("orientation"),
};
const stats = {
    frame: el<HTMLElement>("stat-frame"),
    frameMs: el<HTMLElement>("stat-frame-ms"),
    sortMs: el<HTMLElement>("stat-sort-ms"),
    rounds: el<HTMLElement>("stat-rounds"),
    workers: el<HTMLElement>("stat-workers"),
    fps: el<HTMLElement>("stat-fps"),
};

const gate = new FrameGate();
const fps = new FpsEstimator();
const drag = new DragAccumulator();
const mapping = new MappingControl(DEFAULT_MAPPING);
const backoff = new Backoff();

let ws: WebSocket | null = null;
let toastTimer: ReturnType<typeof setTimeout> | null = null;

function setStatus(status: ConnectionStatus) {
    statusEl.textContent = status;
    statusEl.className = `status ${status}`;
}

function toast(message: string) {
    toastEl.textContent = message;
    toastEl.classList.add("visible");
    if (toastTimer !== null) {
        clearTimeout(toastTimer);
    }
    toastTimer = setTimeout(() => toastEl.classList.remove("visible"), 3000);
}

function readControls(): MappingMirror {
    const enabled = Object.entries(checks)
        .filter(([, box]) => box.checked)
        .map(([name]) => name);
    return {
        enabled,
        radiusRange: [Number(inputs.radiusMin.value), Number(inputs.radiusMax.value)],
        nearColor: hexToRgb(inputs.nearColor.value),
        farColor: hexToRgb(inputs.farColor.value),
        valueRange: [Number(inputs.valueMin.value), Number(inputs.valueMax.value)],
        alphaRange: [Number(inputs.alphaMin.value), Number(inputs.alphaMax.value)],
        orientation: inputs.orientation.value as Orientation,
    };
}

function writeControls(m: MappingMirror) {
    for (const [name, box] of Object.entries(checks)) {
        box.checked = m.enabled.includes(name);
    }
    inputs.radiusMin.value = String(m.radiusRange[0]);
    inputs.radiusMax.value = String(m.radiusRange[1]);
    inputs.nearColor.value = rgbToHex(m.nearColor);
    inputs.farColor.value = rgbToHex(m.farColor);
    inputs.valueMin.value = String(m.valueRange[0]);
    inputs.valueMax.value = String(m.valueRange[1]);
    inputs.alphaMin.value = String(m.alphaRange[0]);
    inputs.alphaMax.value = String(m.alphaRange[1]);
    inputs.orientation.value = m.orientation;
}

function paint(buf: ArrayBuffer) {
    const frame = decodeFrame(buf);
    if (!gate.accept(frame.frameId)) {
        return; // stale: a fresh connection replays the server's latest frame
    }
    if (canvas.width !== frame.width || canvas.height !== frame.height) {
        canvas.width = frame.width;
        canvas.height = frame.height;
    }
    ctx.putImageData(new ImageData(frame.pixels, frame.width, frame.height), 0, 0);
    fps.onFrame(performance.now());
    stats.frame.textContent = String(frame.frameId);
    stats.fps.textContent = fps.fps.toFixed(1);
}

function connect() {
    setStatus("connecting");
    const socket = new WebSocket(wsUrlFrom(location.search, location.hostname));
    socket.binaryType = "arraybuffer";
    ws = socket;

    socket.onopen = () => {
        backoff.reset();
        setStatus("live");
    };

    socket.onmessage = (event) => {
        if (event.data instanceof ArrayBuffer) {
            paint(event.data);
            return;
        }
        const msg = parseServerMessage(event.data);
        if (msg.type === "stats") {
            mapping.onStats();
            stats.frameMs.textContent = msg.frameMs.toFixed(1);
            stats.sortMs.textContent = msg.sortMs.toFixed(1);
            stats.rounds.textContent = String(msg.sortRounds);
            stats.workers.textContent = String(msg.workers);
        } else {
            writeControls(mapping.onError());
            toast(msg.message);
        }
    };

    socket.onclose = () => {
        if (ws !== socket) {
            return; // superseded by a newer connection
        }
        ws = null;
        setStatus("disconnected");
        setTimeout(connect, backoff.next());
    };

    socket.onerror = () => socket.close();
}

// --- pointer → rotate -------------------------------------------------------
// Deltas pile up in the accumulator; the animation loop below drains them at
// most once per tick, so a 120 Hz mouse can't outpace the frame rate.

let dragging = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    canvas.setPointerCapture(e.pointerId);
});

canvas.addEventListener("pointermove", (e) => {
    if (!dragging) {
        return;
    }
    drag.add(e.clientX - lastX, e.clientY - lastY, canvas.clientWidth, canvas.clientHeight);
    lastX = e.clientX;
    lastY = e.clientY;
});

const endDrag = (e: PointerEvent) => {
    dragging = false;
    canvas.releasePointerCapture(e.pointerId);
};
canvas.addEventListener("pointerup", endDrag);
canvas.addEventListener("pointercancel", endDrag);

function tick() {
    const pending = drag.take();
    if (pending && ws && ws.readyState === WebSocket.OPEN) {
        ws.send(rotateMessage(pending.dx, pending.dy));
    }
    requestAnimationFrame(tick);
}

// --- mapping controls -------------------------------------------------------

for (const box of Object.values(checks)) {
    box.addEventListener("change", sendMapping);
}
for (const input of Object.values(inputs)) {
    input.addEventListener("change", sendMapping);
}

function sendMapping() {
    if (!ws || ws.readyState !== WebSocket.OPEN) {
        writeControls(mapping.current);
        toast("not connected");
        return;
    }
    ws.send(mapping.propose(readControls()));
}

writeControls(DEFAULT_MAPPING);
connect();
requestAnimationFrame(tick);
