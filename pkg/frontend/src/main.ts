// Console wiring: WebSocket stream into a latest-frame mailbox, canvas
// render loop, sliders and preset buttons out through a rate limiter.

import { LatestFrameMailbox } from "./mailbox.js";
import { CommandRateLimiter } from "./ratelimit.js";
import { ReconnectingSocket } from "./socket.js";
import { StalenessTracker } from "./staleness.js";
import { StripChart } from "./plots.js";
import { drawSkeleton } from "./skeleton.js";
import { presetCommands } from "./controls.js";
import { JOINT_LIMIT_DEG, SCREW_RPM_LIMIT, buildCommand } from "./protocol.js";
import type { CommandMsg, PresetTable, StateFrameMsg } from "./types.js";

const mailbox = new LatestFrameMailbox<StateFrameMsg>();
const staleness = new StalenessTracker();

const skeletonCanvas = document.getElementById("skeleton") as HTMLCanvasElement;
const torqueCanvas = document.getElementById("torque-plot") as HTMLCanvasElement;
const currentCanvas = document.getElementById("current-plot") as HTMLCanvasElement;
const staleBadge = document.getElementById("stale-badge")!;
const connBadge = document.getElementById("conn-badge")!;
const clampBadge = document.getElementById("clamp-badge")!;
const errorBadge = document.getElementById("error-badge")!;
const modulePanel = document.getElementById("modules")!;
const presetPanel = document.getElementById("presets")!;

const COLORS = ["#58a6ff", "#3fb950", "#d29922", "#f778ba", "#a371f7"];
const torqueChart = new StripChart(
  [0, 1, 2, 3].flatMap((i) => [
    { label: `m${i} pitch`, color: COLORS[i]! },
    { label: `m${i} yaw`, color: COLORS[i]! + "88" },
  ]),
  10,
  "N*m",
);
const currentChart = new StripChart(
  [0, 1, 2, 3].map((i) => ({ label: `m${i} screw`, color: COLORS[i]! })),
  10,
  "A",
);

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const socket = new ReconnectingSocket(wsUrl, {
  onMessage: (msg) => {
    if (msg.kind === "state") {
      mailbox.put(msg);
      staleness.markFrame(performance.now());
      torqueChart.push(msg.t, msg.modules.flatMap((m) => m.est_joint_torques_nm));
      currentChart.push(msg.t, msg.modules.map((m) => m.screw_current_a));
    } else if (msg.kind === "ack") {
      clampBadge.classList.toggle("on", msg.clamped);
    } else {
      showError(msg.detail);
    }
  },
  onStatus: (status) => {
    connBadge.textContent = status;
    connBadge.className = `badge ${status === "open" ? "ok" : "warn"}`;
    document
      .querySelectorAll<HTMLInputElement>("input, button")
      .forEach((el) => (el.disabled = status !== "open"));
  },
  onSchemaError: () => showError("frame failed schema validation"),
});

const limiter = new CommandRateLimiter<CommandMsg>((cmd) => socket.send(cmd), 50);

let errorTimer: ReturnType<typeof setTimeout> | null = null;
function showError(detail: string): void {
  errorBadge.textContent = detail;
  errorBadge.classList.add("on");
  if (errorTimer) clearTimeout(errorTimer);
  errorTimer = setTimeout(() => errorBadge.classList.remove("on"), 4000);
}

interface SliderRow {
  pitch: HTMLInputElement;
  yaw: HTMLInputElement;
  screw: HTMLInputElement;
  readout: HTMLElement;
}
const rows: SliderRow[] = [];

function sendRow(moduleId: number): void {
  const row = rows[moduleId];
  if (!row) return;
  const built = buildCommand(
    moduleId,
    Number(row.pitch.value),
    Number(row.yaw.value),
    Number(row.screw.value),
  );
  clampBadge.classList.toggle("on", built.clamped);
  limiter.submit(built.message);
  row.readout.textContent =
    `${built.message.pitch_deg.toFixed(1)} / ${built.message.yaw_deg.toFixed(1)} deg  ` +
    `${built.message.screw_rpm.toFixed(0)} RPM`;
}

function buildModuleRows(n: number): void {
  modulePanel.innerHTML = "";
  rows.length = 0;
  for (let i = 0; i < n; i++) {
    const row = document.createElement("div");
    row.className = "module-row";
    row.innerHTML = `
      <span class="module-name" style="color:${COLORS[i % COLORS.length]}">module ${i}</span>
      <label>pitch <input type="range" min="-${JOINT_LIMIT_DEG}" max="${JOINT_LIMIT_DEG}" value="0" step="0.5" data-axis="pitch"></label>
      <label>yaw <input type="range" min="-${JOINT_LIMIT_DEG}" max="${JOINT_LIMIT_DEG}" value="0" step="0.5" data-axis="yaw"></label>
      <label>screw <input type="range" min="-${Math.ceil(SCREW_RPM_LIMIT)}" max="${Math.ceil(SCREW_RPM_LIMIT)}" value="0" step="1" data-axis="screw"></label>
      <span class="readout">0.0 / 0.0 deg  0 RPM</span>`;
    modulePanel.appendChild(row);
    const inputs = row.querySelectorAll<HTMLInputElement>("input");
    const entry: SliderRow = {
      pitch: inputs[0]!,
      yaw: inputs[1]!,
      screw: inputs[2]!,
      readout: row.querySelector(".readout")!,
    };
    rows.push(entry);
    inputs.forEach((input) => input.addEventListener("input", () => sendRow(i)));
  }
}

async function loadPresets(): Promise<void> {
  const resp = await fetch("/api/presets");
  const body = (await resp.json()) as { presets: PresetTable };
  presetPanel.innerHTML = "";
  for (const [name, table] of Object.entries(body.presets)) {
    const button = document.createElement("button");
    button.textContent = name.replace("_", " ");
    button.addEventListener("click", () => {
      const n = Math.max(rows.length, table.length + 1);
      for (const built of presetCommands(table, n)) {
        socket.send(built.message);
        const row = rows[built.message.module_id];
        if (row) {
          row.pitch.value = String(built.message.pitch_deg);
          row.yaw.value = String(built.message.yaw_deg);
        }
      }
    });
    presetPanel.appendChild(button);
  }
}

function resizeCanvas(canvas: HTMLCanvasElement): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const ratio = window.devicePixelRatio || 1;
  canvas.width = rect.width * ratio;
  canvas.height = rect.height * ratio;
  const ctx = canvas.getContext("2d")!;
  ctx.setTransform(ratio, 0, 0, ratio, 0, 0);
  return [rect.width, rect.height];
}

let built = false;
function renderLoop(): void {
  const frame = mailbox.take() ?? mailbox.peek();
  if (frame) {
    if (!built) {
      buildModuleRows(frame.modules.length);
      built = true;
    }
    const [w, h] = resizeCanvas(skeletonCanvas);
    drawSkeleton(skeletonCanvas.getContext("2d")!, frame, w, h);
    const [tw, th] = resizeCanvas(torqueCanvas);
    torqueChart.draw(torqueCanvas.getContext("2d")!, tw, th);
    const [cw, ch] = resizeCanvas(currentCanvas);
    currentChart.draw(currentCanvas.getContext("2d")!, cw, ch);
  }
  staleBadge.classList.toggle("on", staleness.isStale(performance.now()));
  requestAnimationFrame(renderLoop);
}

socket.connect();
loadPresets().catch((e) => showError(`presets unavailable: ${e}`));
requestAnimationFrame(renderLoop);
