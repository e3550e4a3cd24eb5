// Skeleton view: each body segment is drawn as a cylinder at the pose the
// gateway streamed. Segment geometry is derived purely from the frame.

import type { StateFrameMsg } from "./types.js";
import {
  Camera,
  Vec3,
  add,
  project,
  quatToMatrix,
  rotate,
} from "./projection.js";

export const BODY_LEN_CM = 19.6;
export const BODY_DIA_CM = 12.5;

export interface Segment {
  start: Vec3;
  end: Vec3;
  moduleId: number;
}

/** World-frame body segments from a state frame (cm). */
export function computeSegments(frame: StateFrameMsg): Segment[] {
  const { x, y, theta } = frame.world_pose;
  const c = Math.cos(theta);
  const s = Math.sin(theta);
  const worldOffsetCm: Vec3 = [x * 100, y * 100, 0];
  return frame.body_poses.map((pose, i) => {
    const m = quatToMatrix(pose.quaternion);
    const axis = rotate(m, [1, 0, 0]);
    const base: Vec3 = [
      c * pose.position_cm[0] - s * pose.position_cm[1],
      s * pose.position_cm[0] + c * pose.position_cm[1],
      pose.position_cm[2],
    ];
    const axisWorld: Vec3 = [
      c * axis[0] - s * axis[1],
      s * axis[0] + c * axis[1],
      axis[2],
    ];
    const start = add(worldOffsetCm, base);
    const end = add(start, [
      axisWorld[0] * BODY_LEN_CM,
      axisWorld[1] * BODY_LEN_CM,
      axisWorld[2] * BODY_LEN_CM,
    ]);
    return { start, end, moduleId: i };
  });
}

const MODULE_COLORS = ["#58a6ff", "#3fb950", "#d29922", "#f778ba", "#a371f7"];

export function fitCamera(segments: Segment[], width: number,
                          height: number): Camera {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const seg of segments) {
    for (const p of [seg.start, seg.end]) {
      minX = Math.min(minX, p[0]); maxX = Math.max(maxX, p[0]);
      minY = Math.min(minY, p[1]); maxY = Math.max(maxY, p[1]);
    }
  }
  if (!segments.length || !isFinite(minX)) {
    minX = -50; maxX = 150; minY = -100; maxY = 100;
  }
  const span = Math.max(maxX - minX, maxY - minY, 80) + 60;
  return {
    azimuthRad: -Math.PI / 5,
    elevationRad: Math.PI / 5,
    scalePxPerCm: Math.min(width, height) / span,
    centerPx: [width / 2, height / 2],
  };
}

export function drawSkeleton(ctx: CanvasRenderingContext2D,
                             frame: StateFrameMsg, width: number,
                             height: number): void {
  const segments = computeSegments(frame);
  const cam = fitCamera(segments, width, height);
  ctx.clearRect(0, 0, width, height);

  drawGrid(ctx, cam, segments);
  drawTrack(ctx, cam, frame);

  const radiusPx = (BODY_DIA_CM / 2) * cam.scalePxPerCm;
  const ordered = segments
    .map((seg) => ({ seg, depth: project(cam, seg.start)[2] }))
    .sort((a, b) => a.depth - b.depth);
  for (const { seg } of ordered) {
    const [x1, y1] = project(cam, seg.start);
    const [x2, y2] = project(cam, seg.end);
    const color = MODULE_COLORS[seg.moduleId % MODULE_COLORS.length]!;
    ctx.strokeStyle = color;
    ctx.lineCap = "round";
    ctx.lineWidth = radiusPx * 2;
    ctx.globalAlpha = 0.85;
    ctx.beginPath();
    ctx.moveTo(x1, y1);
    ctx.lineTo(x2, y2);
    ctx.stroke();
    ctx.globalAlpha = 1.0;
    // End caps hint at the cylinder shape.
    ctx.fillStyle = color;
    for (const [ex, ey] of [[x1, y1], [x2, y2]] as const) {
      ctx.beginPath();
      ctx.ellipse(ex, ey, radiusPx, radiusPx * 0.55, 0, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

function drawGrid(ctx: CanvasRenderingContext2D, cam: Camera,
                  segments: Segment[]): void {
  let cx = 50, cy = 0;
  if (segments.length) {
    cx = segments.reduce((a, s) => a + s.start[0], 0) / segments.length;
    cy = segments.reduce((a, s) => a + s.start[1], 0) / segments.length;
  }
  const step = 25;
  const half = 5;
  ctx.strokeStyle = "rgba(140, 150, 160, 0.25)";
  ctx.lineWidth = 1;
  const x0 = Math.round(cx / step) * step;
  const y0 = Math.round(cy / step) * step;
  for (let i = -half; i <= half; i++) {
    const [ax, ay] = project(cam, [x0 + i * step, y0 - half * step, 0]);
    const [bx, by] = project(cam, [x0 + i * step, y0 + half * step, 0]);
    ctx.beginPath(); ctx.moveTo(ax, ay); ctx.lineTo(bx, by); ctx.stroke();
    const [cx1, cy1] = project(cam, [x0 - half * step, y0 + i * step, 0]);
    const [dx, dy] = project(cam, [x0 + half * step, y0 + i * step, 0]);
    ctx.beginPath(); ctx.moveTo(cx1, cy1); ctx.lineTo(dx, dy); ctx.stroke();
  }
}

function drawTrack(ctx: CanvasRenderingContext2D, cam: Camera,
                   frame: StateFrameMsg): void {
  if (frame.track.length < 2) return;
  ctx.strokeStyle = "rgba(88, 166, 255, 0.5)";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  frame.track.forEach(([tx, ty], i) => {
    const [px, py] = project(cam, [tx * 100, ty * 100, 0]);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}
