// Validation and unit conversion at the gateway boundary. The UI never
// originates state: everything rendered comes from a validated frame.

import type { CommandMsg, ServerMsg, StateFrameMsg } from "./types.js";

export const JOINT_LIMIT_DEG = 90;
// Output-shaft ceiling of the screw drive: 12000 RPM / (35 * 3.4).
export const SCREW_RPM_LIMIT = 12000 / (35 * 3.4);

export function degToRad(deg: number): number {
  return (deg * Math.PI) / 180;
}

export function radToDeg(rad: number): number {
  return (rad * 180) / Math.PI;
}

export interface Clamped {
  value: number;
  clamped: boolean;
}

export function clampJointDeg(deg: number): Clamped {
  const v = Math.min(Math.max(deg, -JOINT_LIMIT_DEG), JOINT_LIMIT_DEG);
  return { value: v, clamped: v !== deg };
}

export function clampScrewRpm(rpm: number): Clamped {
  const v = Math.min(Math.max(rpm, -SCREW_RPM_LIMIT), SCREW_RPM_LIMIT);
  return { value: v, clamped: v !== rpm };
}

export interface BuiltCommand {
  message: CommandMsg;
  clamped: boolean;
}

export function buildCommand(
  moduleId: number,
  pitchDeg: number,
  yawDeg: number,
  screwRpm: number,
): BuiltCommand {
  const p = clampJointDeg(pitchDeg);
  const y = clampJointDeg(yawDeg);
  const s = clampScrewRpm(screwRpm);
  return {
    message: {
      kind: "command",
      module_id: moduleId,
      pitch_deg: p.value,
      yaw_deg: y.value,
      screw_rpm: s.value,
    },
    clamped: p.clamped || y.clamped || s.clamped,
  };
}

function isNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isNumberArray(v: unknown, n: number): boolean {
  return Array.isArray(v) && v.length === n && v.every(isNumber);
}

export function parseServerMsg(text: string): ServerMsg | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const msg = obj as Record<string, unknown>;
  if (msg.kind === "state") {
    return validateStateFrame(msg) ? (msg as unknown as StateFrameMsg) : null;
  }
  if (msg.kind === "ack" || msg.kind === "error") {
    return msg as unknown as ServerMsg;
  }
  return null;
}

export function validateStateFrame(msg: Record<string, unknown>): boolean {
  if (!isNumber(msg.t)) return false;
  if (!Array.isArray(msg.modules) || !Array.isArray(msg.body_poses)) return false;
  for (const m of msg.modules as Record<string, unknown>[]) {
    if (typeof m !== "object" || m === null) return false;
    if (!isNumber(m.module_id) || !isNumber(m.timestamp)) return false;
    if (!isNumberArray(m.q_measured_deg, 2)) return false;
    if (!isNumberArray(m.q_setpoint_deg, 2)) return false;
    if (!isNumber(m.screw_rpm) || !isNumber(m.screw_rpm_setpoint)) return false;
    if (!isNumberArray(m.joint_currents_a, 2)) return false;
    if (!isNumber(m.screw_current_a)) return false;
    if (!isNumberArray(m.est_joint_torques_nm, 2)) return false;
    if (!isNumberArray(m.imu_orientation, 4)) return false;
  }
  for (const p of msg.body_poses as Record<string, unknown>[]) {
    if (typeof p !== "object" || p === null) return false;
    if (!isNumberArray(p.position_cm, 3)) return false;
    if (!isNumberArray(p.quaternion, 4)) return false;
  }
  const pose = msg.world_pose as Record<string, unknown> | undefined;
  if (!pose || !isNumber(pose.x) || !isNumber(pose.y) || !isNumber(pose.theta)) {
    return false;
  }
  return true;
}
