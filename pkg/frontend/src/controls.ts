// Command-side helpers: preset fan-out and per-module slider state.
// Pure logic lives here so it can be tested without a DOM.

import { buildCommand, BuiltCommand } from "./protocol.js";
import type { PresetTable } from "./types.js";

export interface ModuleSetpoint {
  moduleId: number;
  pitchDeg: number;
  yawDeg: number;
  screwRpm: number;
}

/** One command per module for a preset table; modules beyond the table
 * get zeroed joints (screw speed untouched semantics: presets pose only). */
export function presetCommands(
  table: [number, number][],
  nModules: number,
): BuiltCommand[] {
  const commands: BuiltCommand[] = [];
  for (let i = 0; i < nModules; i++) {
    const entry = table[i];
    const pitch = entry ? entry[0] : 0;
    const yaw = entry ? entry[1] : 0;
    commands.push(buildCommand(i, pitch, yaw, 0));
  }
  return commands;
}

export function setpointCommand(sp: ModuleSetpoint): BuiltCommand {
  return buildCommand(sp.moduleId, sp.pitchDeg, sp.yawDeg, sp.screwRpm);
}

export function presetNames(table: PresetTable): string[] {
  return Object.keys(table);
}
