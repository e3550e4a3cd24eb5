// Wire schema of the gateway. Field names and units (degrees, RPM, amps)
// match the server's JSON exactly.

export interface ModuleStateMsg {
  module_id: number;
  timestamp: number;
  q_measured_deg: [number, number];
  q_setpoint_deg: [number, number];
  screw_rpm: number;
  screw_rpm_setpoint: number;
  joint_currents_a: [number, number];
  screw_current_a: number;
  est_joint_torques_nm: [number, number];
  imu_orientation: [number, number, number, number];
  temperature_c: number;
  slip_flags: [boolean, boolean, boolean];
}

export interface BodyPoseMsg {
  position_cm: [number, number, number];
  quaternion: [number, number, number, number];
}

export interface WorldPoseMsg {
  x: number;
  y: number;
  theta: number;
}

export interface StateFrameMsg {
  kind: "state";
  t: number;
  modules: ModuleStateMsg[];
  body_poses: BodyPoseMsg[];
  world_pose: WorldPoseMsg;
  track: [number, number][];
}

export interface CommandMsg {
  kind: "command";
  module_id: number;
  pitch_deg: number;
  yaw_deg: number;
  screw_rpm: number;
}

export interface AckMsg {
  kind: "ack";
  module_id: number;
  applied_pitch_deg: number;
  applied_yaw_deg: number;
  applied_screw_rpm: number;
  clamped: boolean;
}

export interface ErrorMsg {
  kind: "error";
  detail: string;
}

export type ServerMsg = StateFrameMsg | AckMsg | ErrorMsg;

export type PresetTable = Record<string, [number, number][]>;
