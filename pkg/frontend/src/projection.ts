// Small 3D helpers: quaternion to rotation matrix and an orthographic
// isometric-style projection for the skeleton view. The UI does no
// kinematics; it only places the poses the gateway streamed.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export function quatToMatrix(q: Quat): number[][] {
  const [w, x, y, z] = q;
  return [
    [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
    [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
    [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
  ];
}

export function rotate(m: number[][], v: Vec3): Vec3 {
  return [
    m[0]![0]! * v[0] + m[0]![1]! * v[1] + m[0]![2]! * v[2],
    m[1]![0]! * v[0] + m[1]![1]! * v[1] + m[1]![2]! * v[2],
    m[2]![0]! * v[0] + m[2]![1]! * v[1] + m[2]![2]! * v[2],
  ];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export interface Camera {
  azimuthRad: number;
  elevationRad: number;
  scalePxPerCm: number;
  centerPx: [number, number];
}

/** Orthographic projection; world z is up on screen. */
export function project(cam: Camera, p: Vec3): [number, number, number] {
  const ca = Math.cos(cam.azimuthRad);
  const sa = Math.sin(cam.azimuthRad);
  const ce = Math.cos(cam.elevationRad);
  const se = Math.sin(cam.elevationRad);
  // Rotate about z by azimuth, then tilt by elevation.
  const x1 = ca * p[0] + sa * p[1];
  const y1 = -sa * p[0] + ca * p[1];
  const z1 = p[2];
  const yScreen = ce * z1 + se * y1;
  const depth = ce * y1 - se * z1;
  return [
    cam.centerPx[0] + x1 * cam.scalePxPerCm,
    cam.centerPx[1] - yScreen * cam.scalePxPerCm,
    depth,
  ];
}
