"""Forward kinematics of the serpentine chain.

Each module contributes three modified-DH rows: an actuated pitch row, an
actuated yaw row, and a fixed row reaching the next module's frame. Row
transforms compose as Rx(alpha) * Tx(a) * Rz(theta) * Tz(d). Lengths are in
centimeters, angles in radians throughout this module; external interfaces
convert from degrees at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

# Joint travel is +/- 90 degrees on each U-joint axis.
JOINT_LIMIT_RAD = math.pi / 2

# Link dimension and mass registry defaults (cm, kg).
BODY_MAX_LEN_CM = 19.6
BODY_MAX_DIA_CM = 12.5
UJOINT_MAX_LEN_CM = 16.8
UJOINT_MAX_DIA_CM = 11.0
BODY_MASS_KG = 1.0
UJOINT_MASS_KG = 0.88
HEAD_MASS_KG = 0.68
REPORTED_SYSTEM_MASS_KG = 6.1


class JointKind(str, Enum):
    PITCH = "pitch"
    YAW = "yaw"
    FIXED = "fixed"


@dataclass(frozen=True)
class DhRow:
    """One modified-DH row: a (cm), alpha (rad), d (cm), theta offset (rad)."""

    a: float
    alpha: float
    d: float = 0.0
    theta_offset: float = 0.0
    joint_kind: JointKind = JointKind.FIXED


# Canonical per-module rows: pitch, yaw, then the fixed link to the next module.
PITCH_ROW = DhRow(a=28.0, alpha=-math.pi / 2, joint_kind=JointKind.PITCH)
YAW_ROW = DhRow(a=0.0, alpha=math.pi / 2, joint_kind=JointKind.YAW)
NEXT_MODULE_ROW = DhRow(a=8.4, alpha=0.0, joint_kind=JointKind.FIXED)
MODULE_ROWS = (PITCH_ROW, YAW_ROW, NEXT_MODULE_ROW)


@dataclass(frozen=True)
class JointAngles:
    """Pitch/yaw angle pair for one U-joint (rad)."""

    q_p: float = 0.0
    q_y: float = 0.0

    def validate(self) -> None:
        if abs(self.q_p) > JOINT_LIMIT_RAD + 1e-12:
            raise ValueError(f"pitch angle {self.q_p} exceeds +/-pi/2 limit")
        if abs(self.q_y) > JOINT_LIMIT_RAD + 1e-12:
            raise ValueError(f"yaw angle {self.q_y} exceeds +/-pi/2 limit")

    def clamped(self) -> "JointAngles":
        return JointAngles(
            q_p=min(max(self.q_p, -JOINT_LIMIT_RAD), JOINT_LIMIT_RAD),
            q_y=min(max(self.q_y, -JOINT_LIMIT_RAD), JOINT_LIMIT_RAD),
        )


@dataclass(frozen=True)
class Transform:
    """Rigid transform: orthonormal 3x3 rotation plus translation (cm)."""

    rotation: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "Transform":
        return Transform(np.eye(3), np.zeros(3))

    def __matmul__(self, other: "Transform") -> "Transform":
        return Transform(
            rotation=self.rotation @ other.rotation,
            translation=self.translation + self.rotation @ other.translation,
        )

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def is_orthonormal(self, tol: float = 1e-9) -> bool:
        r = self.rotation
        return (
            np.allclose(r @ r.T, np.eye(3), atol=tol)
            and abs(np.linalg.det(r) - 1.0) < tol
        )


def _rot_x(a: float) -> np.ndarray:
    ca, sa = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]])


def _rot_z(t: float) -> np.ndarray:
    ct, st = math.cos(t), math.sin(t)
    return np.array([[ct, -st, 0.0], [st, ct, 0.0], [0.0, 0.0, 1.0]])


def dh_transform(row: DhRow, q: float = 0.0) -> Transform:
    """Rigid transform of one row with theta = theta_offset + q.

    q is ignored for fixed rows. Composition order is
    Rx(alpha) * Tx(a) * Rz(theta) * Tz(d).
    """
    theta = row.theta_offset + (0.0 if row.joint_kind is JointKind.FIXED else q)
    rx = _rot_x(row.alpha)
    rz = _rot_z(theta)
    rotation = rx @ rz
    # Tx(a) happens after Rx(alpha); x is invariant under Rx, so the a-offset
    # stays on the x axis. Tz(d) is expressed in the fully rotated frame.
    translation = np.array([row.a, 0.0, 0.0]) + rotation @ np.array([0.0, 0.0, row.d])
    return Transform(rotation, translation)


def module_fk(q: JointAngles, rows: Sequence[DhRow] = MODULE_ROWS) -> Transform:
    """Pose of the next module's frame for one joint configuration.

    Raises ValueError naming the offending axis when q violates the
    +/- 90 degree joint limit.
    """
    q.validate()
    by_kind = {JointKind.PITCH: q.q_p, JointKind.YAW: q.q_y, JointKind.FIXED: 0.0}
    t = Transform.identity()
    for row in rows:
        t = t @ dh_transform(row, by_kind[row.joint_kind])
    return t


@dataclass
class ChainModel:
    """Serially chained robot: n_bodies bodies joined by n_bodies-1 U-joints."""

    n_bodies: int = 4
    rows_per_module: tuple = MODULE_ROWS
    body_max_len_cm: float = BODY_MAX_LEN_CM
    body_max_dia_cm: float = BODY_MAX_DIA_CM
    ujoint_max_len_cm: float = UJOINT_MAX_LEN_CM
    ujoint_max_dia_cm: float = UJOINT_MAX_DIA_CM
    body_mass_kg: float = BODY_MASS_KG
    ujoint_mass_kg: float = UJOINT_MASS_KG
    head_mass_kg: float = HEAD_MASS_KG
    reported_system_mass_kg: float = REPORTED_SYSTEM_MASS_KG

    def __post_init__(self) -> None:
        if self.n_bodies < 1:
            raise ValueError("chain needs at least one body")

    @property
    def n_joints(self) -> int:
        return self.n_bodies - 1

    @property
    def parts_mass_sum_kg(self) -> float:
        return (
            self.n_bodies * self.body_mass_kg
            + self.n_joints * self.ujoint_mass_kg
            + self.head_mass_kg
        )

    @property
    def mass_discrepancy_kg(self) -> float:
        """Gap between the summed part masses and the reported system mass.

        The registry values do not add up to the reported total; both numbers
        are kept and the gap is exposed instead of silently resolved.
        """
        return self.parts_mass_sum_kg - self.reported_system_mass_kg


def chain_fk(model: ChainModel, all_q: Sequence[JointAngles]) -> list[Transform]:
    """Base-frame pose of every body, head body last.

    Body 0 is the base frame (identity). Raises ValueError when len(all_q)
    does not equal n_bodies - 1.
    """
    if len(all_q) != model.n_joints:
        raise ValueError(
            f"expected {model.n_joints} joint configurations for "
            f"{model.n_bodies} bodies, got {len(all_q)}"
        )
    poses = [Transform.identity()]
    for q in all_q:
        q.validate()
        by_kind = {JointKind.PITCH: q.q_p, JointKind.YAW: q.q_y, JointKind.FIXED: 0.0}
        t = poses[-1]
        for row in model.rows_per_module:
            t = t @ dh_transform(row, by_kind[row.joint_kind])
        poses.append(t)
    return poses


def zero_config_length_cm(model: ChainModel) -> float:
    """Straightened chain length from the tail of body 0 to the head tip."""
    poses = chain_fk(model, [JointAngles()] * model.n_joints)
    span = float(np.linalg.norm(poses[-1].translation - poses[0].translation))
    return span + model.body_max_len_cm


PRESET_NAMES = ("straight", "square", "m_shape")

# The M profile alternates yaw sign; +/-75 degrees keeps the shape inside the
# joint limits while matching the intended silhouette.
_M_SHAPE_YAW_DEG = 75.0


def preset_configuration(name: str, n_joints: int = 3) -> list[JointAngles]:
    """Named joint-angle table for the demonstration configurations."""
    if name == "straight":
        return [JointAngles()] * n_joints
    if name == "square":
        return [JointAngles(0.0, JOINT_LIMIT_RAD)] * n_joints
    if name == "m_shape":
        return [
            JointAngles(0.0, math.radians(_M_SHAPE_YAW_DEG * (-1) ** i))
            for i in range(n_joints)
        ]
    raise KeyError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def rotation_to_quaternion(r: np.ndarray) -> tuple[float, float, float, float]:
    """Unit quaternion (w, x, y, z) of a rotation matrix."""
    tr = r[0, 0] + r[1, 1] + r[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s
    n = math.sqrt(w * w + x * x + y * y + z * z)
    return (w / n, x / n, y / n, z / n)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi
