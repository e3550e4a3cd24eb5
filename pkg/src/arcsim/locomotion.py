"""Screw-ground contact model and planar body-twist solver.

Each screw in ground contact contributes a contact-point velocity that is
linear in its angular speed: a thrust component along the screw axis scaled
by the lead, and a lateral rolling component perpendicular to it. Stacking
the rigid-body constraint over all contacts and solving least-squares yields
the planar body twist, omni-wheel style.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kinematics import ChainModel, Transform

SCREW_LEAD_M = 0.137
SCREW_OUTER_RADIUS_M = 0.064  # from the 128 mm outer diameter

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TerrainParams:
    """Slip parameters for one terrain preset."""

    name: str = "granular"
    axial_slip: float = 0.1
    lateral_coupling_m_per_rad: float = 0.0
    contact_height_tol_cm: float = 2.0


# Granular media: the thread tunnels, most of the lead converts to thrust.
GRANULAR_TERRAIN = TerrainParams("granular", axial_slip=0.1,
                                 lateral_coupling_m_per_rad=0.0)
# Rigid ground: the thread mostly slips axially while the body rolls
# sideways like a wheel; a little residual thread bite remains.
RIGID_TERRAIN = TerrainParams("rigid", axial_slip=0.8,
                              lateral_coupling_m_per_rad=SCREW_OUTER_RADIUS_M)

TERRAIN_PRESETS = {t.name: t for t in (GRANULAR_TERRAIN, RIGID_TERRAIN)}


@dataclass(frozen=True)
class ScrewContact:
    """One screw's ground-contact line, projected to the plane."""

    body_index: int
    axis_xy: tuple[float, float]
    position_xy: tuple[float, float]
    axial_slip: float = 0.1
    lateral_coupling_m_per_rad: float = 0.0
    lead_m: float = SCREW_LEAD_M

    def __post_init__(self) -> None:
        norm = math.hypot(*self.axis_xy)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("axis_xy must be a unit vector")
        if not 0.0 <= self.axial_slip <= 1.0:
            raise ValueError("axial_slip must be in [0, 1]")

    @staticmethod
    def from_axis(body_index: int, axis_xy: Sequence[float],
                  position_xy: Sequence[float], terrain: TerrainParams,
                  lead_m: float = SCREW_LEAD_M) -> "ScrewContact":
        ax, ay = float(axis_xy[0]), float(axis_xy[1])
        norm = math.hypot(ax, ay)
        if norm < 1e-12:
            raise ValueError("screw axis has no planar component")
        return ScrewContact(
            body_index=body_index,
            axis_xy=(ax / norm, ay / norm),
            position_xy=(float(position_xy[0]), float(position_xy[1])),
            axial_slip=terrain.axial_slip,
            lateral_coupling_m_per_rad=terrain.lateral_coupling_m_per_rad,
            lead_m=lead_m,
        )


@dataclass(frozen=True)
class Twist2_5D:
    """Planar body twist of the base frame."""

    vx: float
    vy: float
    omega_z: float


@dataclass(frozen=True)
class PlanarPose:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta}


def screw_contact_velocity(contact: ScrewContact, screw_omega_rad_s: float) -> np.ndarray:
    """Planar velocity (m/s) of the ground-contact point for one screw."""
    ax, ay = contact.axis_xy
    axial = contact.lead_m / TWO_PI * screw_omega_rad_s * (1.0 - contact.axial_slip)
    lateral = contact.lateral_coupling_m_per_rad * screw_omega_rad_s
    # perp() rotates the axis +90 degrees in the plane.
    return np.array([ax * axial - ay * lateral, ay * axial + ax * lateral])


def solve_body_twist(contacts: Sequence[ScrewContact],
                     omegas_rad_s: Sequence[float]) -> Twist2_5D:
    """Least-squares planar twist from per-screw contact velocities.

    Stacks v_i = (vx, vy) + omega_z x r_i over all contacts. Rank-deficient
    stacks (a single contact cannot command yaw) resolve to the minimum-norm
    solution.
    """
    if len(contacts) == 0:
        raise ValueError("need at least one contact")
    if len(contacts) != len(omegas_rad_s):
        raise ValueError("contacts and omegas must have equal length")
    a = np.zeros((2 * len(contacts), 3))
    b = np.zeros(2 * len(contacts))
    for i, (contact, omega) in enumerate(zip(contacts, omegas_rad_s)):
        rx, ry = contact.position_xy
        v = screw_contact_velocity(contact, omega)
        a[2 * i] = (1.0, 0.0, -ry)
        a[2 * i + 1] = (0.0, 1.0, rx)
        b[2 * i] = v[0]
        b[2 * i + 1] = v[1]
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return Twist2_5D(vx=float(sol[0]), vy=float(sol[1]), omega_z=float(sol[2]))


def integrate_pose(pose: PlanarPose, twist: Twist2_5D, dt: float) -> PlanarPose:
    """Exact constant-twist integration on the plane (SE(2) exponential)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    w = twist.omega_z
    c0, s0 = math.cos(pose.theta), math.sin(pose.theta)
    if abs(w * dt) < 1e-8:
        dx_b = twist.vx * dt
        dy_b = twist.vy * dt
    else:
        s, c = math.sin(w * dt), math.cos(w * dt)
        dx_b = (s * twist.vx - (1.0 - c) * twist.vy) / w
        dy_b = ((1.0 - c) * twist.vx + s * twist.vy) / w
    return PlanarPose(
        x=pose.x + c0 * dx_b - s0 * dy_b,
        y=pose.y + s0 * dx_b + c0 * dy_b,
        theta=pose.theta + w * dt,
    )


def contacts_from_chain(model: ChainModel, poses: Sequence[Transform],
                        terrain: TerrainParams,
                        lead_m: float = SCREW_LEAD_M) -> list[ScrewContact]:
    """Ground contacts for the bodies a configuration puts on the plane.

    Poses are in the base body frame with lengths in cm; the ground plane is
    z = 0 of that frame. A body is in contact when its screw axis stays
    within the height tolerance over the body length.
    """
    contacts = []
    tol_cm = terrain.contact_height_tol_cm
    for i, pose in enumerate(poses):
        axis = pose.rotation[:, 0]
        origin = pose.translation
        tip = origin + axis * model.body_max_len_cm
        if abs(origin[2]) > tol_cm or abs(tip[2]) > tol_cm:
            continue
        planar = math.hypot(axis[0], axis[1])
        if planar < 1e-9:
            continue
        center_cm = origin + axis * (model.body_max_len_cm / 2.0)
        contacts.append(
            ScrewContact.from_axis(
                body_index=i,
                axis_xy=(axis[0] / planar, axis[1] / planar),
                position_xy=(center_cm[0] * 1e-2, center_cm[1] * 1e-2),
                terrain=terrain,
                lead_m=lead_m,
            )
        )
    return contacts
