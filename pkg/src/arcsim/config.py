"""Configuration file handling.

One INI-style key-value file is the single source for every tunable
parameter: chain geometry and masses, transmission specs, friction, control
gains and rates, power limits, terrain presets, and bus settings. Units are
spelled out in the key names. `default_config()` returns the built-in
defaults; `load_config(path)` overlays a user file on top of them.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .actuation import FrictionParams, TransmissionSpec
from .kinematics import ChainModel, DhRow, JointKind
from .locomotion import TerrainParams

DEFAULT_CONFIG_TEXT = """\
[chain]
n_bodies = 4
body_max_len_cm = 19.6
body_max_dia_cm = 12.5
ujoint_max_len_cm = 16.8
ujoint_max_dia_cm = 11.0
body_mass_kg = 1.0
ujoint_mass_kg = 0.88
head_mass_kg = 0.68
reported_system_mass_kg = 6.1
# One row per line: a_cm, alpha_rad, d_cm, theta_offset_rad, kind
dh_rows =
    28.0, -1.5707963267948966, 0.0, 0.0, pitch
    0.0, 1.5707963267948966, 0.0, 0.0, yaw
    8.4, 0.0, 0.0, 0.0, fixed

[screw]
helical_pitch_mm = 137.0
outer_diameter_mm = 128.0
root_diameter_mm = 112.5
helix_angle_deg = 22.0

[screw_drive]
motor_speed_limit_rpm = 12000
stage_ratios = 35, 3.4
continuous_torque_nm = 1.6
peak_torque_nm = 2.0
efficiency = 1.0

[ujoint_drive]
motor_speed_limit_rpm = 12000
stage_ratios = 44, 3.125
continuous_torque_nm = 2.1
peak_torque_nm = 2.7
efficiency = 1.0

[friction]
coulomb_nm = 0.48
viscous_nm_per_rad_s = 0.0
stiction_nm = 0.48
cogging_amplitude_nm = 0.0
v_stop_rad_s = 0.001

[control]
control_rate_hz = 125
interface_rate_hz = 50
kp = 40.0
ki = 600.0
kd = 1.0
output_limit = 1.0
integral_limit = 0.0025
derivative_cutoff_hz = 20.0
joint_inertia_kg_m2 = 0.01
stiction_ff_fraction = 0.3
screw_time_constant_s = 0.05
screw_inertia_kg_m2 = 0.002
screw_drag_nm_per_rad_s = 0.05
encoder_bits = 14
torque_constant_nm_per_a = 0.0136
current_noise_sigma_a = 0.0
command_staleness_s = 0.5
ambient_temperature_c = 25.0
current_filter_cutoff_hz = 5.0

[power]
v_in_min = 12.0
v_in_max = 60.0
rail_voltage = 24.0
current_limit_at_min_vin_a = 12.7
current_limit_at_max_vin_a = 10.2
module_power_limit_w = 310.0
system_power_limit_w = 1240.0
electronics_overhead_w = 5.0

[terrain]
preset = granular
granular_axial_slip = 0.1
granular_lateral_coupling_m_per_rad = 0.0
rigid_axial_slip = 0.8
rigid_lateral_coupling_m_per_rad = 0.064
contact_height_tol_cm = 2.0

[experiments]
cantilever_mass_kg = 0.5
cantilever_length_m = 0.3
transparency_amplitude_deg = 45.0
transparency_period_s = 20.0
pendulum_off_angle_deg = 45.0
pendulum_circle_period_s = 8.0
pendulum_mass_kg = 1.0
pendulum_arm_m = 0.18

[bus]
port = 7781
max_frame_bytes = 1048576
"""


@dataclass(frozen=True)
class ScrewGeometry:
    helical_pitch_mm: float = 137.0
    outer_diameter_mm: float = 128.0
    root_diameter_mm: float = 112.5
    helix_angle_deg: float = 22.0

    @property
    def lead_m(self) -> float:
        return self.helical_pitch_mm * 1e-3

    @property
    def outer_radius_m(self) -> float:
        return self.outer_diameter_mm * 1e-3 / 2.0


@dataclass(frozen=True)
class ControlConfig:
    control_rate_hz: float = 125.0
    interface_rate_hz: float = 50.0
    kp: float = 40.0
    ki: float = 600.0
    kd: float = 1.0
    output_limit: float = 1.0
    integral_limit: float = 0.0025
    derivative_cutoff_hz: float = 20.0
    joint_inertia_kg_m2: float = 0.01
    screw_time_constant_s: float = 0.05
    screw_inertia_kg_m2: float = 0.002
    screw_drag_nm_per_rad_s: float = 0.05
    encoder_bits: int = 14
    torque_constant_nm_per_a: float = 0.0136
    current_noise_sigma_a: float = 0.0
    command_staleness_s: float = 0.5
    ambient_temperature_c: float = 25.0
    stiction_ff_fraction: float = 0.3
    current_filter_cutoff_hz: float = 5.0


@dataclass(frozen=True)
class PowerConfig:
    v_in_min: float = 12.0
    v_in_max: float = 60.0
    rail_voltage: float = 24.0
    current_limit_at_min_vin_a: float = 12.7
    current_limit_at_max_vin_a: float = 10.2
    module_power_limit_w: float = 310.0
    system_power_limit_w: float = 1240.0
    electronics_overhead_w: float = 5.0


@dataclass(frozen=True)
class ExperimentConfig:
    cantilever_mass_kg: float = 0.5
    cantilever_length_m: float = 0.3
    transparency_amplitude_deg: float = 45.0
    transparency_period_s: float = 20.0
    pendulum_off_angle_deg: float = 45.0
    pendulum_circle_period_s: float = 8.0
    pendulum_mass_kg: float = 1.0
    pendulum_arm_m: float = 0.18


@dataclass(frozen=True)
class BusConfig:
    port: int = 7781
    max_frame_bytes: int = 1024 * 1024


@dataclass
class SimConfig:
    chain: ChainModel = field(default_factory=ChainModel)
    screw_geometry: ScrewGeometry = field(default_factory=ScrewGeometry)
    screw_drive: TransmissionSpec = field(
        default_factory=lambda: TransmissionSpec(12000.0, (35.0, 3.4), 1.6, 2.0)
    )
    ujoint_drive: TransmissionSpec = field(
        default_factory=lambda: TransmissionSpec(12000.0, (44.0, 3.125), 2.1, 2.7)
    )
    friction: FrictionParams = field(default_factory=FrictionParams)
    control: ControlConfig = field(default_factory=ControlConfig)
    power: PowerConfig = field(default_factory=PowerConfig)
    terrains: dict = field(default_factory=dict)
    terrain_preset: str = "granular"
    experiments: ExperimentConfig = field(default_factory=ExperimentConfig)
    bus: BusConfig = field(default_factory=BusConfig)

    @property
    def terrain(self) -> TerrainParams:
        return self.terrains[self.terrain_preset]

    def snapshot(self) -> dict:
        """JSON-safe dump of every parameter, stored with experiment records."""
        return {
            "chain": {
                "n_bodies": self.chain.n_bodies,
                "body_max_len_cm": self.chain.body_max_len_cm,
                "body_max_dia_cm": self.chain.body_max_dia_cm,
                "ujoint_max_len_cm": self.chain.ujoint_max_len_cm,
                "ujoint_max_dia_cm": self.chain.ujoint_max_dia_cm,
                "body_mass_kg": self.chain.body_mass_kg,
                "ujoint_mass_kg": self.chain.ujoint_mass_kg,
                "head_mass_kg": self.chain.head_mass_kg,
                "reported_system_mass_kg": self.chain.reported_system_mass_kg,
                "parts_mass_sum_kg": self.chain.parts_mass_sum_kg,
                "dh_rows": [
                    [r.a, r.alpha, r.d, r.theta_offset, r.joint_kind.value]
                    for r in self.chain.rows_per_module
                ],
            },
            "screw": {
                "helical_pitch_mm": self.screw_geometry.helical_pitch_mm,
                "outer_diameter_mm": self.screw_geometry.outer_diameter_mm,
                "root_diameter_mm": self.screw_geometry.root_diameter_mm,
                "helix_angle_deg": self.screw_geometry.helix_angle_deg,
            },
            "screw_drive": _spec_dict(self.screw_drive),
            "ujoint_drive": _spec_dict(self.ujoint_drive),
            "friction": {
                "coulomb_nm": self.friction.coulomb_nm,
                "viscous_nm_per_rad_s": self.friction.viscous_nm_per_rad_s,
                "stiction_nm": self.friction.stiction_nm,
                "cogging_amplitude_nm": self.friction.cogging_amplitude_nm,
                "v_stop_rad_s": self.friction.v_stop_rad_s,
            },
            "control": dict(self.control.__dict__),
            "power": dict(self.power.__dict__),
            "terrain": {
                "preset": self.terrain_preset,
                **{
                    name: {
                        "axial_slip": t.axial_slip,
                        "lateral_coupling_m_per_rad": t.lateral_coupling_m_per_rad,
                    }
                    for name, t in self.terrains.items()
                },
                "contact_height_tol_cm": self.terrain.contact_height_tol_cm,
            },
            "experiments": dict(self.experiments.__dict__),
            "bus": {"port": self.bus.port, "max_frame_bytes": self.bus.max_frame_bytes},
        }


def _spec_dict(spec: TransmissionSpec) -> dict:
    return {
        "motor_speed_limit_rpm": spec.motor_speed_limit_rpm,
        "stage_ratios": list(spec.stage_ratios),
        "continuous_torque_nm": spec.continuous_torque_nm,
        "peak_torque_nm": spec.peak_torque_nm,
        "efficiency": spec.efficiency,
    }


def _parse_dh_rows(text: str) -> tuple[DhRow, ...]:
    rows = []
    for line in text.strip().splitlines():
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 5:
            raise ValueError(f"bad DH row line: {line!r}")
        rows.append(
            DhRow(
                a=float(parts[0]),
                alpha=float(parts[1]),
                d=float(parts[2]),
                theta_offset=float(parts[3]),
                joint_kind=JointKind(parts[4]),
            )
        )
    return tuple(rows)


def _parse_ratios(text: str) -> tuple[float, ...]:
    return tuple(float(p.strip()) for p in text.split(","))


def _config_from_parser(cp: configparser.ConfigParser) -> SimConfig:
    ch = cp["chain"]
    chain = ChainModel(
        n_bodies=ch.getint("n_bodies"),
        rows_per_module=_parse_dh_rows(ch.get("dh_rows")),
        body_max_len_cm=ch.getfloat("body_max_len_cm"),
        body_max_dia_cm=ch.getfloat("body_max_dia_cm"),
        ujoint_max_len_cm=ch.getfloat("ujoint_max_len_cm"),
        ujoint_max_dia_cm=ch.getfloat("ujoint_max_dia_cm"),
        body_mass_kg=ch.getfloat("body_mass_kg"),
        ujoint_mass_kg=ch.getfloat("ujoint_mass_kg"),
        head_mass_kg=ch.getfloat("head_mass_kg"),
        reported_system_mass_kg=ch.getfloat("reported_system_mass_kg"),
    )

    def spec(section: str) -> TransmissionSpec:
        s = cp[section]
        return TransmissionSpec(
            motor_speed_limit_rpm=s.getfloat("motor_speed_limit_rpm"),
            stage_ratios=_parse_ratios(s.get("stage_ratios")),
            continuous_torque_nm=s.getfloat("continuous_torque_nm"),
            peak_torque_nm=s.getfloat("peak_torque_nm"),
            efficiency=s.getfloat("efficiency"),
        )

    sg = cp["screw"]
    fr = cp["friction"]
    co = cp["control"]
    pw = cp["power"]
    te = cp["terrain"]
    ex = cp["experiments"]
    bu = cp["bus"]
    tol = te.getfloat("contact_height_tol_cm")
    terrains = {
        "granular": TerrainParams(
            "granular",
            axial_slip=te.getfloat("granular_axial_slip"),
            lateral_coupling_m_per_rad=te.getfloat("granular_lateral_coupling_m_per_rad"),
            contact_height_tol_cm=tol,
        ),
        "rigid": TerrainParams(
            "rigid",
            axial_slip=te.getfloat("rigid_axial_slip"),
            lateral_coupling_m_per_rad=te.getfloat("rigid_lateral_coupling_m_per_rad"),
            contact_height_tol_cm=tol,
        ),
    }
    return SimConfig(
        chain=chain,
        screw_geometry=ScrewGeometry(
            helical_pitch_mm=sg.getfloat("helical_pitch_mm"),
            outer_diameter_mm=sg.getfloat("outer_diameter_mm"),
            root_diameter_mm=sg.getfloat("root_diameter_mm"),
            helix_angle_deg=sg.getfloat("helix_angle_deg"),
        ),
        screw_drive=spec("screw_drive"),
        ujoint_drive=spec("ujoint_drive"),
        friction=FrictionParams(
            coulomb_nm=fr.getfloat("coulomb_nm"),
            viscous_nm_per_rad_s=fr.getfloat("viscous_nm_per_rad_s"),
            stiction_nm=fr.getfloat("stiction_nm"),
            cogging_amplitude_nm=fr.getfloat("cogging_amplitude_nm"),
            v_stop_rad_s=fr.getfloat("v_stop_rad_s"),
        ),
        control=ControlConfig(
            control_rate_hz=co.getfloat("control_rate_hz"),
            interface_rate_hz=co.getfloat("interface_rate_hz"),
            kp=co.getfloat("kp"),
            ki=co.getfloat("ki"),
            kd=co.getfloat("kd"),
            output_limit=co.getfloat("output_limit"),
            integral_limit=co.getfloat("integral_limit"),
            derivative_cutoff_hz=co.getfloat("derivative_cutoff_hz"),
            joint_inertia_kg_m2=co.getfloat("joint_inertia_kg_m2"),
            screw_time_constant_s=co.getfloat("screw_time_constant_s"),
            screw_inertia_kg_m2=co.getfloat("screw_inertia_kg_m2"),
            screw_drag_nm_per_rad_s=co.getfloat("screw_drag_nm_per_rad_s"),
            encoder_bits=co.getint("encoder_bits"),
            torque_constant_nm_per_a=co.getfloat("torque_constant_nm_per_a"),
            current_noise_sigma_a=co.getfloat("current_noise_sigma_a"),
            command_staleness_s=co.getfloat("command_staleness_s"),
            ambient_temperature_c=co.getfloat("ambient_temperature_c"),
            stiction_ff_fraction=co.getfloat("stiction_ff_fraction"),
            current_filter_cutoff_hz=co.getfloat("current_filter_cutoff_hz"),
        ),
        power=PowerConfig(
            v_in_min=pw.getfloat("v_in_min"),
            v_in_max=pw.getfloat("v_in_max"),
            rail_voltage=pw.getfloat("rail_voltage"),
            current_limit_at_min_vin_a=pw.getfloat("current_limit_at_min_vin_a"),
            current_limit_at_max_vin_a=pw.getfloat("current_limit_at_max_vin_a"),
            module_power_limit_w=pw.getfloat("module_power_limit_w"),
            system_power_limit_w=pw.getfloat("system_power_limit_w"),
            electronics_overhead_w=pw.getfloat("electronics_overhead_w"),
        ),
        terrains=terrains,
        terrain_preset=te.get("preset"),
        experiments=ExperimentConfig(
            cantilever_mass_kg=ex.getfloat("cantilever_mass_kg"),
            cantilever_length_m=ex.getfloat("cantilever_length_m"),
            transparency_amplitude_deg=ex.getfloat("transparency_amplitude_deg"),
            transparency_period_s=ex.getfloat("transparency_period_s"),
            pendulum_off_angle_deg=ex.getfloat("pendulum_off_angle_deg"),
            pendulum_circle_period_s=ex.getfloat("pendulum_circle_period_s"),
            pendulum_mass_kg=ex.getfloat("pendulum_mass_kg"),
            pendulum_arm_m=ex.getfloat("pendulum_arm_m"),
        ),
        bus=BusConfig(
            port=bu.getint("port"),
            max_frame_bytes=bu.getint("max_frame_bytes"),
        ),
    )


def default_config() -> SimConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(DEFAULT_CONFIG_TEXT)
    return _config_from_parser(cp)


def load_config(path: str | None = None) -> SimConfig:
    """Defaults overlaid with the key-value file at path, when given."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(DEFAULT_CONFIG_TEXT)
    if path is not None:
        with open(path) as f:
            cp.read_file(f)
    return _config_from_parser(cp)


def write_default_config(path: str) -> None:
    with open(path, "w") as f:
        f.write(DEFAULT_CONFIG_TEXT)
