"""Power-rail model and power-budget auditing.

The buck-boost stage regulates a 24 V motor rail from a 12-60 V input; its
current limit depends on the input voltage (constant-power behavior: more
current available at the low end). Logic rails are derived. Inputs outside
the accepted range put the rail in a fault state and halt the modules.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..actuation import estimate_torque_from_current
from ..config import PowerConfig, SimConfig

RPM_TO_RAD_S = 2.0 * 3.141592653589793 / 60.0


@dataclass(frozen=True)
class RailState:
    v_in: float
    v_rail: float
    current_limit_a: float
    v_logic_5: float
    v_logic_3_3: float
    fault: bool

    @property
    def ok(self) -> bool:
        return not self.fault


def supply(v_in: float, cfg: PowerConfig = PowerConfig()) -> RailState:
    """Rail state for a given input voltage."""
    if not cfg.v_in_min <= v_in <= cfg.v_in_max:
        return RailState(v_in, 0.0, 0.0, 0.0, 0.0, fault=True)
    frac = (v_in - cfg.v_in_min) / (cfg.v_in_max - cfg.v_in_min)
    limit = cfg.current_limit_at_min_vin_a + frac * (
        cfg.current_limit_at_max_vin_a - cfg.current_limit_at_min_vin_a
    )
    return RailState(
        v_in=v_in,
        v_rail=cfg.rail_voltage,
        current_limit_a=limit,
        v_logic_5=5.0,
        v_logic_3_3=3.3,
        fault=False,
    )


def power_budget_check(series: list[dict], snapshot: dict) -> dict:
    """Flag samples whose mechanical plus electronics power exceeds the
    per-module or system limits. Limits are inclusive: at the boundary is a
    pass."""
    power_cfg = snapshot["power"]
    control_cfg = snapshot["control"]
    k_t = control_cfg["torque_constant_nm_per_a"]
    ujoint = snapshot["ujoint_drive"]
    screw = snapshot["screw_drive"]
    ujoint_ratio = 1.0
    for r in ujoint["stage_ratios"]:
        ujoint_ratio *= r
    screw_ratio = 1.0
    for r in screw["stage_ratios"]:
        screw_ratio *= r
    overhead = power_cfg["electronics_overhead_w"]
    module_limit = power_cfg["module_power_limit_w"]
    system_limit = power_cfg["system_power_limit_w"]

    module_violations: list[dict] = []
    system_violations: list[dict] = []
    max_module_w = 0.0
    max_system_w = 0.0

    for i, sample in enumerate(series):
        prev = series[i - 1] if i > 0 else None
        total_w = 0.0
        for m, mod in enumerate(sample["modules"]):
            tau_p = mod["joint_currents_a"][0] * k_t * ujoint_ratio * ujoint["efficiency"]
            tau_y = mod["joint_currents_a"][1] * k_t * ujoint_ratio * ujoint["efficiency"]
            tau_s = mod["screw_current_a"] * k_t * screw_ratio * screw["efficiency"]
            omega_s = mod["screw_rpm"] * RPM_TO_RAD_S
            if prev is not None:
                dt = sample["t"] - prev["t"]
                pm = prev["modules"][m]
                w_p = (mod["q_measured"][0] - pm["q_measured"][0]) / dt if dt > 0 else 0.0
                w_y = (mod["q_measured"][1] - pm["q_measured"][1]) / dt if dt > 0 else 0.0
            else:
                w_p = w_y = 0.0
            mech = (
                abs(tau_p * w_p) / ujoint["efficiency"]
                + abs(tau_y * w_y) / ujoint["efficiency"]
                + abs(tau_s * omega_s) / screw["efficiency"]
            )
            module_w = mech + overhead
            max_module_w = max(max_module_w, module_w)
            if module_w > module_limit:
                module_violations.append(
                    {"t": sample["t"], "module_id": mod["module_id"], "watts": module_w}
                )
            total_w += module_w
        max_system_w = max(max_system_w, total_w)
        if total_w > system_limit:
            system_violations.append({"t": sample["t"], "watts": total_w})

    return {
        "ok": not module_violations and not system_violations,
        "max_module_w": max_module_w,
        "max_system_w": max_system_w,
        "module_violations": module_violations,
        "system_violations": system_violations,
        "module_limit_w": module_limit,
        "system_limit_w": system_limit,
    }
