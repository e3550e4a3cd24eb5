"""Experiment record persistence.

states.jsonl holds one ModuleState per line, each augmented with the sample
time and world pose so the series is fully reconstructible. metrics.json is
the footer with the config snapshot, the metrics, and their sha256. CSV
export is optional and flattened for spreadsheet use.
"""

from __future__ import annotations

import csv
import json
import os

from .experiments import ExperimentRecord

STATES_FILE = "states.jsonl"
METRICS_FILE = "metrics.json"
CSV_FILE = "states.csv"


def write_record(record: ExperimentRecord, out_dir: str, csv_export: bool = False) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, STATES_FILE), "w") as f:
        for sample in record.series:
            extra = {
                k: sample[k]
                for k in ("t", "pose", "twist", "v_in", "warmup_s")
                if k in sample
            }
            for module_state in sample["modules"]:
                line = dict(module_state)
                line.update(extra)
                f.write(json.dumps(line, separators=(",", ":")) + "\n")
    footer = {
        "experiment": record.name,
        "config": record.config_snapshot,
        "metrics": record.metrics,
        "metrics_sha256": record.metrics_sha256(),
    }
    with open(os.path.join(out_dir, METRICS_FILE), "w") as f:
        json.dump(footer, f, indent=2, sort_keys=True)
        f.write("\n")
    if csv_export:
        _write_csv(record, os.path.join(out_dir, CSV_FILE))


def read_record(out_dir: str) -> ExperimentRecord:
    """Rebuild a record from its log directory."""
    with open(os.path.join(out_dir, METRICS_FILE)) as f:
        footer = json.load(f)
    samples: dict[tuple, dict] = {}
    with open(os.path.join(out_dir, STATES_FILE)) as f:
        for line in f:
            row = json.loads(line)
            key = (row["t"], row.get("v_in"))
            sample = samples.get(key)
            if sample is None:
                sample = {
                    "t": row["t"],
                    "pose": row.get("pose", {"x": 0.0, "y": 0.0, "theta": 0.0}),
                    "twist": row.get("twist", {"vx": 0.0, "vy": 0.0, "omega_z": 0.0}),
                    "modules": [],
                }
                if "v_in" in row:
                    sample["v_in"] = row["v_in"]
                if "warmup_s" in row:
                    sample["warmup_s"] = row["warmup_s"]
                samples[key] = sample
            module_state = {
                k: v
                for k, v in row.items()
                if k not in ("t", "pose", "twist", "v_in", "warmup_s")
            }
            sample["modules"].append(module_state)
    series = [samples[k] for k in sorted(samples, key=lambda k: (k[1] or 0.0, k[0]))]
    return ExperimentRecord(
        name=footer["experiment"],
        config_snapshot=footer["config"],
        series=series,
        metrics=footer["metrics"],
    )


def _write_csv(record: ExperimentRecord, path: str) -> None:
    fields = [
        "t", "module_id", "q_p_meas", "q_y_meas", "q_p_sp", "q_y_sp",
        "screw_rpm", "screw_rpm_sp", "i_pitch_a", "i_yaw_a", "i_screw_a",
        "pose_x", "pose_y", "pose_theta", "v_in",
    ]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(fields)
        for sample in record.series:
            pose = sample.get("pose", {})
            for m in sample["modules"]:
                w.writerow([
                    sample["t"], m["module_id"],
                    m["q_measured"][0], m["q_measured"][1],
                    m["q_setpoint"][0], m["q_setpoint"][1],
                    m["screw_rpm"], m["screw_rpm_setpoint"],
                    m["joint_currents_a"][0], m["joint_currents_a"][1],
                    m["screw_current_a"],
                    pose.get("x", ""), pose.get("y", ""), pose.get("theta", ""),
                    sample.get("v_in", ""),
                ])
