"""Experiment persistence: long-format CSV series and JSON manifests.

Floats are serialized with repr (shortest round-trip form), so a re-run
with the same seed produces byte-identical series files — the property
the determinism checks compare.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = "experiment,variant,trial,layer,metric,value"


@dataclass
class ExperimentReport:
    """Everything one experiment run produced, before persistence."""

    name: str
    config: dict
    master_seed: int
    version: str
    rows: list = field(default_factory=list)   # (variant, trial, layer, metric, value)
    aggregates: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    duration: float = 0.0


def aggregate_series(values: np.ndarray) -> dict:
    """Per-layer mean/median/q05/q95 across the trial axis of (trials, layers)."""
    return {
        "mean": values.mean(axis=0),
        "median": np.median(values, axis=0),
        "q05": np.quantile(values, 0.05, axis=0),
        "q95": np.quantile(values, 0.95, axis=0),
    }


def _fmt(value) -> str:
    return repr(float(value))


def write_series_csv(path: str, name: str, rows) -> None:
    lines = [CSV_HEADER]
    for variant, trial, layer, metric, value in rows:
        lines.append(f"{name},{variant},{trial},{layer},{metric},{_fmt(value)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_manifest(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def initial_manifest(out_dir: str, report: ExperimentReport) -> str:
    """Written before heavy compute so interrupted runs stay diagnosable."""
    path = os.path.join(out_dir, "manifest.json")
    write_manifest(path, {
        "experiment": report.name,
        "config": report.config,
        "master_seed": report.master_seed,
        "version": report.version,
        "status": "running",
    })
    return path


def final_manifest(out_dir: str, report: ExperimentReport) -> str:
    path = os.path.join(out_dir, "manifest.json")
    write_manifest(path, {
        "experiment": report.name,
        "config": report.config,
        "master_seed": report.master_seed,
        "version": report.version,
        "status": "complete",
        "derived": report.derived,
        "duration_seconds": report.duration,
    })
    return path
