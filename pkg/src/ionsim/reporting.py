"""Report assembly and serialization: JSON report, shot CSV, and the
stable key/column contracts both share.

Shot CSV columns (UTF-8, LF, '.' decimal separator)::

    shot_index, setting_index, stream_id, phi1_rad, phi2_rad,
    true_outcome, photon_count, classified_bright

photon_count is empty under the flip readout model; phi fields are empty
for settings without an analysis pulse (the plain population measurement).
shot_index counts within a setting, matching the stream derivation
hash(seed, setting_index, shot_index).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .readout import ShotRecord

CSV_COLUMNS = (
    "shot_index",
    "setting_index",
    "stream_id",
    "phi1_rad",
    "phi2_rad",
    "true_outcome",
    "photon_count",
    "classified_bright",
)


@dataclass
class SettingShots:
    """All shots of one (setting_index) block, column-wise."""

    setting_index: int
    phi1: float | None
    phi2: float | None
    stream_ids: np.ndarray
    true_outcomes: np.ndarray
    photon_counts: np.ndarray | None
    classified_bright: np.ndarray

    def class_counts(self, n_ions: int) -> np.ndarray:
        counts = np.bincount(self.classified_bright, minlength=n_ions + 1)
        if counts.sum() != len(self.classified_bright):
            raise AssertionError("shot accounting lost events")
        return counts

    def records(self) -> Iterator[ShotRecord]:
        settings = tuple(p for p in (self.phi1, self.phi2) if p is not None)
        for i in range(len(self.true_outcomes)):
            yield ShotRecord(
                shot_index=i,
                setting_index=self.setting_index,
                stream_id=int(self.stream_ids[i]),
                settings=settings,
                true_outcome=int(self.true_outcomes[i]),
                photon_count=None if self.photon_counts is None else int(self.photon_counts[i]),
                classified_bright=int(self.classified_bright[i]),
            )


@dataclass
class ExperimentReport:
    """Aggregated estimates with statistical errors and raw counts."""

    experiment: str
    seed: int
    config_digest: str
    schema_version: str
    estimates: dict[str, float] = field(default_factory=dict)
    errors: dict[str, float] = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    runtime_ms: float = 0.0

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "experiment": self.experiment,
            "estimates": self.estimates,
            "errors": self.errors,
            "counts": self.counts,
            "runtime_ms": self.runtime_ms,
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)


def _fmt(value: float) -> str:
    return repr(float(value))


def write_report_json(report: ExperimentReport, path: Path) -> None:
    path.write_text(report.to_json() + "\n", encoding="utf-8", newline="\n")


def write_shot_csv(tables: list[SettingShots], path: Path) -> None:
    """One row per shot; every sampled event appears, none are discarded."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for table in tables:
            n = len(table.true_outcomes)
            phi1 = "" if table.phi1 is None else _fmt(table.phi1)
            phi2 = "" if table.phi2 is None else _fmt(table.phi2)
            photons = table.photon_counts
            ids = table.stream_ids
            outs = table.true_outcomes
            classes = table.classified_bright
            rows = (
                (
                    i,
                    table.setting_index,
                    int(ids[i]),
                    phi1,
                    phi2,
                    int(outs[i]),
                    "" if photons is None else int(photons[i]),
                    int(classes[i]),
                )
                for i in range(n)
            )
            writer.writerows(rows)
