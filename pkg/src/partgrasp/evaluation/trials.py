"""Physical/simulated trial bookkeeping: CSV log ingestion, per-scenario
percentage tables over the outcome taxonomy, and derived rates."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ManifestError
from ..sim.classify import OutcomeTaxonomy

SCENARIOS = ("individual", "table_clearing")

OUTCOME_ORDER = [
    OutcomeTaxonomy.Success,
    OutcomeTaxonomy.GraspDepthIssue,
    OutcomeTaxonomy.GrippersSlipped,
    OutcomeTaxonomy.WrongPart,
    OutcomeTaxonomy.WrongObject,
    OutcomeTaxonomy.GraspNotOnObject,
    OutcomeTaxonomy.JointLimitHit,
    OutcomeTaxonomy.CollidedWithTable,
]


@dataclass(frozen=True)
class TrialRecord:
    object_name: str
    part: str
    scenario: str  # individual | table_clearing
    outcome: OutcomeTaxonomy
    orientation_index: int | None = None
    notes: str = ""

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ManifestError(f"unknown scenario {self.scenario!r}")
        if self.scenario == "table_clearing" and self.orientation_index is not None:
            raise ManifestError("orientation_index is only valid for individual trials")


@dataclass
class ScenarioStats:
    counts: dict[OutcomeTaxonomy, int]
    total: int

    def percentage(self, outcome: OutcomeTaxonomy) -> float:
        return round(100.0 * self.counts.get(outcome, 0) / self.total, 2)

    @property
    def correct_part_rate(self) -> float:
        wrong = (self.counts.get(OutcomeTaxonomy.WrongPart, 0)
                 + self.counts.get(OutcomeTaxonomy.WrongObject, 0))
        return round(100.0 * (self.total - wrong) / self.total, 2)

    @property
    def correct_object_rate(self) -> float:
        wrong = self.counts.get(OutcomeTaxonomy.WrongObject, 0)
        return round(100.0 * (self.total - wrong) / self.total, 2)


@dataclass
class TrialReport:
    scenarios: dict[str, ScenarioStats]

    @property
    def total(self) -> int:
        return sum(s.total for s in self.scenarios.values())

    def to_dict(self) -> dict:
        out = {}
        for name, stats in self.scenarios.items():
            out[name] = {
                "total": stats.total,
                "counts": {o.value: stats.counts.get(o, 0) for o in OUTCOME_ORDER},
                "percentages": {o.value: stats.percentage(o) for o in OUTCOME_ORDER},
                "correct_part_rate": stats.correct_part_rate,
                "correct_object_rate": stats.correct_object_rate,
            }
        return out

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def write_csv(self, path: str | Path) -> None:
        names = [n for n in SCENARIOS if n in self.scenarios]
        lines = ["outcome," + ",".join(names)]
        for outcome in OUTCOME_ORDER:
            cells = [f"{self.scenarios[n].percentage(outcome):.2f}" for n in names]
            lines.append(outcome.value + "," + ",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n")


def ingest_trial_log(path: str | Path) -> list[TrialRecord]:
    """Read a trial CSV with columns scenario, object, part,
    orientation_index, outcome, notes."""
    records = []
    outcome_by_name = {o.value: o for o in OutcomeTaxonomy}
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"scenario", "object", "part", "orientation_index", "outcome"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise ManifestError(f"{path}: missing columns {required}")
            for lineno, row in enumerate(reader, start=2):
                token = row["outcome"].strip()
                if token not in outcome_by_name:
                    raise ManifestError(f"{path}:{lineno}: unknown outcome token {token!r}")
                orientation = row["orientation_index"].strip()
                records.append(TrialRecord(
                    object_name=row["object"].strip(),
                    part=row["part"].strip(),
                    scenario=row["scenario"].strip(),
                    outcome=outcome_by_name[token],
                    orientation_index=int(orientation) if orientation else None,
                    notes=(row.get("notes") or "").strip(),
                ))
    except OSError as exc:
        raise ManifestError(f"cannot read trial log {path}: {exc}") from exc
    return records


def aggregate_trials(records: list[TrialRecord]) -> TrialReport:
    scenarios: dict[str, ScenarioStats] = {}
    for record in records:
        stats = scenarios.setdefault(record.scenario, ScenarioStats({}, 0))
        stats.counts[record.outcome] = stats.counts.get(record.outcome, 0) + 1
        stats.total += 1
    return TrialReport(scenarios)
