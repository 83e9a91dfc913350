"""Flow-diagram export of trial outcomes: root -> responsible-module group
-> outcome leaf, with trial counts as link weights."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import InvalidInputError
from ..sim.classify import OutcomeTaxonomy
from .trials import OUTCOME_ORDER, TrialReport

# which module each failure outcome is attributed to
MODULE_GROUPS = {
    OutcomeTaxonomy.Success: "Success",
    OutcomeTaxonomy.WrongObject: "Detector",
    OutcomeTaxonomy.WrongPart: "Segmenter",
    OutcomeTaxonomy.GraspDepthIssue: "GraspGenerator",
    OutcomeTaxonomy.GraspNotOnObject: "GraspGenerator",
    OutcomeTaxonomy.GrippersSlipped: "Execution",
    OutcomeTaxonomy.JointLimitHit: "Execution",
    OutcomeTaxonomy.CollidedWithTable: "Execution",
}


def export_sankey(report: TrialReport, scenario: str) -> dict:
    """Graph document {nodes, links} with count-conserving link weights."""
    if scenario not in report.scenarios:
        raise InvalidInputError(f"scenario {scenario!r} not in report")
    stats = report.scenarios[scenario]
    if stats.total == 0:
        raise InvalidInputError("cannot export an empty report")

    nodes = ["All Trials"]
    links = []
    group_totals: dict[str, int] = {}
    for outcome in OUTCOME_ORDER:
        count = stats.counts.get(outcome, 0)
        if count:
            group_totals[MODULE_GROUPS[outcome]] = \
                group_totals.get(MODULE_GROUPS[outcome], 0) + count
    for group, total in group_totals.items():
        nodes.append(group)
        links.append({"source": "All Trials", "target": group, "value": total})
    for outcome in OUTCOME_ORDER:
        count = stats.counts.get(outcome, 0)
        if not count:
            continue
        group = MODULE_GROUPS[outcome]
        if group == outcome.value:
            continue  # group node doubles as the leaf (Success)
        nodes.append(outcome.value)
        links.append({"source": group, "target": outcome.value, "value": count})
    return {"nodes": [{"id": n} for n in nodes], "links": links}


def write_sankey(report: TrialReport, scenario: str, path: str | Path) -> None:
    Path(path).write_text(json.dumps(export_sankey(report, scenario), indent=2) + "\n")
