"""Simulated trial campaigns: generate scenes, run the pipeline with oracle
or faulted backends, classify outcomes, and aggregate a report."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .errors import InvalidInputError
from .pipeline import GraspRequest, PipelineError, PromptPair, run_pipeline
from .evaluation.trials import TrialRecord, TrialReport, aggregate_trials
from .sim.classify import OutcomeTaxonomy, classify_sim_trial, contacts_to_world
from .sim.faults import Fault, fault_wrap
from .geometry import project
from .sim.oracle import (
    OracleDetector, OracleGraspStage, OracleSegmenter, part_mask_full,
)
from .sim.render import raycast_render
from .sim.scenes import GRASPABLE_PARTS, random_scene

_FAULT_RE = re.compile(r"^(?P<kind>[a-z_]+)(?:\((?P<args>[^)]*)\))?(?:[@:](?P<rate>[0-9.]+))?$")


@dataclass(frozen=True)
class FaultSpec:
    fault: Fault
    rate: float = 1.0


def parse_fault_specs(text: str) -> list[FaultSpec]:
    """Parse e.g. "wrong_object:0.1;mask_shift(8,0):1.0;depth_bias(0.025)"."""
    specs = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        m = _FAULT_RE.match(chunk)
        if not m:
            raise InvalidInputError(f"cannot parse fault spec {chunk!r}")
        kind = m.group("kind")
        args = [a.strip() for a in (m.group("args") or "").split(",") if a.strip()]
        rate = float(m.group("rate") or 1.0)
        if kind in ("mask_dilate", "mask_erode"):
            fault = Fault(kind, radius=int(args[0]) if args else 1)
        elif kind == "mask_shift":
            fault = Fault(kind, dx=int(args[0]), dy=int(args[1]) if len(args) > 1 else 0)
        elif kind == "depth_bias":
            fault = Fault(kind, bias=float(args[0]) if args else 0.03)
        else:
            fault = Fault(kind)
        specs.append(FaultSpec(fault, rate))
    return specs


@dataclass
class SimTrialResult:
    target_object: str
    target_part: str
    outcome: OutcomeTaxonomy | None
    error_stage: str | None = None
    faulted: bool = False
    # mask-filter invariant: does the selected grasp midpoint project onto
    # (or within the configured pixel tolerance of) the true part mask?
    midpoint_in_gt_mask: bool | None = None


@dataclass
class CampaignReport:
    trials: list[SimTrialResult]
    trial_report: TrialReport

    @property
    def error_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for t in self.trials:
            if t.error_stage:
                counts[t.error_stage] = counts.get(t.error_stage, 0) + 1
        return counts


def campaign_config(**overrides) -> PipelineConfig:
    """Config tuned for simulated trials: exhaustive pair enumeration over a
    subsampled cloud and a wider friction cone, compensating for the normal
    smoothing that k-NN estimation suffers on thin rendered parts."""
    base = dict(sample_budget=1_000_000, max_cloud_points=800,
                normal_neighbors=6, friction_half_angle_deg=35.0)
    base.update(overrides)
    return PipelineConfig(**base)


def _midpoint_in_gt_mask(scene, render, result, target_object: str,
                         target_part: str, pixel_tolerance: int) -> bool:
    """Check the mask-filter invariant against ground truth: the selected
    grasp midpoint projects onto the true part mask (within the same pixel
    tolerance the filter applies)."""
    mask = part_mask_full(render, scene, target_object, target_part)
    u, v = project(result.selected.midpoint, scene.intrinsics)
    ui, vi = int(round(u)), int(round(v))
    x0, x1 = max(0, ui - pixel_tolerance), min(mask.width, ui + pixel_tolerance + 1)
    y0, y1 = max(0, vi - pixel_tolerance), min(mask.height, vi + pixel_tolerance + 1)
    if x0 >= x1 or y0 >= y1:
        return False
    return bool(mask.bits[y0:y1, x0:x1].any())


def run_sim_trial(scene, target_object: str, target_part: str,
                  config: PipelineConfig | None = None,
                  faults: list[Fault] | None = None,
                  classify_kwargs: dict | None = None,
                  render=None) -> SimTrialResult:
    """Render, run the (optionally faulted) pipeline and classify the plan."""
    config = config or PipelineConfig()
    if render is None:
        render = raycast_render(scene)
    detector = OracleDetector(render, scene)
    segmenter = OracleSegmenter(render, scene)
    grasper = OracleGraspStage(config)
    for fault in faults or []:
        if fault.kind in ("wrong_object",):
            detector = fault_wrap(detector, fault)
        elif fault.kind in ("mask_dilate", "mask_erode", "mask_shift"):
            segmenter = fault_wrap(segmenter, fault)
        elif fault.kind == "depth_bias":
            grasper = fault_wrap(grasper, fault)
        elif fault.kind == "drop_output":
            detector = fault_wrap(detector, fault)

    request = GraspRequest(render.rgb, render.depth, scene.intrinsics,
                           PromptPair(target_object, target_part), scene.camera_pose)
    try:
        result = run_pipeline(request, detector, segmenter, grasper, config)
    except PipelineError as exc:
        return SimTrialResult(target_object, target_part, None,
                              exc.attribution.stage.value, bool(faults))
    contacts = contacts_to_world(scene.camera_pose,
                                 result.selected.contact_a, result.selected.contact_b)
    outcome = classify_sim_trial(result.plan, scene, (target_object, target_part),
                                 contacts, **(classify_kwargs or {}))
    return SimTrialResult(target_object, target_part, outcome, None, bool(faults),
                          _midpoint_in_gt_mask(scene, render, result,
                                               target_object, target_part,
                                               config.pixel_tolerance))


def pick_target(scene, rng: np.random.Generator) -> tuple[str, str]:
    obj = scene.objects[rng.integers(len(scene.objects))]
    return obj.display_name, GRASPABLE_PARTS[obj.name]


def pick_visible_target(scene, render, rng: np.random.Generator,
                        min_part_pixels: int,
                        require_all_visible: bool = False,
                        graspable_parts: dict[str, str] | None = None) -> tuple[str, str] | None:
    """Pick a target whose graspable part is unoccluded (enough visible
    pixels); None if no object qualifies. With require_all_visible, every
    object's graspable part must qualify (fault campaigns redirect the
    pipeline to neighbouring objects, so those must be graspable too)."""
    parts_by_template = graspable_parts or GRASPABLE_PARTS
    candidates = []
    for oi, obj in enumerate(scene.objects):
        part = parts_by_template[obj.name]
        pi = [n for n, _ in obj.parts].index(part)
        visible = int(((render.part_map[:, :, 0] == oi)
                       & (render.part_map[:, :, 1] == pi)).sum())
        if visible >= min_part_pixels:
            candidates.append((obj.display_name, part))
    if not candidates or (require_all_visible and len(candidates) < len(scene.objects)):
        return None
    return candidates[rng.integers(len(candidates))]


def run_campaign(n_scenes: int, n_objects: int, seed: int,
                 fault_specs: list[FaultSpec] | None = None,
                 config: PipelineConfig | None = None,
                 width: int = 640, height: int = 480,
                 template_names: list[str] | None = None,
                 classify_kwargs: dict | None = None,
                 min_part_pixels: int = 150,
                 require_all_visible: bool = False,
                 graspable_parts: dict[str, str] | None = None,
                 yaw_choices: tuple[float, ...] = tuple(range(0, 360, 45))) -> CampaignReport:
    rng = np.random.default_rng(seed)
    config = config or campaign_config()
    scenario = "individual" if n_objects == 1 else "table_clearing"
    trials, records = [], []
    for i in range(n_scenes):
        # regenerate until the chosen target part is unoccluded
        for _ in range(50):
            try:
                scene = random_scene(int(rng.integers(2 ** 31)), n_objects, width, height,
                                     template_names, yaw_choices)
            except InvalidInputError:
                continue  # crowded placement draw, try the next seed
            render = raycast_render(scene)
            target = pick_visible_target(scene, render, rng, min_part_pixels,
                                         require_all_visible, graspable_parts)
            if target is not None:
                break
        else:
            raise InvalidInputError("could not generate a scene with a visible target part")
        target_object, target_part = target
        faults = [s.fault for s in (fault_specs or []) if rng.random() < s.rate]
        trial = run_sim_trial(scene, target_object, target_part, config, faults,
                              classify_kwargs, render=render)
        trials.append(trial)
        if trial.outcome is not None:
            records.append(TrialRecord(
                target_object, target_part, scenario, trial.outcome,
                orientation_index=None if scenario == "table_clearing" else 0))
    return CampaignReport(trials, aggregate_trials(records))
