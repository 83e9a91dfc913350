"""Three-stage orchestrator: detect -> crop -> segment -> embed -> grasp
-> filter -> select -> plan, with per-stage timing and failure attribution."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Protocol

from .config import PipelineConfig
from .errors import (
    InvalidInputError,
    NoGraspFoundError,
    NotFoundError,
    PartGraspError,
    TransportError,
)
from .geometry import (
    BinaryMask,
    BoundingBox,
    CameraIntrinsics,
    DepthImage,
    ImageRGB,
    Pose6DOF,
    crop_image,
    embed_mask_full,
)
from .grasp import (
    GraspPlan,
    GraspProposal,
    GripperModel,
    build_grasp_plan,
    mask_filter_grasps,
    select_top_grasp,
)


class Stage(enum.Enum):
    Detector = "Detector"
    Segmenter = "Segmenter"
    GraspGenerator = "GraspGenerator"
    Transport = "Transport"


@dataclass(frozen=True)
class FailureAttribution:
    stage: Stage
    detail: str


class PipelineError(PartGraspError):
    """Any pipeline failure; carries exactly one stage attribution."""

    def __init__(self, attribution: FailureAttribution):
        super().__init__(f"stage={attribution.stage.value}: {attribution.detail}")
        self.attribution = attribution


@dataclass(frozen=True)
class PromptPair:
    object_text: str
    part_text: str

    def __post_init__(self):
        if not self.object_text.strip() or not self.part_text.strip():
            raise InvalidInputError("both prompt components must be non-empty")


@dataclass(frozen=True)
class GraspRequest:
    rgb: ImageRGB
    depth: DepthImage
    intrinsics: CameraIntrinsics
    prompt: PromptPair
    camera_to_world: Pose6DOF

    def __post_init__(self):
        if (self.rgb.width, self.rgb.height) != (self.depth.width, self.depth.height):
            raise InvalidInputError("rgb and depth dimensions must match")


@dataclass(frozen=True)
class StageTimings:
    detect_ms: float
    segment_ms: float
    grasp_ms: float
    overhead_ms: float

    @property
    def total_ms(self) -> float:
        return self.detect_ms + self.segment_ms + self.grasp_ms + self.overhead_ms


@dataclass(frozen=True)
class PipelineResult:
    plan: GraspPlan
    bbox: BoundingBox
    part_mask_full: BinaryMask
    selected: GraspProposal
    timings: StageTimings
    stage_artifacts: dict = field(default_factory=dict)


class DetectorStage(Protocol):
    def detect(self, image: ImageRGB, object_text: str) -> tuple[BoundingBox, float]: ...


class SegmenterStage(Protocol):
    def segment(self, image: ImageRGB, part_text: str) -> tuple[BinaryMask, float]: ...


class GraspStage(Protocol):
    def propose(self, depth: DepthImage, intrinsics: CameraIntrinsics,
                mask: BinaryMask) -> list[GraspProposal]: ...


def _attributed(stage: Stage, exc: Exception) -> PipelineError:
    if isinstance(exc, TransportError):
        return PipelineError(FailureAttribution(Stage.Transport, str(exc)))
    return PipelineError(FailureAttribution(stage, str(exc)))


def run_pipeline(request: GraspRequest, detector: DetectorStage,
                 segmenter: SegmenterStage, grasper: GraspStage,
                 config: PipelineConfig | None = None,
                 keep_artifacts: bool = False) -> PipelineResult:
    """Run one request through the full stage chain.

    Raises PipelineError with a single FailureAttribution on any stage
    failure or empty stage output.
    """
    config = config or PipelineConfig()
    t_start = time.perf_counter()

    t0 = time.perf_counter()
    try:
        bbox, confidence = detector.detect(request.rgb, request.prompt.object_text)
    except PartGraspError as exc:
        raise _attributed(Stage.Detector, exc) from exc
    detect_ms = (time.perf_counter() - t0) * 1000.0
    if confidence < config.detector_threshold:
        raise PipelineError(FailureAttribution(
            Stage.Detector, f"confidence {confidence:.3f} below threshold {config.detector_threshold}"))

    try:
        crop = crop_image(request.rgb, bbox)
    except PartGraspError as exc:
        raise _attributed(Stage.Detector, exc) from exc

    t0 = time.perf_counter()
    try:
        crop_mask, _seg_conf = segmenter.segment(crop, request.prompt.part_text)
    except PartGraspError as exc:
        raise _attributed(Stage.Segmenter, exc) from exc
    segment_ms = (time.perf_counter() - t0) * 1000.0
    if crop_mask.count() == 0:
        raise PipelineError(FailureAttribution(Stage.Segmenter, "empty part mask"))

    full_mask = embed_mask_full(crop_mask, bbox, (request.rgb.width, request.rgb.height))

    t0 = time.perf_counter()
    try:
        proposals = grasper.propose(request.depth, request.intrinsics, full_mask)
    except PartGraspError as exc:
        raise _attributed(Stage.GraspGenerator, exc) from exc
    grasp_ms = (time.perf_counter() - t0) * 1000.0
    if not proposals:
        raise PipelineError(FailureAttribution(Stage.GraspGenerator, "no grasp proposals"))

    filtered = mask_filter_grasps(proposals, full_mask, request.depth, request.intrinsics,
                                  config.pixel_tolerance, config.depth_tolerance)
    try:
        selected = select_top_grasp(filtered)
    except NoGraspFoundError as exc:
        # proposals existed but none landed on the part
        raise PipelineError(FailureAttribution(Stage.GraspGenerator, str(exc))) from exc

    plan = build_grasp_plan(selected, request.camera_to_world)

    total_ms = (time.perf_counter() - t_start) * 1000.0
    overhead_ms = max(0.0, total_ms - detect_ms - segment_ms - grasp_ms)
    timings = StageTimings(detect_ms, segment_ms, grasp_ms, overhead_ms)
    artifacts = {"crop": crop, "crop_mask": crop_mask} if keep_artifacts else {}
    return PipelineResult(plan, bbox, full_mask, selected, timings, artifacts)
