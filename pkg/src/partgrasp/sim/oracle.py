"""Ground-truth-backed stage implementations over a rendered scene."""

from __future__ import annotations

import numpy as np
import cv2

from ..config import PipelineConfig
from ..errors import AmbiguousQueryError, InvalidInputError, NotFoundError
from ..geometry import (
    BinaryMask,
    BoundingBox,
    CameraIntrinsics,
    DepthImage,
    ImageRGB,
    PointCloud,
    backproject,
)
from ..grasp import GraspProposal, GripperModel, estimate_normals, sample_antipodal_grasps
from .render import RenderOutput
from .scenes import SceneSpec


def resolve_object(scene: SceneSpec, object_query: str) -> int:
    """Match a query like "red mug" by token containment: every query token
    must appear among the object's name tokens or attribute tags."""
    tokens = set(object_query.lower().split())
    if not tokens:
        raise NotFoundError("empty object query")
    matches = [i for i, o in enumerate(scene.objects) if tokens <= o.tokens]
    if not matches:
        raise NotFoundError(f"no object matches query {object_query!r}")
    if len(matches) > 1:
        raise AmbiguousQueryError(
            f"query {object_query!r} matches {len(matches)} objects")
    return matches[0]


def ground_truth_bbox(render: RenderOutput, scene: SceneSpec, object_query: str) -> BoundingBox:
    """Tight axis-aligned box over the queried object's instance pixels."""
    idx = resolve_object(scene, object_query)
    vs, us = np.nonzero(render.instance_map == idx)
    if len(vs) == 0:
        raise NotFoundError(f"object {object_query!r} has no visible pixels")
    return BoundingBox(int(us.min()), int(vs.min()), int(us.max()) + 1, int(vs.max()) + 1)


def ground_truth_mask(render: RenderOutput, scene: SceneSpec, object_query: str,
                      part_name: str, crop: BoundingBox) -> BinaryMask:
    """Mask over the (object, part) pixels inside ``crop``, in crop coords."""
    idx = resolve_object(scene, object_query)
    part_names = [n for n, _ in scene.objects[idx].parts]
    if part_name not in part_names:
        raise NotFoundError(f"object {object_query!r} has no part {part_name!r}")
    pi = part_names.index(part_name)
    window = render.part_map[crop.y_min:crop.y_max, crop.x_min:crop.x_max]
    return BinaryMask((window[:, :, 0] == idx) & (window[:, :, 1] == pi))


def part_mask_full(render: RenderOutput, scene: SceneSpec, object_query: str,
                   part_name: str) -> BinaryMask:
    full = BoundingBox(0, 0, render.depth.width, render.depth.height)
    return ground_truth_mask(render, scene, object_query, part_name, full)


class OracleDetector:
    """Answers detections from the rendered instance map."""

    def __init__(self, render: RenderOutput, scene: SceneSpec):
        self.render = render
        self.scene = scene

    def detect(self, image: ImageRGB, object_text: str) -> tuple[BoundingBox, float]:
        return ground_truth_bbox(self.render, self.scene, object_text), 1.0


def locate_crop(render: RenderOutput, crop: ImageRGB) -> tuple[int, int]:
    """Find where a crop was taken from the rendered RGB (exact subimage
    match). Lets the segmenter oracle work from the crop alone, mirroring
    a real segmenter that never sees the crop's provenance."""
    full = render.rgb.pixels
    if crop.height > full.shape[0] or crop.width > full.shape[1]:
        raise NotFoundError("crop larger than the rendered image")
    if crop.height == full.shape[0] and crop.width == full.shape[1]:
        return 0, 0
    res = cv2.matchTemplate(full, crop.pixels, cv2.TM_SQDIFF)
    _min_val, _max_val, min_loc, _max_loc = cv2.minMaxLoc(res)
    return int(min_loc[0]), int(min_loc[1])


class OracleSegmenter:
    """Segments all pixels of any part named ``part_text`` inside the crop.

    Matching by part name across all objects mirrors a vocabulary-limited
    part segmenter: object disambiguation is the detector's job.
    """

    def __init__(self, render: RenderOutput, scene: SceneSpec):
        self.render = render
        self.scene = scene

    def segment(self, image: ImageRGB, part_text: str) -> tuple[BinaryMask, float]:
        x0, y0 = locate_crop(self.render, image)
        window = self.render.part_map[y0:y0 + image.height, x0:x0 + image.width]
        bits = np.zeros((image.height, image.width), dtype=bool)
        part = part_text.strip().lower()
        for oi, obj in enumerate(self.scene.objects):
            for pi, (name, _) in enumerate(obj.parts):
                if name.lower() == part:
                    bits |= (window[:, :, 0] == oi) & (window[:, :, 1] == pi)
        return BinaryMask(bits), 1.0


def subsample_cloud(cloud: PointCloud, max_points: int, seed: int) -> PointCloud:
    if len(cloud) <= max_points:
        return cloud
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(cloud), size=max_points, replace=False))
    normals = cloud.normals[keep] if cloud.normals is not None else None
    return PointCloud(cloud.points[keep], cloud.pixel_indices[keep], normals)


class OracleGraspStage:
    """Deterministic analytic grasp generator: backproject the masked depth,
    estimate normals, sample antipodal contact pairs."""

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()

    def propose(self, depth: DepthImage, intrinsics: CameraIntrinsics,
                mask: BinaryMask) -> list[GraspProposal]:
        cfg = self.config
        cloud = backproject(depth, intrinsics, mask)
        cloud = subsample_cloud(cloud, cfg.max_cloud_points, cfg.rng_seed)
        if len(cloud) < cfg.normal_neighbors + 1:
            return []
        cloud = estimate_normals(cloud, cfg.normal_neighbors)
        gripper = GripperModel(cfg.max_opening, cfg.finger_depth, cfg.friction_half_angle_deg)
        return sample_antipodal_grasps(cloud, gripper, cfg.sample_budget, cfg.rng_seed)
