"""Per-pixel raycast renderer producing RGB, depth and ground-truth
instance/part maps for a SceneSpec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import DepthImage, ImageRGB, compose_pose
from .scenes import BACKGROUND_COLOR, SceneSpec


@dataclass(frozen=True)
class RenderOutput:
    rgb: ImageRGB
    depth: DepthImage
    instance_map: np.ndarray  # (H, W) int32, -1 = background
    part_map: np.ndarray      # (H, W, 2) int32 (object idx, part idx), -1 = background

    def __post_init__(self):
        self.instance_map.setflags(write=False)
        self.part_map.setflags(write=False)


def raycast_render(scene: SceneSpec) -> RenderOutput:
    """Cast one pinhole ray per pixel, intersect every primitive analytically
    and keep the nearest hit. Depth records the camera-frame z of the hit."""
    w, h = scene.width, scene.height
    intr = scene.intrinsics
    us, vs = np.meshgrid(np.arange(w), np.arange(h))
    raw = np.stack([(us.ravel() - intr.cx) / intr.fx,
                    (vs.ravel() - intr.cy) / intr.fy,
                    np.ones(w * h)], axis=1)
    inv_norm = 1.0 / np.linalg.norm(raw, axis=1)
    dirs_cam = raw * inv_norm[:, None]
    cam_rot = scene.camera_pose.rotation_matrix()
    origin = scene.camera_pose.translation
    dirs_world = dirs_cam @ cam_rot.T

    n_rays = w * h
    best_t = np.full(n_rays, np.inf)
    best_obj = np.full(n_rays, -1, dtype=np.int32)
    best_part = np.full(n_rays, -1, dtype=np.int32)

    for oi, obj in enumerate(scene.objects):
        for pi, (_, prim) in enumerate(obj.parts):
            world_pose = compose_pose(obj.object_pose, prim.local_pose)
            # bounding-sphere prefilter in world space
            center = world_pose.translation
            radius = prim.bounding_radius() + 1e-6
            oc = origin - center
            b = dirs_world @ oc
            c = float(oc @ oc) - radius * radius
            cand = np.nonzero(b * b - c >= 0)[0]
            if len(cand) == 0:
                continue
            inv = world_pose.inverse()
            rot_l = inv.rotation_matrix()
            o_local = np.broadcast_to(rot_l @ origin + inv.translation, (len(cand), 3))
            d_local = dirs_world[cand] @ rot_l.T
            t = prim.intersect(np.ascontiguousarray(o_local), d_local)
            closer = t < best_t[cand]
            sel = cand[closer]
            best_t[sel] = t[closer]
            best_obj[sel] = oi
            best_part[sel] = pi

    hit = np.isfinite(best_t)
    # camera-frame z of the hit point: ray length times the z component of
    # the normalized camera-frame direction
    depth_flat = np.where(hit, best_t * dirs_cam[:, 2], 0.0)
    rgb_flat = np.full((n_rays, 3), BACKGROUND_COLOR, dtype=np.uint8)
    for oi, obj in enumerate(scene.objects):
        rgb_flat[best_obj == oi] = obj.color()

    part_map = np.stack([best_obj, best_part], axis=1).reshape(h, w, 2)
    return RenderOutput(
        rgb=ImageRGB(rgb_flat.reshape(h, w, 3)),
        depth=DepthImage(depth_flat.reshape(h, w)),
        instance_map=best_obj.reshape(h, w).copy(),
        part_map=part_map,
    )
