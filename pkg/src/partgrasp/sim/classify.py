"""Geometric trial classification: map an executed-in-simulation grasp plan
onto the outcome taxonomy using analytic surface queries."""

from __future__ import annotations

import enum

import numpy as np

from ..geometry import Pose6DOF, compose_pose
from ..grasp import GraspPlan
from .oracle import resolve_object
from .scenes import SceneSpec


class OutcomeTaxonomy(enum.Enum):
    Success = "Success"
    GraspDepthIssue = "GraspDepthIssue"
    GrippersSlipped = "GrippersSlipped"
    WrongPart = "WrongPart"
    WrongObject = "WrongObject"
    GraspNotOnObject = "GraspNotOnObject"
    JointLimitHit = "JointLimitHit"
    CollidedWithTable = "CollidedWithTable"


def _surface_distance(scene: SceneSpec, oi: int, pi: int, point: np.ndarray) -> float:
    obj = scene.objects[oi]
    prim = obj.parts[pi][1]
    world = compose_pose(obj.object_pose, prim.local_pose)
    local = world.inverse().transform_points(point)
    return abs(float(prim.sdf(local[None, :])[0]))


def _closest_surface_point(scene: SceneSpec, oi: int, pi: int, point: np.ndarray) -> np.ndarray:
    obj = scene.objects[oi]
    prim = obj.parts[pi][1]
    world = compose_pose(obj.object_pose, prim.local_pose)
    local = world.inverse().transform_points(point)
    return world.transform_points(prim.closest_point(local))


def classify_sim_trial(plan: GraspPlan, scene: SceneSpec,
                       target: tuple[str, str],
                       contacts_world: tuple[np.ndarray, np.ndarray],
                       on_object_tolerance: float = 0.02,
                       depth_threshold: float = 0.015) -> OutcomeTaxonomy:
    """Classify a world-frame grasp plan against scene ground truth.

    Priority order: off-object, wrong object, wrong part, depth offset,
    success. The simulator never emits the execution-only categories
    (slipped gripper, joint limits, table collisions).
    """
    object_query, part_name = target
    target_obj = resolve_object(scene, object_query)
    part_names = [n for n, _ in scene.objects[target_obj].parts]
    target_part = part_names.index(part_name)

    ca, cb = (np.asarray(c, dtype=np.float64) for c in contacts_world)
    midpoint = 0.5 * (ca + cb)

    surfaces = [(oi, pi) for oi, obj in enumerate(scene.objects)
                for pi in range(len(obj.parts))]
    # (1) both contacts far from every surface
    if all(min(_surface_distance(scene, oi, pi, c) for oi, pi in surfaces) > on_object_tolerance
           for c in (ca, cb)):
        return OutcomeTaxonomy.GraspNotOnObject

    # (2)/(3) surface actually pinched: nearest over the two contact points
    dists = [(min(_surface_distance(scene, oi, pi, ca),
                  _surface_distance(scene, oi, pi, cb)), oi, pi)
             for oi, pi in surfaces]
    _, oi, pi = min(dists)
    if oi != target_obj:
        return OutcomeTaxonomy.WrongObject
    if pi != target_part:
        return OutcomeTaxonomy.WrongPart

    # (4) depth offset: distance from the midpoint to the target-part
    # surface, signed by its direction along the approach axis (a pure
    # projection underestimates the offset for oblique approaches)
    approach = plan.grasp.rotation_matrix()[:, 2]
    nearest = _closest_surface_point(scene, target_obj, target_part, midpoint)
    gap = midpoint - nearest
    offset = float(np.copysign(np.linalg.norm(gap), np.dot(gap, approach) or 1.0))
    if abs(offset) > depth_threshold:
        return OutcomeTaxonomy.GraspDepthIssue
    return OutcomeTaxonomy.Success


def contacts_to_world(camera_to_world: Pose6DOF, contact_a, contact_b):
    return (camera_to_world.transform_points(np.asarray(contact_a)),
            camera_to_world.transform_points(np.asarray(contact_b)))
