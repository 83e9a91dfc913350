"""Analytic parallel-gripper grasp synthesis over a masked point cloud,
plus mask filtering, top-1 selection and waypoint planning.

The sampler is the deterministic stand-in for a learned grasp stage: it
draws antipodal contact pairs from the cloud, scores them by the minimum
friction-cone cosine, and emits camera-frame poses whose +x is the closing
axis and +z the approach direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InsufficientPointsError, InvalidInputError, NoGraspFoundError
from .geometry import (
    BinaryMask,
    CameraIntrinsics,
    DepthImage,
    PointCloud,
    Pose6DOF,
    compose_pose,
    project_points,
)


@dataclass(frozen=True)
class GripperModel:
    max_opening: float = 0.08
    finger_depth: float = 0.04
    friction_half_angle_deg: float = 20.0

    def __post_init__(self):
        if self.max_opening <= 0 or self.finger_depth <= 0 or self.friction_half_angle_deg <= 0:
            raise InvalidInputError("gripper dimensions must be strictly positive")
        if self.friction_half_angle_deg >= 90:
            raise InvalidInputError("friction half angle must be < 90 degrees")


@dataclass(frozen=True)
class GraspProposal:
    """Scored two-contact grasp in the camera frame.

    The pose translation sits at the contact midpoint, +x runs from
    contact_a to contact_b, +z is the approach direction. ``pixel_index``
    is the smaller source-pixel index of the two contacts; it breaks
    ranking ties deterministically and is not part of the wire format.
    """

    pose: Pose6DOF
    opening_width: float
    score: float
    contact_a: np.ndarray
    contact_b: np.ndarray
    pixel_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "contact_a", np.asarray(self.contact_a, dtype=np.float64).reshape(3))
        object.__setattr__(self, "contact_b", np.asarray(self.contact_b, dtype=np.float64).reshape(3))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.contact_a + self.contact_b)


@dataclass(frozen=True)
class GraspPlan:
    """Pre-grasp / grasp / post-grasp waypoint triple, all in one frame."""

    pre_grasp: Pose6DOF
    grasp: Pose6DOF
    post_grasp: Pose6DOF
    frame: str = "world"


def estimate_normals(cloud: PointCloud, k: int = 10) -> PointCloud:
    """Per-point normals from the smallest covariance eigenvector of the
    k nearest neighbors, oriented toward the camera origin."""
    if k < 3:
        raise InvalidInputError("k must be >= 3")
    n = len(cloud)
    if n < k + 1:
        raise InsufficientPointsError(f"need at least {k + 1} points, got {n}")
    tree = cKDTree(cloud.points)
    _, idx = tree.query(cloud.points, k=k + 1)
    neighbors = cloud.points[idx[:, 1:]]  # exclude the query point itself
    centered = neighbors - neighbors.mean(axis=1, keepdims=True)
    covs = np.einsum("nki,nkj->nij", centered, centered)
    _, eigvecs = np.linalg.eigh(covs)
    normals = eigvecs[:, :, 0]
    flip = np.einsum("ij,ij->i", normals, cloud.points) > 0
    normals[flip] *= -1.0
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return PointCloud(cloud.points, cloud.pixel_indices, normals)


def _approach_axis(midpoints: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """Camera-view ray to each midpoint, projected orthogonal to the closing
    axis; falls back to projected camera +y when degenerate."""
    view = midpoints / np.linalg.norm(midpoints, axis=1, keepdims=True)
    z = view - np.einsum("ij,ij->i", view, axes)[:, None] * axes
    norms = np.linalg.norm(z, axis=1)
    degenerate = norms < 1e-6
    if np.any(degenerate):
        cam_y = np.array([0.0, 1.0, 0.0])
        fallback = cam_y - (axes[degenerate] @ cam_y)[:, None] * axes[degenerate]
        z[degenerate] = fallback
        norms[degenerate] = np.linalg.norm(fallback, axis=1)
    return z / norms[:, None]


def sample_antipodal_grasps(cloud: PointCloud, gripper: GripperModel,
                            sample_budget: int, rng_seed: int) -> list[GraspProposal]:
    """Draw up to ``sample_budget`` contact-pair candidates (seeded, without
    replacement) and keep every pair passing the width and friction-cone
    tests. Output sorted by (score desc, width asc, pixel index asc)."""
    if cloud.normals is None:
        raise InvalidInputError("cloud must carry normals")
    n = len(cloud)
    if n < 2:
        return []
    total_pairs = n * (n - 1) // 2
    if sample_budget >= total_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(rng_seed)
        flat = rng.choice(total_pairs, size=sample_budget, replace=False)
        # invert the row-major upper-triangle linearization
        ii = (n - 2 - np.floor(np.sqrt(-8 * flat + 4 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
        jj = (flat + ii + 1 - ii * (2 * n - ii - 1) // 2).astype(np.int64)

    p1, p2 = cloud.points[ii], cloud.points[jj]
    n1, n2 = cloud.normals[ii], cloud.normals[jj]
    d = p2 - p1
    width = np.linalg.norm(d, axis=1)
    ok = (width > 1e-9) & (width <= gripper.max_opening)
    ii, jj, p1, p2, n1, n2, d, width = (a[ok] for a in (ii, jj, p1, p2, n1, n2, d, width))
    axis = d / width[:, None]
    cos_limit = np.cos(np.deg2rad(gripper.friction_half_angle_deg))
    q = np.minimum(np.einsum("ij,ij->i", n1, -axis), np.einsum("ij,ij->i", n2, axis))
    ok = q >= cos_limit
    ii, jj, p1, p2, width, q = (a[ok] for a in (ii, jj, p1, p2, width, q))
    if len(q) == 0:
        return []

    # contact_a = lower source-pixel index; recompute the axis accordingly
    pix1, pix2 = cloud.pixel_indices[ii], cloud.pixel_indices[jj]
    swap = pix1 > pix2
    pa = np.where(swap[:, None], p2, p1)
    pb = np.where(swap[:, None], p1, p2)
    pix_a = np.where(swap, pix2, pix1)
    pix_b = np.where(swap, pix1, pix2)
    axes = (pb - pa) / width[:, None]
    mids = 0.5 * (pa + pb)
    zs = _approach_axis(mids, axes)
    ys = np.cross(zs, axes)

    order = np.lexsort((pix_b, pix_a, width, -q))
    proposals = []
    for k in order:
        rot = np.stack([axes[k], ys[k], zs[k]], axis=1)
        pose = Pose6DOF.from_matrix(rot, mids[k], "camera")
        proposals.append(GraspProposal(pose, float(width[k]), float(q[k]),
                                       pa[k], pb[k], int(pix_a[k])))
    return proposals


def mask_filter_grasps(proposals: list[GraspProposal], mask: BinaryMask,
                       depth: DepthImage, intrinsics: CameraIntrinsics,
                       pixel_tolerance: int = 2,
                       depth_tolerance: float = 0.02) -> list[GraspProposal]:
    """Keep proposals whose contacts and midpoint project onto (or within a
    Chebyshev pixel tolerance of) set mask bits, with the midpoint's depth
    agreeing with the depth image."""
    if mask.width != depth.width or mask.height != depth.height:
        raise InvalidInputError("mask and depth dims must match")

    def near_set_bit(u: float, v: float) -> bool:
        ui, vi = int(round(u)), int(round(v))
        x0, x1 = max(0, ui - pixel_tolerance), min(mask.width, ui + pixel_tolerance + 1)
        y0, y1 = max(0, vi - pixel_tolerance), min(mask.height, vi + pixel_tolerance + 1)
        if x0 >= x1 or y0 >= y1:
            return False
        return bool(mask.bits[y0:y1, x0:x1].any())

    kept = []
    for prop in proposals:
        mid = prop.midpoint
        if prop.contact_a[2] <= 0 or prop.contact_b[2] <= 0 or mid[2] <= 0:
            continue
        (ua, va), (ub, vb), (um, vm) = project_points(
            np.stack([prop.contact_a, prop.contact_b, mid]), intrinsics)
        if not (near_set_bit(ua, va) and near_set_bit(ub, vb) and near_set_bit(um, vm)):
            continue
        ui, vi = int(round(um)), int(round(vm))
        if not (0 <= ui < depth.width and 0 <= vi < depth.height):
            continue
        if abs(depth.depth[vi, ui] - mid[2]) > depth_tolerance:
            continue
        kept.append(prop)
    return kept


def select_top_grasp(proposals: list[GraspProposal]) -> GraspProposal:
    """First proposal under the canonical ordering; deterministic under ties."""
    if not proposals:
        raise NoGraspFoundError("empty proposal list")
    return min(proposals, key=lambda p: (-p.score, p.opening_width, p.pixel_index))


def build_grasp_plan(grasp: GraspProposal, camera_to_world: Pose6DOF) -> GraspPlan:
    """Map the selected grasp into the world frame and derive the waypoints:
    pre-grasp 10 cm back along the approach axis, post-grasp 10 cm up along
    world +z with rotation unchanged."""
    grasp_w = compose_pose(camera_to_world, grasp.pose)
    grasp_w = Pose6DOF(grasp_w.quaternion, grasp_w.translation, "world")
    pre = compose_pose(grasp_w, Pose6DOF(np.array([1.0, 0, 0, 0]), np.array([0, 0, -0.10]), "world"))
    post = Pose6DOF(grasp_w.quaternion, grasp_w.translation + np.array([0, 0, 0.10]), "world")
    return GraspPlan(pre, grasp_w, post, "world")
