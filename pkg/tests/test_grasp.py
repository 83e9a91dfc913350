"""Grasp synthesis: normal estimation, antipodal sampling against a
brute-force oracle, mask filtering, selection and waypoint planning."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partgrasp.errors import (
    InsufficientPointsError, InvalidInputError, NoGraspFoundError,
)
from partgrasp.geometry import (
    BinaryMask, CameraIntrinsics, DepthImage, PointCloud, Pose6DOF,
    project_points,
)
from partgrasp.grasp import (
    GraspProposal, GripperModel, build_grasp_plan, estimate_normals,
    mask_filter_grasps, sample_antipodal_grasps, select_top_grasp,
)

INTR = CameraIntrinsics(525.0, 525.0, 79.5, 59.5)


def sphere_cloud(n=80, radius=0.03, center=(0.0, 0.0, 0.5), seed=0):
    """Evenly scattered points on a sphere, normals known analytically."""
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    points = np.asarray(center) + radius * dirs
    return PointCloud(points, np.arange(n)), dirs


def brute_force_antipodal(cloud, gripper):
    """Reference enumeration over every unordered pair, ordering included."""
    cos_limit = np.cos(np.deg2rad(gripper.friction_half_angle_deg))
    rows = []
    n = len(cloud)
    for i in range(n):
        for j in range(i + 1, n):
            d = cloud.points[j] - cloud.points[i]
            width = float(np.linalg.norm(d))
            if width <= 1e-9 or width > gripper.max_opening:
                continue
            axis = d / width
            q = min(float(cloud.normals[i] @ -axis), float(cloud.normals[j] @ axis))
            if q < cos_limit:
                continue
            a, b = (i, j) if cloud.pixel_indices[i] <= cloud.pixel_indices[j] else (j, i)
            rows.append((q, width, int(cloud.pixel_indices[a]), int(cloud.pixel_indices[b])))
    rows.sort(key=lambda r: (-r[0], r[1], r[2], r[3]))
    return rows


class TestEstimateNormals:
    def test_sphere_normals_are_radial(self):
        cloud, dirs = sphere_cloud(n=200)
        with_normals = estimate_normals(cloud, k=8)
        # estimated normals align with the radial direction up to sign
        dots = np.abs(np.einsum("ij,ij->i", with_normals.normals, dirs))
        assert np.median(dots) > 0.99

    def test_normals_face_the_camera(self):
        cloud, _ = sphere_cloud(n=200)
        with_normals = estimate_normals(cloud, k=8)
        dots = np.einsum("ij,ij->i", with_normals.normals, cloud.points)
        assert np.all(dots <= 1e-12)

    def test_plane_normal(self):
        rng = np.random.default_rng(1)
        xy = rng.uniform(-0.05, 0.05, size=(50, 2))
        points = np.column_stack([xy, np.full(50, 0.4)])
        normals = estimate_normals(PointCloud(points, np.arange(50)), k=6).normals
        assert np.allclose(np.abs(normals[:, 2]), 1.0, atol=1e-9)

    def test_too_few_points(self):
        cloud = PointCloud(np.random.default_rng(2).normal(size=(5, 3)), np.arange(5))
        with pytest.raises(InsufficientPointsError):
            estimate_normals(cloud, k=10)

    def test_k_lower_bound(self):
        cloud, _ = sphere_cloud(n=20)
        with pytest.raises(InvalidInputError):
            estimate_normals(cloud, k=2)


class TestAntipodalSampling:
    @pytest.mark.parametrize("n,seed", [(20, 0), (40, 1), (60, 2)])
    def test_exhaustive_budget_matches_brute_force(self, n, seed):
        cloud, dirs = sphere_cloud(n=n, radius=0.035, seed=seed)
        cloud = PointCloud(cloud.points, np.arange(n) * 7 % (3 * n), dirs)
        gripper = GripperModel(friction_half_angle_deg=30.0)
        got = sample_antipodal_grasps(cloud, gripper, sample_budget=10 ** 6, rng_seed=0)
        want = brute_force_antipodal(cloud, gripper)
        assert want, "oracle should find antipodal pairs on a sphere"
        assert len(got) == len(want)
        for prop, (q, width, pix_a, pix_b) in zip(got, want):
            assert prop.score == pytest.approx(q)
            assert prop.opening_width == pytest.approx(width)
            assert prop.pixel_index == pix_a

    def test_requires_normals(self):
        cloud, _ = sphere_cloud(n=10)
        with pytest.raises(InvalidInputError):
            sample_antipodal_grasps(cloud, GripperModel(), 100, 0)

    def test_small_cloud_returns_empty(self):
        cloud = PointCloud(np.zeros((1, 3)), np.zeros(1), np.array([[0.0, 0.0, -1.0]]))
        assert sample_antipodal_grasps(cloud, GripperModel(), 100, 0) == []

    def test_sampled_budget_is_subset_and_deterministic(self):
        cloud, dirs = sphere_cloud(n=60, radius=0.035, seed=3)
        cloud = PointCloud(cloud.points, cloud.pixel_indices, dirs)
        gripper = GripperModel(friction_half_angle_deg=30.0)
        full = sample_antipodal_grasps(cloud, gripper, 10 ** 6, rng_seed=7)
        sampled = sample_antipodal_grasps(cloud, gripper, 200, rng_seed=7)
        again = sample_antipodal_grasps(cloud, gripper, 200, rng_seed=7)
        full_keys = {(p.pixel_index, round(p.opening_width, 12)) for p in full}
        for p in sampled:
            assert (p.pixel_index, round(p.opening_width, 12)) in full_keys
        assert [(p.pixel_index, p.opening_width) for p in sampled] == \
               [(p.pixel_index, p.opening_width) for p in again]

    def test_pose_axes_consistent(self):
        cloud, dirs = sphere_cloud(n=60, radius=0.035, seed=4)
        cloud = PointCloud(cloud.points, cloud.pixel_indices, dirs)
        props = sample_antipodal_grasps(cloud, GripperModel(friction_half_angle_deg=30.0),
                                        10 ** 6, 0)
        assert props
        for p in props[:20]:
            rot = p.pose.rotation_matrix()
            closing = (p.contact_b - p.contact_a) / p.opening_width
            assert np.allclose(rot[:, 0], closing, atol=1e-9)
            assert abs(rot[:, 2] @ closing) < 1e-9
            assert np.allclose(p.pose.translation, p.midpoint)

    def test_antipodal_width_never_exceeds_opening(self):
        cloud, dirs = sphere_cloud(n=100, radius=0.05, seed=5)
        cloud = PointCloud(cloud.points, cloud.pixel_indices, dirs)
        gripper = GripperModel(max_opening=0.06, friction_half_angle_deg=45.0)
        for p in sample_antipodal_grasps(cloud, gripper, 10 ** 6, 0):
            assert p.opening_width <= gripper.max_opening


class TestMaskFilter:
    def _cloud_scene(self):
        depth = np.full((120, 160), 0.5)
        bits = np.zeros((120, 160), dtype=bool)
        bits[50:70, 70:90] = True
        return DepthImage(depth), BinaryMask(bits)

    def _proposal_at(self, point, offset=np.array([0.01, 0.0, 0.0])):
        a = np.asarray(point) - offset
        b = np.asarray(point) + offset
        return GraspProposal(Pose6DOF.identity(), float(np.linalg.norm(b - a)), 0.9, a, b)

    def test_inside_mask_kept(self):
        depth, mask = self._cloud_scene()
        # pixel (80, 60) at depth 0.5 backprojects to this camera point
        mid = np.array([(80 - INTR.cx) * 0.5 / INTR.fx, (60 - INTR.cy) * 0.5 / INTR.fy, 0.5])
        kept = mask_filter_grasps([self._proposal_at(mid)], mask, depth, INTR)
        assert len(kept) == 1

    def test_outside_mask_dropped(self):
        depth, mask = self._cloud_scene()
        mid = np.array([(20 - INTR.cx) * 0.5 / INTR.fx, (20 - INTR.cy) * 0.5 / INTR.fy, 0.5])
        assert mask_filter_grasps([self._proposal_at(mid)], mask, depth, INTR) == []

    def test_depth_disagreement_dropped(self):
        depth, mask = self._cloud_scene()
        mid = np.array([(80 - INTR.cx) * 0.5 / INTR.fx, (60 - INTR.cy) * 0.5 / INTR.fy, 0.55])
        assert mask_filter_grasps([self._proposal_at(mid)], mask, depth, INTR,
                                  depth_tolerance=0.02) == []

    def test_pixel_tolerance_window(self):
        depth, mask = self._cloud_scene()
        # contact two pixels outside the mask edge passes with tolerance 2
        mid = np.array([(91.0 - INTR.cx) * 0.5 / INTR.fx, (60 - INTR.cy) * 0.5 / INTR.fy, 0.5])
        prop = self._proposal_at(mid, offset=np.zeros(3) + 1e-6)
        assert len(mask_filter_grasps([prop], mask, depth, INTR, pixel_tolerance=2)) == 1
        assert mask_filter_grasps([prop], mask, depth, INTR, pixel_tolerance=0) == []

    def test_dims_must_match(self):
        depth, _ = self._cloud_scene()
        with pytest.raises(InvalidInputError):
            mask_filter_grasps([], BinaryMask(np.ones((4, 4), dtype=bool)), depth, INTR)


class TestSelectionAndPlan:
    def _prop(self, score, width, pix):
        return GraspProposal(Pose6DOF.identity(), width, score,
                             np.array([0, 0, 0.5]), np.array([width, 0, 0.5]), pix)

    def test_selection_ordering(self):
        props = [self._prop(0.9, 0.05, 3), self._prop(0.95, 0.07, 9),
                 self._prop(0.95, 0.04, 5), self._prop(0.95, 0.04, 2)]
        assert select_top_grasp(props).pixel_index == 2

    def test_empty_selection_raises(self):
        with pytest.raises(NoGraspFoundError):
            select_top_grasp([])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_plan_offsets(self, seed):
        rng = np.random.default_rng(seed)
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        cam_pose = Pose6DOF(q, rng.normal(size=3), "world")
        contact = rng.normal(size=3) + np.array([0, 0, 2.0])
        prop = GraspProposal(Pose6DOF(q, contact), 0.04, 0.9,
                             contact - 0.02, contact + 0.02)
        plan = build_grasp_plan(prop, cam_pose)
        pre_offset = plan.pre_grasp.translation - plan.grasp.translation
        assert np.linalg.norm(pre_offset) == pytest.approx(0.10, abs=1e-9)
        # pre-grasp sits along the grasp frame's backward approach axis
        approach = plan.grasp.rotation_matrix()[:, 2]
        assert np.allclose(pre_offset, -0.10 * approach, atol=1e-9)
        post_offset = plan.post_grasp.translation - plan.grasp.translation
        assert np.allclose(post_offset, [0.0, 0.0, 0.10], atol=1e-9)
        for pose in (plan.pre_grasp, plan.post_grasp):
            assert np.allclose(pose.quaternion, plan.grasp.quaternion)

    def test_gripper_validation(self):
        with pytest.raises(InvalidInputError):
            GripperModel(max_opening=0.0)
        with pytest.raises(InvalidInputError):
            GripperModel(friction_half_angle_deg=95.0)
