"""Raycast renderer and scene ground truth: analytic depth values,
occlusion, backprojection consistency, ground-truth queries and scene
serialization."""

import numpy as np
import pytest

from partgrasp.errors import (
    AmbiguousQueryError, InvalidInputError, NotFoundError,
)
from partgrasp.geometry import CameraIntrinsics, Pose6DOF, backproject, compose_pose
from partgrasp.sim.oracle import (
    ground_truth_bbox, ground_truth_mask, part_mask_full, resolve_object,
)
from partgrasp.sim.render import raycast_render
from partgrasp.sim.scenes import (
    ObjectSpec, SceneSpec, load_scene, make_mug, make_pan, random_scene,
    save_scene,
)
from partgrasp.sim.shapes import Sphere

from conftest import build_scene


def sphere_scene(spheres, width=64, height=48):
    """Scene with the camera frame equal to the world frame (looking +z)."""
    objects = tuple(
        ObjectSpec(name, (tag,),
                   (("surface", Sphere(Pose6DOF(np.array([1.0, 0, 0, 0]),
                                                np.asarray(center), "object"),
                                       radius)),),
                   Pose6DOF.identity("world"))
        for name, tag, center, radius in spheres)
    return SceneSpec(objects, Pose6DOF.identity("world"),
                     CameraIntrinsics(100.0, 100.0, 32.0, 24.0), width, height)


class TestRaycastDepth:
    def test_on_axis_sphere_depth(self):
        scene = sphere_scene([("ball", "red", (0.0, 0.0, 0.4), 0.05)])
        render = raycast_render(scene)
        # the ray through the principal point hits the near pole of the sphere
        assert render.depth.depth[24, 32] == pytest.approx(0.35, abs=1e-9)
        assert render.instance_map[24, 32] == 0
        assert tuple(render.part_map[24, 32]) == (0, 0)

    def test_empty_scene_renders_invalid_depth(self):
        render = raycast_render(sphere_scene([]))
        assert np.all(render.depth.depth == 0.0)
        assert np.all(render.instance_map == -1)
        assert np.all(render.part_map == -1)

    def test_occlusion_keeps_nearest_hit(self):
        scene = sphere_scene([
            ("ball", "red", (0.0, 0.0, 0.6), 0.05),
            ("ball", "blue", (0.0, 0.0, 0.3), 0.02),
        ])
        render = raycast_render(scene)
        assert render.instance_map[24, 32] == 1
        assert render.depth.depth[24, 32] == pytest.approx(0.28, abs=1e-9)
        # the larger far sphere is still visible around the occluder
        assert np.any(render.instance_map == 0)

    def test_background_pixels_have_zero_depth(self, bottle_render):
        background = bottle_render.instance_map == -1
        assert np.all(bottle_render.depth.depth[background] == 0.0)
        assert np.all(bottle_render.depth.depth[~background] > 0.0)

    def test_backprojected_pixels_lie_on_hit_surfaces(self, bottle_scene, bottle_render):
        cloud = backproject(bottle_render.depth, bottle_scene.intrinsics)
        world = bottle_scene.camera_pose.transform_points(cloud.points)
        us = cloud.pixel_indices % bottle_render.depth.width
        vs = cloud.pixel_indices // bottle_render.depth.width
        for oi, obj in enumerate(bottle_scene.objects):
            for pi, (_, prim) in enumerate(obj.parts):
                sel = (bottle_render.part_map[vs, us, 0] == oi) & \
                      (bottle_render.part_map[vs, us, 1] == pi)
                if not np.any(sel):
                    continue
                pose = compose_pose(obj.object_pose, prim.local_pose)
                local = pose.inverse().transform_points(world[sel])
                assert np.abs(prim.sdf(local)).max() < 1e-4

    def test_rgb_uses_object_colors(self, bottle_render, bottle_scene):
        hit = bottle_render.instance_map == 0
        color = bottle_scene.objects[0].color()
        assert np.all(bottle_render.rgb.pixels[hit] == color)


class TestGroundTruthQueries:
    def test_bbox_is_tight(self, mug_scene, mug_render):
        bbox = ground_truth_bbox(mug_render, mug_scene, "red mug")
        inside = mug_render.instance_map[bbox.y_min:bbox.y_max, bbox.x_min:bbox.x_max] == 0
        # every edge row/column of the half-open box touches the object
        assert inside[0, :].any() and inside[-1, :].any()
        assert inside[:, 0].any() and inside[:, -1].any()
        outside = mug_render.instance_map == 0
        outside[bbox.y_min:bbox.y_max, bbox.x_min:bbox.x_max] = False
        assert not outside.any()

    def test_part_mask_matches_part_map(self, mug_scene, mug_render):
        mask = part_mask_full(mug_render, mug_scene, "red mug", "handle")
        expect = (mug_render.part_map[:, :, 0] == 0) & (mug_render.part_map[:, :, 1] == 1)
        assert np.array_equal(mask.bits, expect)
        assert mask.count() > 0

    def test_mask_respects_crop_window(self, mug_scene, mug_render):
        bbox = ground_truth_bbox(mug_render, mug_scene, "red mug")
        crop_mask = ground_truth_mask(mug_render, mug_scene, "red mug", "handle", bbox)
        assert (crop_mask.width, crop_mask.height) == \
               (bbox.x_max - bbox.x_min, bbox.y_max - bbox.y_min)
        full = part_mask_full(mug_render, mug_scene, "red mug", "handle")
        assert np.array_equal(
            crop_mask.bits, full.bits[bbox.y_min:bbox.y_max, bbox.x_min:bbox.x_max])

    def test_unknown_part_rejected(self, mug_scene, mug_render):
        with pytest.raises(NotFoundError):
            part_mask_full(mug_render, mug_scene, "red mug", "lid")

    def test_instance_map_agrees_with_part_map(self, two_object_render):
        assert np.array_equal(two_object_render.instance_map,
                              two_object_render.part_map[:, :, 0])


class TestResolveObject:
    def test_token_containment(self, two_object_scene):
        assert resolve_object(two_object_scene, "red mug") == 0
        assert resolve_object(two_object_scene, "pan") == 1
        assert resolve_object(two_object_scene, "MUG red") == 0

    def test_not_found(self, two_object_scene):
        with pytest.raises(NotFoundError):
            resolve_object(two_object_scene, "purple teapot")
        with pytest.raises(NotFoundError):
            resolve_object(two_object_scene, "  ")

    def test_ambiguous_query(self):
        scene = build_scene([make_mug("red", -0.12, 0.0), make_pan("red", 0.12, 0.0)],
                            width=64, height=48)
        with pytest.raises(AmbiguousQueryError):
            resolve_object(scene, "red")


class TestSceneSpecs:
    def test_overlapping_objects_rejected(self):
        with pytest.raises(InvalidInputError):
            build_scene([make_mug("red", 0.0, 0.0), make_mug("blue", 0.01, 0.0)])

    def test_duplicate_identities_rejected(self):
        with pytest.raises(InvalidInputError):
            build_scene([make_mug("red", -0.2, 0.0), make_mug("red", 0.2, 0.0)])

    def test_random_scene_is_seed_deterministic(self):
        a = random_scene(7, 2, 160, 120)
        b = random_scene(7, 2, 160, 120)
        assert [o.display_name for o in a.objects] == [o.display_name for o in b.objects]
        for oa, ob in zip(a.objects, b.objects):
            assert np.allclose(oa.object_pose.translation, ob.object_pose.translation)
            assert np.allclose(oa.object_pose.quaternion, ob.object_pose.quaternion)

    def test_random_scene_object_count_bounds(self):
        with pytest.raises(InvalidInputError):
            random_scene(0, 0)
        with pytest.raises(InvalidInputError):
            random_scene(0, 6)

    def test_serialization_round_trip(self, tmp_path):
        scene = random_scene(3, 2, 96, 72)
        path = tmp_path / "scene.json"
        save_scene(scene, path)
        back = load_scene(path)
        ra, rb = raycast_render(scene), raycast_render(back)
        assert np.array_equal(ra.depth.depth, rb.depth.depth)
        assert np.array_equal(ra.instance_map, rb.instance_map)
        assert np.array_equal(ra.part_map, rb.part_map)
        assert np.array_equal(ra.rgb.pixels, rb.rgb.pixels)
