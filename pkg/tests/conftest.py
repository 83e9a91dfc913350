"""Shared test fixtures: small deterministic scenes and renders."""

from __future__ import annotations

import numpy as np
import pytest

from partgrasp.campaign import campaign_config
from partgrasp.sim.render import raycast_render
from partgrasp.sim.scenes import (
    SceneSpec, default_camera_pose, default_intrinsics, make_bottle, make_mug,
    make_pan,
)


def build_scene(objects, width=640, height=480) -> SceneSpec:
    return SceneSpec(tuple(objects), default_camera_pose(),
                     default_intrinsics(width, height), width, height)


@pytest.fixture(scope="session")
def mug_scene():
    return build_scene([make_mug("red", 0.0, 0.0, 0.0)])


@pytest.fixture(scope="session")
def mug_render(mug_scene):
    return raycast_render(mug_scene)


@pytest.fixture(scope="session")
def bottle_scene():
    return build_scene([make_bottle("red", 0.0, 0.0, 0.0)], 160, 120)


@pytest.fixture(scope="session")
def bottle_render(bottle_scene):
    return raycast_render(bottle_scene)


@pytest.fixture(scope="session")
def two_object_scene():
    return build_scene([make_mug("red", -0.12, 0.0, 0.0), make_pan("green", 0.12, 0.02, 45.0)])


@pytest.fixture(scope="session")
def two_object_render(two_object_scene):
    return raycast_render(two_object_scene)


@pytest.fixture(scope="session")
def sim_config():
    return campaign_config()
