"""Parametric household-object scenes: object templates built from analytic
primitives, a seeded random scene generator, and JSON (de)serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError
from ..geometry import CameraIntrinsics, Pose6DOF, compose_pose
from .shapes import Box, Cylinder, Primitive, Sphere, TorusArc, primitive_from_dict, primitive_to_dict

PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (200, 40, 40),
    "green": (40, 170, 60),
    "blue": (50, 90, 200),
    "yellow": (220, 200, 40),
    "purple": (150, 60, 180),
    "orange": (230, 140, 30),
    "cyan": (40, 190, 190),
    "white": (230, 230, 230),
}

BACKGROUND_COLOR = (30, 30, 30)


def _rot_x90() -> Pose6DOF:
    # rotate +90 deg about x: local x-y plane becomes the x-z plane
    return Pose6DOF(np.array([np.cos(np.pi / 4), np.sin(np.pi / 4), 0, 0]), np.zeros(3), "object")


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    attribute_tags: tuple[str, ...]
    parts: tuple[tuple[str, Primitive], ...]
    object_pose: Pose6DOF

    def __post_init__(self):
        names = [p[0] for p in self.parts]
        if len(names) != len(set(names)) or not names:
            raise InvalidInputError(f"object {self.name}: part names must be unique and non-empty")

    @property
    def display_name(self) -> str:
        return " ".join([*self.attribute_tags, self.name])

    @property
    def tokens(self) -> frozenset[str]:
        toks = set(self.name.lower().split())
        toks.update(t.lower() for t in self.attribute_tags)
        return frozenset(toks)

    def color(self) -> tuple[int, int, int]:
        for tag in self.attribute_tags:
            if tag in PALETTE:
                return PALETTE[tag]
        return (128, 128, 128)

    def world_part_pose(self, part_index: int) -> Pose6DOF:
        return compose_pose(self.object_pose, self.parts[part_index][1].local_pose)

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        centers = [self.world_part_pose(i).translation for i in range(len(self.parts))]
        radii = [p.bounding_radius() for _, p in self.parts]
        center = np.mean(centers, axis=0)
        radius = max(float(np.linalg.norm(c - center)) + r for c, r in zip(centers, radii))
        return center, radius


@dataclass(frozen=True)
class SceneSpec:
    objects: tuple[ObjectSpec, ...]
    camera_pose: Pose6DOF  # camera -> world
    intrinsics: CameraIntrinsics
    width: int
    height: int

    def __post_init__(self):
        token_sets = [o.tokens for o in self.objects]
        if len(set(token_sets)) != len(token_sets):
            raise InvalidInputError("object name + attribute tags must be jointly unique")
        for i in range(len(self.objects)):
            ci, ri = self.objects[i].bounding_sphere()
            for j in range(i + 1, len(self.objects)):
                cj, rj = self.objects[j].bounding_sphere()
                if np.linalg.norm(ci - cj) < ri + rj:
                    raise InvalidInputError(
                        f"bounding spheres of {self.objects[i].display_name} and "
                        f"{self.objects[j].display_name} overlap")


def _yaw_pose(x: float, y: float, yaw_rad: float) -> Pose6DOF:
    h = yaw_rad / 2.0
    return Pose6DOF(np.array([np.cos(h), 0, 0, np.sin(h)]), np.array([x, y, 0.0]), "world")


def make_mug(tag: str, x: float = 0.0, y: float = 0.0, yaw_deg: float = 0.0) -> ObjectSpec:
    body = Cylinder(Pose6DOF(np.array([1.0, 0, 0, 0]), np.array([0, 0, 0.05]), "object"),
                    radius=0.035, half_height=0.05)
    handle_pose = Pose6DOF(_rot_x90().quaternion, np.array([0.035, 0, 0.05]), "object")
    handle = TorusArc(handle_pose, major=0.032, minor=0.010, arc_deg=180.0)
    return ObjectSpec("mug", (tag,), (("body", body), ("handle", handle)),
                      _yaw_pose(x, y, np.deg2rad(yaw_deg)))


def make_pan(tag: str, x: float = 0.0, y: float = 0.0, yaw_deg: float = 0.0) -> ObjectSpec:
    body = Cylinder(Pose6DOF(np.array([1.0, 0, 0, 0]), np.array([0, 0, 0.015]), "object"),
                    radius=0.07, half_height=0.015)
    # round handle: a box would expose only one of each pair of opposing
    # faces to the camera, leaving no antipodal contacts on visible surface
    rot_y90 = Pose6DOF(np.array([np.cos(np.pi / 4), 0, np.sin(np.pi / 4), 0]),
                       np.array([0.115, 0, 0.02]), "object")
    handle = Cylinder(rot_y90, radius=0.010, half_height=0.055)
    return ObjectSpec("pan", (tag,), (("body", body), ("handle", handle)),
                      _yaw_pose(x, y, np.deg2rad(yaw_deg)))


def make_bottle(tag: str, x: float = 0.0, y: float = 0.0, yaw_deg: float = 0.0) -> ObjectSpec:
    body = Cylinder(Pose6DOF(np.array([1.0, 0, 0, 0]), np.array([0, 0, 0.07]), "object"),
                    radius=0.03, half_height=0.07)
    cap = Cylinder(Pose6DOF(np.array([1.0, 0, 0, 0]), np.array([0, 0, 0.152]), "object"),
                   radius=0.014, half_height=0.012)
    return ObjectSpec("bottle", (tag,), (("body", body), ("cap", cap)),
                      _yaw_pose(x, y, np.deg2rad(yaw_deg)))


TEMPLATES = {"mug": make_mug, "pan": make_pan, "bottle": make_bottle}

# parts thin enough for the default gripper and depth-agreement tolerance
GRASPABLE_PARTS = {"mug": "handle", "pan": "handle", "bottle": "cap"}


def default_camera_pose() -> Pose6DOF:
    """Camera above and behind the table, looking down at the object area."""
    position = np.array([0.0, -0.45, 0.50])
    target = np.array([0.0, 0.0, 0.05])
    forward = target - position
    forward = forward / np.linalg.norm(forward)
    up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up)
    right = right / np.linalg.norm(right)
    down = np.cross(forward, right)
    rot = np.stack([right, down, forward], axis=1)
    return Pose6DOF.from_matrix(rot, position, "world")


def default_intrinsics(width: int, height: int) -> CameraIntrinsics:
    f = 525.0 * width / 640.0
    return CameraIntrinsics(f, f, (width - 1) / 2.0, (height - 1) / 2.0)


def random_scene(seed: int, n_objects: int, width: int = 320, height: int = 240,
                 template_names: list[str] | None = None,
                 yaw_choices: tuple[float, ...] = tuple(range(0, 360, 45))) -> SceneSpec:
    """Seeded scene with 1-5 non-overlapping objects at 45-degree yaw steps
    (or a restricted orientation protocol via yaw_choices)."""
    if not 1 <= n_objects <= 5:
        raise InvalidInputError("n_objects must be in 1..5")
    rng = np.random.default_rng(seed)
    names = template_names or list(TEMPLATES)
    colors = list(PALETTE)
    rng.shuffle(colors)
    objects: list[ObjectSpec] = []
    placed: list[tuple[np.ndarray, float]] = []
    for i in range(n_objects):
        template = TEMPLATES[names[rng.integers(len(names))]]
        for _attempt in range(200):
            x = float(rng.uniform(-0.26, 0.26))
            y = float(rng.uniform(-0.16, 0.16))
            yaw = float(yaw_choices[rng.integers(len(yaw_choices))])
            candidate = template(colors[i], x, y, yaw)
            center, radius = candidate.bounding_sphere()
            if all(np.linalg.norm(center - c) >= radius + r + 0.01 for c, r in placed):
                objects.append(candidate)
                placed.append((center, radius))
                break
        else:
            raise InvalidInputError("could not place objects without overlap")
    return SceneSpec(tuple(objects), default_camera_pose(), default_intrinsics(width, height),
                     width, height)


def _pose_to_dict(pose: Pose6DOF) -> dict:
    return {"q": pose.quaternion.tolist(), "t": pose.translation.tolist(), "frame": pose.frame}


def _pose_from_dict(doc: dict) -> Pose6DOF:
    return Pose6DOF(np.array(doc["q"]), np.array(doc["t"]), doc.get("frame", "world"))


def scene_to_dict(scene: SceneSpec) -> dict:
    return {
        "width": scene.width,
        "height": scene.height,
        "intrinsics": {"fx": scene.intrinsics.fx, "fy": scene.intrinsics.fy,
                       "cx": scene.intrinsics.cx, "cy": scene.intrinsics.cy},
        "camera_pose": _pose_to_dict(scene.camera_pose),
        "objects": [
            {"name": o.name, "attribute_tags": list(o.attribute_tags),
             "object_pose": _pose_to_dict(o.object_pose),
             "parts": [{"name": n, **primitive_to_dict(p)} for n, p in o.parts]}
            for o in scene.objects
        ],
    }


def scene_from_dict(doc: dict) -> SceneSpec:
    objects = []
    for od in doc["objects"]:
        parts = []
        for pd in od["parts"]:
            pd = dict(pd)
            name = pd.pop("name")
            parts.append((name, primitive_from_dict(pd)))
        objects.append(ObjectSpec(od["name"], tuple(od["attribute_tags"]),
                                  tuple(parts), _pose_from_dict(od["object_pose"])))
    intr = doc["intrinsics"]
    return SceneSpec(tuple(objects), _pose_from_dict(doc["camera_pose"]),
                     CameraIntrinsics(intr["fx"], intr["fy"], intr["cx"], intr["cy"]),
                     doc["width"], doc["height"])


def save_scene(scene: SceneSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n")


def load_scene(path: str | Path) -> SceneSpec:
    return scene_from_dict(json.loads(Path(path).read_text()))
