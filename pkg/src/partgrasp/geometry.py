"""Image, mask, depth, intrinsics and rigid-pose types plus the projection
and crop/embed arithmetic used throughout the pipeline.

Conventions (fixed once, used everywhere):
    - Quaternions are (w, x, y, z), frames right-handed.
    - Camera frame: +z forward, +x right, +y down.
    - Depth is stored in meters in memory; 0.0 marks an invalid pixel.
    - Bounding boxes are half-open on their max edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import BehindCameraError, InvalidInputError, InvalidRegionError


@dataclass(frozen=True)
class ImageRGB:
    """8-bit RGB image, pixels stored as an (H, W, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"expected (H, W, 3) uint8 pixel buffer, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class DepthImage:
    """Range image in meters, (H, W) float. 0.0 = invalid depth."""

    depth: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.depth, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"expected (H, W) depth buffer, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("depth contains non-finite values")
        if np.any(arr < 0):
            raise InvalidInputError("depth contains negative values")
        arr.setflags(write=False)
        object.__setattr__(self, "depth", arr)

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def height(self) -> int:
        return self.depth.shape[0]


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model: focal lengths and principal point, all in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidInputError("focal lengths must be positive")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, half-open on the max edges."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min < 0 or self.y_min < 0 or self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise InvalidRegionError(f"degenerate bounding box {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    def validate_for(self, width: int, height: int) -> None:
        if self.x_max > width or self.y_max > height:
            raise InvalidRegionError(f"box {self} exceeds image {width}x{height}")


@dataclass(frozen=True)
class BinaryMask:
    """Boolean occupancy mask, (H, W) bool array."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"expected (H, W) mask, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class Pose6DOF:
    """Rigid transform: unit quaternion (w, x, y, z) plus translation in meters.

    ``frame`` names the frame the pose maps into (e.g. "camera", "world").
    """

    quaternion: np.ndarray
    translation: np.ndarray
    frame: str = "camera"

    def __post_init__(self):
        q = np.asarray(self.quaternion, dtype=np.float64).reshape(4)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > 1e-6:
            raise InvalidInputError(f"quaternion norm {norm} too far from 1")
        q = q / norm
        q.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "quaternion", q)
        object.__setattr__(self, "translation", t)
        if not self.frame:
            raise InvalidInputError("pose frame tag must be non-empty")

    @staticmethod
    def identity(frame: str = "camera") -> "Pose6DOF":
        return Pose6DOF(np.array([1.0, 0, 0, 0]), np.zeros(3), frame)

    @staticmethod
    def from_matrix(rot: np.ndarray, translation, frame: str = "camera") -> "Pose6DOF":
        x, y, z, w = Rotation.from_matrix(rot).as_quat()
        return Pose6DOF(np.array([w, x, y, z]), np.asarray(translation, dtype=np.float64), frame)

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.quaternion
        return Rotation.from_quat([x, y, z, w]).as_matrix()

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = pts @ self.rotation_matrix().T + self.translation
        return out[0] if np.asarray(points).ndim == 1 else out

    def inverse(self) -> "Pose6DOF":
        rot = self.rotation_matrix().T
        return Pose6DOF.from_matrix(rot, -rot @ self.translation, self.frame)


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def compose_pose(a: Pose6DOF, b: Pose6DOF) -> Pose6DOF:
    """Rigid composition a ∘ b (apply b first, then a)."""
    q = quat_multiply(a.quaternion, b.quaternion)
    q = q / np.linalg.norm(q)
    t = a.translation + a.rotation_matrix() @ b.translation
    return Pose6DOF(q, t, a.frame)


@dataclass(frozen=True)
class PointCloud:
    """Points in the camera frame with per-point source pixel indices and
    optional unit normals."""

    points: np.ndarray
    pixel_indices: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        idx = np.asarray(self.pixel_indices, dtype=np.int64).reshape(-1)
        if len(pts) != len(idx):
            raise InvalidInputError("points and pixel indices disagree in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "pixel_indices", idx)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(nrm) != len(pts):
                raise InvalidInputError("normals count disagrees with points")
            lengths = np.linalg.norm(nrm, axis=1)
            if len(nrm) and np.max(np.abs(lengths - 1.0)) > 1e-6:
                raise InvalidInputError("normals must have unit length")
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return len(self.points)


def crop_image(image: ImageRGB, bbox: BoundingBox) -> ImageRGB:
    """Extract the half-open box region of ``image``."""
    bbox.validate_for(image.width, image.height)
    return ImageRGB(image.pixels[bbox.y_min:bbox.y_max, bbox.x_min:bbox.x_max].copy())


def resample_mask_nearest(mask: BinaryMask, width: int, height: int) -> BinaryMask:
    """Nearest-neighbor resample; masks are categorical so never interpolated."""
    if mask.width == width and mask.height == height:
        return mask
    ys = (np.arange(height) * mask.height) // height
    xs = (np.arange(width) * mask.width) // width
    return BinaryMask(mask.bits[np.ix_(ys, xs)])


def embed_mask_full(crop_mask: BinaryMask, bbox: BoundingBox, full_dims: tuple[int, int]) -> BinaryMask:
    """Place a crop-coordinate mask back into full-image coordinates.

    ``full_dims`` is (width, height). If the mask was internally rescaled by
    the segmenter it is first resampled (nearest-neighbor) to the box size.
    """
    full_w, full_h = full_dims
    bbox.validate_for(full_w, full_h)
    if crop_mask.width != bbox.width or crop_mask.height != bbox.height:
        crop_mask = resample_mask_nearest(crop_mask, bbox.width, bbox.height)
    bits = np.zeros((full_h, full_w), dtype=bool)
    bits[bbox.y_min:bbox.y_max, bbox.x_min:bbox.x_max] = crop_mask.bits
    return BinaryMask(bits)


def backproject(depth: DepthImage, intrinsics: CameraIntrinsics,
                mask: BinaryMask | None = None) -> PointCloud:
    """Invert the pinhole model over all valid-depth (and mask-set) pixels."""
    if mask is not None and (mask.width != depth.width or mask.height != depth.height):
        raise InvalidInputError("mask dims must match depth dims")
    valid = depth.depth > 0
    if mask is not None:
        valid = valid & mask.bits
    vs, us = np.nonzero(valid)
    d = depth.depth[vs, us]
    x = (us - intrinsics.cx) * d / intrinsics.fx
    y = (vs - intrinsics.cy) * d / intrinsics.fy
    points = np.stack([x, y, d], axis=1)
    return PointCloud(points, vs * depth.width + us)


def project(point, intrinsics: CameraIntrinsics) -> tuple[float, float]:
    """Pinhole projection of a single camera-frame point to real-valued pixels."""
    x, y, z = np.asarray(point, dtype=np.float64).reshape(3)
    if z <= 0:
        raise BehindCameraError(f"point z={z} not in front of camera")
    return (intrinsics.fx * x / z + intrinsics.cx, intrinsics.fy * y / z + intrinsics.cy)


def project_points(points: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Vectorized projection of (N, 3) camera-frame points to (N, 2) pixels."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if np.any(pts[:, 2] <= 0):
        raise BehindCameraError("point(s) with z <= 0")
    u = intrinsics.fx * pts[:, 0] / pts[:, 2] + intrinsics.cx
    v = intrinsics.fy * pts[:, 1] / pts[:, 2] + intrinsics.cy
    return np.stack([u, v], axis=1)
