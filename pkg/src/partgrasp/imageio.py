"""On-disk formats: 8-bit RGB PNGs, 16-bit millimeter depth PNGs,
8-bit gray mask PNGs, and the JSON intrinsics document."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidInputError
from .geometry import BinaryMask, CameraIntrinsics, DepthImage, ImageRGB


def write_rgb_png(image: ImageRGB, path: str | Path) -> None:
    Image.fromarray(image.pixels, mode="RGB").save(path, format="PNG")


def read_rgb_png(path: str | Path) -> ImageRGB:
    with Image.open(path) as im:
        return ImageRGB(np.asarray(im.convert("RGB"), dtype=np.uint8))


def depth_to_millimeters(depth: DepthImage) -> np.ndarray:
    mm = np.round(depth.depth * 1000.0)
    if np.any(mm > 65535):
        raise InvalidInputError("depth exceeds 65.535 m, not representable in 16-bit mm")
    return mm.astype(np.uint16)


def write_depth_png(depth: DepthImage, path: str | Path) -> None:
    Image.fromarray(depth_to_millimeters(depth)).save(path, format="PNG")


def read_depth_png(path: str | Path) -> DepthImage:
    with Image.open(path) as im:
        arr = np.asarray(im, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"depth PNG must be single channel, got shape {arr.shape}")
    return DepthImage(arr / 1000.0)


def write_mask_png(mask: BinaryMask, path: str | Path) -> None:
    Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8), mode="L").save(path, format="PNG")


def read_mask_png(path: str | Path) -> BinaryMask:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return BinaryMask(arr != 0)


def write_intrinsics(intrinsics: CameraIntrinsics, width: int, height: int, path: str | Path) -> None:
    doc = {"fx": intrinsics.fx, "fy": intrinsics.fy, "cx": intrinsics.cx,
           "cy": intrinsics.cy, "width": width, "height": height}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_intrinsics(path: str | Path) -> tuple[CameraIntrinsics, int, int]:
    try:
        doc = json.loads(Path(path).read_text())
        return (CameraIntrinsics(float(doc["fx"]), float(doc["fy"]),
                                 float(doc["cx"]), float(doc["cy"])),
                int(doc["width"]), int(doc["height"]))
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"bad intrinsics file {path}: {exc}") from exc
