"""Segmentation dataset manifest loading and the 6-member augmentation
family {identity, hflip} x {rotate -10, 0, +10 degrees}."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from ..errors import ManifestError
from ..geometry import BinaryMask, ImageRGB
from ..imageio import read_mask_png, read_rgb_png
from ..pipeline import PromptPair

MANIFEST_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AugmentationOp:
    """One member of the canonical 6-member family."""

    hflip: bool = False
    rotate_deg: int = 0  # -10, 0 or +10

    def label(self) -> str:
        parts = []
        if self.hflip:
            parts.append("hflip")
        if self.rotate_deg:
            parts.append(f"rot{self.rotate_deg:+d}")
        return "+".join(parts) or "identity"


AUGMENTATION_FAMILY: tuple[AugmentationOp, ...] = tuple(
    AugmentationOp(hflip, rot) for hflip in (False, True) for rot in (0, -10, 10)
)


@dataclass(frozen=True)
class SegSample:
    image_path: Path
    gt_mask_path: Path
    prompt: PromptPair
    group: bool
    category: str
    object_name: str
    depth_path: Path | None = None
    augmentation: AugmentationOp | None = None

    def load_image(self) -> ImageRGB:
        img = read_rgb_png(self.image_path)
        return _apply_to_image(img, self.augmentation) if self.augmentation else img

    def load_gt_mask(self) -> BinaryMask:
        mask = read_mask_png(self.gt_mask_path)
        return _apply_to_mask(mask, self.augmentation) if self.augmentation else mask


def load_manifest(path: str | Path, eager_validation: bool = True) -> list[SegSample]:
    """Parse a JSON manifest into SegSamples with resolved absolute paths."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot parse manifest {path}: {exc}") from exc
    if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ManifestError(f"manifest schema version {doc.get('schema_version')} "
                            f"!= {MANIFEST_SCHEMA_VERSION}")
    root = path.parent
    samples = []
    for entry in doc.get("samples", []):
        try:
            sample = SegSample(
                image_path=(root / entry["image"]).resolve(),
                gt_mask_path=(root / entry["gt_mask"]).resolve(),
                prompt=PromptPair(entry["object_prompt"], entry["part_prompt"]),
                group=bool(entry["group"]),
                category=entry["category"],
                object_name=entry["object"],
                depth_path=(root / entry["depth"]).resolve() if entry.get("depth") else None,
            )
        except KeyError as exc:
            raise ManifestError(f"manifest entry missing key {exc}: {entry}") from exc
        for p in (sample.image_path, sample.gt_mask_path):
            if not p.exists():
                raise ManifestError(f"sample {sample.object_name}: missing file {p}")
        if eager_validation:
            img = sample.load_image()
            mask = read_mask_png(sample.gt_mask_path)
            if (img.width, img.height) != (mask.width, mask.height):
                raise ManifestError(
                    f"sample {sample.object_name}: mask dims {mask.width}x{mask.height} "
                    f"!= image dims {img.width}x{img.height}")
        samples.append(sample)
    return samples


def _rotation_matrix(width: int, height: int, deg: int) -> np.ndarray:
    return cv2.getRotationMatrix2D(((width - 1) / 2.0, (height - 1) / 2.0), deg, 1.0)


def _apply_to_image(image: ImageRGB, op: AugmentationOp) -> ImageRGB:
    arr = image.pixels
    if op.hflip:
        arr = arr[:, ::-1]
    if op.rotate_deg:
        m = _rotation_matrix(image.width, image.height, op.rotate_deg)
        arr = cv2.warpAffine(np.ascontiguousarray(arr), m, (image.width, image.height),
                             flags=cv2.INTER_LINEAR, borderValue=(0, 0, 0))
    return ImageRGB(np.ascontiguousarray(arr))


def _apply_to_mask(mask: BinaryMask, op: AugmentationOp) -> BinaryMask:
    arr = mask.bits
    if op.hflip:
        arr = arr[:, ::-1]
    if op.rotate_deg:
        m = _rotation_matrix(mask.width, mask.height, op.rotate_deg)
        u8 = np.where(arr, 255, 0).astype(np.uint8)
        arr = cv2.warpAffine(np.ascontiguousarray(u8), m, (mask.width, mask.height),
                             flags=cv2.INTER_NEAREST, borderValue=0) != 0
    return BinaryMask(np.ascontiguousarray(arr))


def augment(sample: SegSample) -> list[SegSample]:
    """Expand one base sample into the 6-member augmented family."""
    if sample.augmentation is not None:
        raise ManifestError("sample is already augmented")
    return [replace(sample, augmentation=op) for op in AUGMENTATION_FAMILY]


def apply_augmentation_image(image: ImageRGB, op: AugmentationOp) -> ImageRGB:
    return _apply_to_image(image, op)


def apply_augmentation_mask(mask: BinaryMask, op: AugmentationOp) -> BinaryMask:
    return _apply_to_mask(mask, op)
