"""Deterministic fault injectors: wrap a stage so its output is corrupted
in a controlled way, for exercising the failure taxonomy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation, binary_erosion

from ..errors import InvalidInputError, NotFoundError
from ..geometry import BinaryMask, ImageRGB
from .oracle import OracleDetector, ground_truth_bbox, resolve_object


@dataclass(frozen=True)
class Fault:
    kind: str  # wrong_object | mask_dilate | mask_erode | mask_shift | depth_bias | drop_output
    radius: int = 0
    dx: int = 0
    dy: int = 0
    bias: float = 0.0

    def __post_init__(self):
        known = {"wrong_object", "mask_dilate", "mask_erode", "mask_shift",
                 "depth_bias", "drop_output"}
        if self.kind not in known:
            raise InvalidInputError(f"unknown fault kind {self.kind!r}")
        if self.kind in ("mask_dilate", "mask_erode") and self.radius <= 0:
            raise InvalidInputError("dilate/erode radius must be positive")


class _WrongObjectDetector:
    def __init__(self, inner: OracleDetector):
        self.inner = inner

    def detect(self, image, object_text):
        scene = self.inner.scene
        idx = resolve_object(scene, object_text)
        ordered = sorted(range(len(scene.objects)),
                         key=lambda i: scene.objects[i].display_name)
        pos = ordered.index(idx)
        wrong = ordered[(pos + 1) % len(ordered)]
        query = scene.objects[wrong].display_name
        return ground_truth_bbox(self.inner.render, scene, query), 1.0


class _DroppingStage:
    def __init__(self, inner):
        self.inner = inner

    def detect(self, image, object_text):
        raise NotFoundError("injected drop_output fault")

    def segment(self, image, part_text):
        raise NotFoundError("injected drop_output fault")

    def propose(self, depth, intrinsics, mask):
        return []


class _MaskFaultSegmenter:
    def __init__(self, inner, fault: Fault):
        self.inner = inner
        self.fault = fault

    def segment(self, image: ImageRGB, part_text: str):
        mask, conf = self.inner.segment(image, part_text)
        bits = mask.bits
        f = self.fault
        if f.kind == "mask_dilate":
            bits = binary_dilation(bits, iterations=f.radius)
        elif f.kind == "mask_erode":
            bits = binary_erosion(bits, iterations=f.radius)
        elif f.kind == "mask_shift":
            shifted = np.zeros_like(bits)
            h, w = bits.shape
            oh, ow = max(0, h - abs(f.dy)), max(0, w - abs(f.dx))
            if oh and ow:
                ys0, xs0 = max(0, f.dy), max(0, f.dx)
                src_y, src_x = max(0, -f.dy), max(0, -f.dx)
                shifted[ys0:ys0 + oh, xs0:xs0 + ow] = bits[src_y:src_y + oh,
                                                           src_x:src_x + ow]
            bits = shifted
        return BinaryMask(bits), conf


class _DepthBiasGraspStage:
    def __init__(self, inner, bias: float):
        self.inner = inner
        self.bias = bias

    def propose(self, depth, intrinsics, mask):
        from ..grasp import GraspProposal
        out = []
        for p in self.inner.propose(depth, intrinsics, mask):
            approach = p.pose.rotation_matrix()[:, 2]
            shift = self.bias * approach
            from ..geometry import Pose6DOF
            pose = Pose6DOF(p.pose.quaternion, p.pose.translation + shift, p.pose.frame)
            out.append(GraspProposal(pose, p.opening_width, p.score,
                                     p.contact_a + shift, p.contact_b + shift, p.pixel_index))
        return out


def fault_wrap(stage, fault: Fault):
    """Return a stage whose outputs are deterministically corrupted."""
    if fault.kind == "drop_output":
        return _DroppingStage(stage)
    if fault.kind == "wrong_object":
        if not isinstance(stage, OracleDetector):
            raise InvalidInputError("wrong_object fault applies to the oracle detector")
        return _WrongObjectDetector(stage)
    if fault.kind in ("mask_dilate", "mask_erode", "mask_shift"):
        return _MaskFaultSegmenter(stage, fault)
    if fault.kind == "depth_bias":
        return _DepthBiasGraspStage(stage, fault.bias)
    raise InvalidInputError(f"unknown fault {fault.kind!r}")
