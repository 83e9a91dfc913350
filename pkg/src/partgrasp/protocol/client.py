"""HTTP clients presenting remote stage services through the in-process
stage interfaces. Network failures and timeouts surface as TransportError
(pipeline attribution: Transport); structured error envelopes map to the
stage-level not-found errors."""

from __future__ import annotations

import numpy as np
import httpx

from ..errors import InvalidInputError, NotFoundError, ProtocolError, TransportError
from ..geometry import BinaryMask, BoundingBox, CameraIntrinsics, DepthImage, ImageRGB, Pose6DOF
from ..grasp import GraspProposal
from . import codec
from .schema import (
    DetectRequest, DetectResponse, GraspRequestBody, GraspResponse,
    IntrinsicsBody, SegmentRequest, SegmentResponse, StageEndpoint,
)


def _post(endpoint: StageEndpoint, path: str, payload: dict) -> dict:
    url = endpoint.base_url.rstrip("/") + path
    try:
        resp = httpx.post(url, json=payload, timeout=endpoint.timeout_ms / 1000.0)
    except httpx.TimeoutException as exc:
        raise TransportError(f"timeout talking to {url}: {exc}") from exc
    except httpx.HTTPError as exc:
        raise TransportError(f"transport failure talking to {url}: {exc}") from exc
    if resp.status_code >= 300:
        try:
            detail = resp.json()["error"]
            code, message = detail["code"], detail["message"]
        except Exception:
            raise TransportError(f"{url}: HTTP {resp.status_code} without error envelope")
        if code == "not_found":
            raise NotFoundError(message)
        if code == "timeout":
            raise TransportError(message)
        raise ProtocolError(code, message)
    return resp.json()


def probe_health(endpoint: StageEndpoint) -> dict:
    url = endpoint.base_url.rstrip("/") + "/v1/health"
    try:
        resp = httpx.get(url, timeout=endpoint.timeout_ms / 1000.0)
        resp.raise_for_status()
        return resp.json()
    except httpx.HTTPError as exc:
        raise TransportError(f"health probe failed for {url}: {exc}") from exc


class RemoteDetector:
    def __init__(self, endpoint: StageEndpoint, threshold: float = 0.3):
        self.endpoint = endpoint
        self.threshold = threshold

    def detect(self, image: ImageRGB, object_text: str) -> tuple[BoundingBox, float]:
        req = DetectRequest(image_png_b64=codec.encode_rgb(image), prompt=object_text,
                            threshold=self.threshold)
        body = DetectResponse.model_validate(_post(self.endpoint, "/v1/detect", req.model_dump()))
        x0, y0, x1, y1 = body.bbox
        return BoundingBox(x0, y0, x1, y1), body.score


class RemoteSegmenter:
    def __init__(self, endpoint: StageEndpoint):
        self.endpoint = endpoint

    def segment(self, image: ImageRGB, part_text: str) -> tuple[BinaryMask, float]:
        req = SegmentRequest(image_png_b64=codec.encode_rgb(image), part_prompt=part_text)
        body = SegmentResponse.model_validate(_post(self.endpoint, "/v1/segment", req.model_dump()))
        return codec.decode_mask(body.mask_png_b64), body.score


class RemoteGraspStage:
    def __init__(self, endpoint: StageEndpoint):
        self.endpoint = endpoint

    def propose(self, depth: DepthImage, intrinsics: CameraIntrinsics,
                mask: BinaryMask) -> list[GraspProposal]:
        req = GraspRequestBody(
            depth_png_b64=codec.encode_depth(depth),
            intrinsics=IntrinsicsBody(fx=intrinsics.fx, fy=intrinsics.fy,
                                      cx=intrinsics.cx, cy=intrinsics.cy),
            mask_png_b64=codec.encode_mask(mask))
        body = GraspResponse.model_validate(_post(self.endpoint, "/v1/grasp", req.model_dump()))
        proposals = []
        for i, g in enumerate(body.grasps):
            pose = Pose6DOF(np.array(g.pose.q), np.array(g.pose.t), "camera")
            # wire order is the canonical ranking; keep it stable via the index
            proposals.append(GraspProposal(pose, g.width, g.score,
                                           np.array(g.contacts[0]), np.array(g.contacts[1]), i))
        return proposals
