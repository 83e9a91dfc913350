"""Published JSON wire schema for the three stage services.

All request/response bodies are UTF-8 JSON. Images travel as base64 PNGs:
8-bit RGB for color, 16-bit unsigned millimeters for depth, 8-bit gray
(0/255) for masks. Non-2xx responses carry the error envelope
{"error": {"code", "message"}} with code in
{not_found, bad_request, internal, timeout}.
"""

from __future__ import annotations

from dataclasses import dataclass

from pydantic import BaseModel, Field

from ..errors import InvalidInputError


@dataclass(frozen=True)
class StageEndpoint:
    base_url: str
    timeout_ms: int = 10000
    stage_kind: str = ""

    def __post_init__(self):
        if not (self.base_url.startswith("http://") or self.base_url.startswith("https://")):
            raise InvalidInputError(f"malformed endpoint URL {self.base_url!r}")
        if self.timeout_ms <= 0:
            raise InvalidInputError("timeout must be positive")


class DetectRequest(BaseModel):
    image_png_b64: str
    prompt: str
    threshold: float = 0.3


class DetectResponse(BaseModel):
    bbox: list[int] = Field(min_length=4, max_length=4)  # [x_min, y_min, x_max, y_max]
    score: float


class SegmentRequest(BaseModel):
    image_png_b64: str
    part_prompt: str


class SegmentResponse(BaseModel):
    mask_png_b64: str
    score: float


class IntrinsicsBody(BaseModel):
    fx: float
    fy: float
    cx: float
    cy: float


class GraspRequestBody(BaseModel):
    depth_png_b64: str
    intrinsics: IntrinsicsBody
    mask_png_b64: str


class PoseBody(BaseModel):
    q: list[float] = Field(min_length=4, max_length=4)  # (w, x, y, z)
    t: list[float] = Field(min_length=3, max_length=3)


class GraspBody(BaseModel):
    pose: PoseBody
    width: float
    score: float
    contacts: list[list[float]] = Field(min_length=2, max_length=2)


class GraspResponse(BaseModel):
    grasps: list[GraspBody]


class ErrorDetail(BaseModel):
    code: str  # not_found | bad_request | internal | timeout
    message: str


class ErrorEnvelope(BaseModel):
    error: ErrorDetail


class HealthResponse(BaseModel):
    status: str
    stage: str
