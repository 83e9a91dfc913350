from .schema import (
    DetectRequest, DetectResponse, ErrorEnvelope, GraspRequestBody,
    GraspResponse, SegmentRequest, SegmentResponse, StageEndpoint,
)
from .client import RemoteDetector, RemoteGraspStage, RemoteSegmenter, probe_health
from .server import create_app, serve_mock

__all__ = [
    "DetectRequest", "DetectResponse", "ErrorEnvelope", "GraspRequestBody",
    "GraspResponse", "SegmentRequest", "SegmentResponse", "StageEndpoint",
    "RemoteDetector", "RemoteGraspStage", "RemoteSegmenter", "probe_health",
    "create_app", "serve_mock",
]
