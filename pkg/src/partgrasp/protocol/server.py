"""FastAPI app implementing the stage wire schema over in-process stage
backends, plus a threaded uvicorn runner for tests and the CLI."""

from __future__ import annotations

import threading
import time

import uvicorn
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..errors import InvalidInputError, NoGraspFoundError, NotFoundError, PartGraspError
from ..geometry import BoundingBox
from . import codec
from .schema import (
    DetectRequest, DetectResponse, GraspBody, GraspRequestBody, GraspResponse,
    HealthResponse, IntrinsicsBody, PoseBody, SegmentRequest, SegmentResponse,
)
from ..geometry import CameraIntrinsics


def _error_response(code: str, message: str, status: int) -> JSONResponse:
    return JSONResponse({"error": {"code": code, "message": message}}, status_code=status)


def create_app(detector=None, segmenter=None, grasper=None, stage_label: str | None = None) -> FastAPI:
    """Build the stage service app; any subset of the three backends may be
    bound, the rest answer not_found."""
    app = FastAPI(title="partgrasp stage service")
    if stage_label is None:
        bound = [n for n, s in (("detect", detector), ("segment", segmenter),
                                ("grasp", grasper)) if s is not None]
        stage_label = bound[0] if len(bound) == 1 else "all"

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error_response("bad_request", str(exc.errors()[:1]), 400)

    @app.exception_handler(PartGraspError)
    async def _domain_handler(request: Request, exc: PartGraspError):
        if isinstance(exc, (NotFoundError, NoGraspFoundError)):
            return _error_response("not_found", str(exc), 404)
        if isinstance(exc, InvalidInputError):
            return _error_response("bad_request", str(exc), 400)
        return _error_response("internal", str(exc), 500)

    @app.get("/v1/health")
    def health() -> HealthResponse:
        return HealthResponse(status="ok", stage=stage_label)

    @app.post("/v1/detect")
    def detect(body: DetectRequest) -> DetectResponse:
        if detector is None:
            raise NotFoundError("no detector bound to this server")
        image = codec.decode_rgb(body.image_png_b64)
        bbox, score = detector.detect(image, body.prompt)
        if score < body.threshold:
            raise NotFoundError(f"no detection above threshold {body.threshold}")
        return DetectResponse(bbox=[bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max],
                              score=float(score))

    @app.post("/v1/segment")
    def segment(body: SegmentRequest) -> SegmentResponse:
        if segmenter is None:
            raise NotFoundError("no segmenter bound to this server")
        image = codec.decode_rgb(body.image_png_b64)
        mask, score = segmenter.segment(image, body.part_prompt)
        return SegmentResponse(mask_png_b64=codec.encode_mask(mask), score=float(score))

    @app.post("/v1/grasp")
    def grasp(body: GraspRequestBody) -> GraspResponse:
        if grasper is None:
            raise NotFoundError("no grasp stage bound to this server")
        depth = codec.decode_depth(body.depth_png_b64)
        mask = codec.decode_mask(body.mask_png_b64)
        intr = CameraIntrinsics(body.intrinsics.fx, body.intrinsics.fy,
                                body.intrinsics.cx, body.intrinsics.cy)
        proposals = grasper.propose(depth, intr, mask)
        grasps = [GraspBody(
            pose=PoseBody(q=[float(v) for v in p.pose.quaternion],
                          t=[float(v) for v in p.pose.translation]),
            width=float(p.opening_width), score=float(p.score),
            contacts=[[float(v) for v in p.contact_a], [float(v) for v in p.contact_b]])
            for p in proposals]
        return GraspResponse(grasps=grasps)

    return app


class MockServerHandle:
    """Threaded uvicorn server with graceful shutdown."""

    def __init__(self, server: uvicorn.Server, thread: threading.Thread, port: int):
        self._server = server
        self._thread = thread
        self.port = port

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def serve_mock(detector=None, segmenter=None, grasper=None,
               host: str = "127.0.0.1", port: int = 0,
               stage_label: str | None = None) -> MockServerHandle:
    """Start the stage service in a background thread; port 0 picks a free
    port. Returns a handle exposing base_url and stop()."""
    app = create_app(detector, segmenter, grasper, stage_label)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline or not thread.is_alive():
            raise PartGraspError("mock server failed to start")
        time.sleep(0.01)
    bound_port = server.servers[0].sockets[0].getsockname()[1]
    return MockServerHandle(server, thread, bound_port)
