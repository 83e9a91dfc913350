"""Regenerate the golden wire-protocol fixtures.

Renders a small deterministic scene, builds one request per stage endpoint,
posts each to the in-process mock server, and stores the exact request and
response JSON bodies. Run from the repository root:

    python3 fixtures/protocol/regenerate.py
"""

from __future__ import annotations

import json
from pathlib import Path

import httpx

from partgrasp.campaign import campaign_config
from partgrasp.geometry import crop_image
from partgrasp.imageio import depth_to_millimeters
from partgrasp.protocol import codec
from partgrasp.protocol.server import serve_mock
from partgrasp.sim.oracle import (
    OracleDetector, OracleGraspStage, OracleSegmenter, ground_truth_bbox,
    ground_truth_mask, part_mask_full,
)
from partgrasp.sim.render import raycast_render
from partgrasp.sim.scenes import (
    SceneSpec, default_camera_pose, default_intrinsics, make_bottle,
)
from partgrasp.geometry import DepthImage

OUT = Path(__file__).resolve().parent


def main() -> None:
    scene = SceneSpec((make_bottle("red", 0.0, 0.0, 0.0),), default_camera_pose(),
                      default_intrinsics(160, 120), 160, 120)
    render = raycast_render(scene)
    # quantize depth to wire precision so stored fixtures round-trip exactly
    depth = DepthImage(depth_to_millimeters(render.depth) / 1000.0)
    config = campaign_config()

    detect_request = {
        "image_png_b64": codec.encode_rgb(render.rgb),
        "prompt": "red bottle",
        "threshold": 0.3,
    }
    bbox = ground_truth_bbox(render, scene, "red bottle")
    crop = crop_image(render.rgb, bbox)
    segment_request = {
        "image_png_b64": codec.encode_rgb(crop),
        "part_prompt": "cap",
    }
    intr = scene.intrinsics
    mask = part_mask_full(render, scene, "red bottle", "cap")
    grasp_request = {
        "depth_png_b64": codec.encode_depth(depth),
        "intrinsics": {"fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy},
        "mask_png_b64": codec.encode_mask(mask),
    }
    bad_detect_request = {
        "image_png_b64": detect_request["image_png_b64"],
        "prompt": "purple teapot",
        "threshold": 0.3,
    }

    with serve_mock(OracleDetector(render, scene), OracleSegmenter(render, scene),
                    OracleGraspStage(config)) as handle:
        with httpx.Client(base_url=handle.base_url, timeout=30.0) as client:
            pairs = {
                "detect": ("/v1/detect", detect_request),
                "segment": ("/v1/segment", segment_request),
                "grasp": ("/v1/grasp", grasp_request),
                "detect_notfound": ("/v1/detect", bad_detect_request),
            }
            for name, (route, body) in pairs.items():
                response = client.post(route, json=body)
                (OUT / f"{name}_request.json").write_text(
                    json.dumps(body, indent=2) + "\n")
                (OUT / f"{name}_response.json").write_text(
                    json.dumps({"status": response.status_code,
                                "body": response.json()}, indent=2) + "\n")
                print(name, response.status_code)


if __name__ == "__main__":
    main()
