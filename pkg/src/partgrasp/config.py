"""Pipeline configuration: one JSON document of thresholds, tolerances,
gripper parameters, stage endpoints and timeouts.

Every key can be overridden by an environment variable of the form
PARTGRASP_<KEY> (upper-cased field name), and flags win over both.

Keys, defaults and units:
    detector_threshold      0.3     minimum detector confidence
    pixel_tolerance         2       px, mask filter Chebyshev tolerance
    depth_tolerance         0.02    m, mask filter depth agreement
    max_opening             0.08    m, gripper jaw opening
    finger_depth            0.04    m
    friction_half_angle_deg 20.0    degrees
    sample_budget           2000    antipodal pair candidates per request
    normal_neighbors        10      k for normal estimation
    max_cloud_points        800     deterministic subsample cap
    rng_seed                0       sampler seed
    stage_timeout_ms        10000   remote stage timeout
    health_probe            false   probe /v1/health before running
    detect_endpoint         ""      base URL for a remote detector
    segment_endpoint        ""      base URL for a remote segmenter
    grasp_endpoint          ""      base URL for a remote grasp stage
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidInputError

ENV_PREFIX = "PARTGRASP_"


@dataclass
class PipelineConfig:
    detector_threshold: float = 0.3
    pixel_tolerance: int = 2
    depth_tolerance: float = 0.02
    max_opening: float = 0.08
    finger_depth: float = 0.04
    friction_half_angle_deg: float = 20.0
    sample_budget: int = 2000
    normal_neighbors: int = 10
    max_cloud_points: int = 800
    rng_seed: int = 0
    stage_timeout_ms: int = 10000
    health_probe: bool = False
    detect_endpoint: str = ""
    segment_endpoint: str = ""
    grasp_endpoint: str = ""

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "PipelineConfig":
        """File values override defaults; PARTGRASP_* env vars override both."""
        values: dict = {}
        if path is not None:
            try:
                values.update(json.loads(Path(path).read_text()))
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidInputError(f"cannot load config {path}: {exc}") from exc
        env = os.environ if env is None else env
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for name, f in fields.items():
            var = ENV_PREFIX + name.upper()
            if var in env:
                values[name] = env[var]
        unknown = set(values) - set(fields)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        coerced = {}
        for name, raw in values.items():
            ftype = fields[name].type
            if ftype in ("bool", bool):
                coerced[name] = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
            elif ftype in ("int", int):
                coerced[name] = int(raw)
            elif ftype in ("float", float):
                coerced[name] = float(raw)
            else:
                coerced[name] = str(raw)
        return cls(**coerced)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)
