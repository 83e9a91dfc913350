from .scenes import ObjectSpec, SceneSpec, load_scene, random_scene, save_scene
from .render import RenderOutput, raycast_render
from .oracle import (
    OracleDetector,
    OracleGraspStage,
    OracleSegmenter,
    ground_truth_bbox,
    ground_truth_mask,
)
from .faults import fault_wrap
from .classify import OutcomeTaxonomy, classify_sim_trial

__all__ = [
    "ObjectSpec", "SceneSpec", "load_scene", "random_scene", "save_scene",
    "RenderOutput", "raycast_render",
    "OracleDetector", "OracleGraspStage", "OracleSegmenter",
    "ground_truth_bbox", "ground_truth_mask",
    "fault_wrap", "OutcomeTaxonomy", "classify_sim_trial",
]
