"""Part-constrained 6-DOF grasp planning: core geometry, analytic grasp
synthesis, a three-stage pipeline orchestrator, a parametric simulator,
an HTTP stage protocol, and evaluation tooling."""

from .config import PipelineConfig
from .geometry import (
    BinaryMask, BoundingBox, CameraIntrinsics, DepthImage, ImageRGB,
    PointCloud, Pose6DOF, backproject, compose_pose, crop_image,
    embed_mask_full, project,
)
from .grasp import (
    GraspPlan, GraspProposal, GripperModel, build_grasp_plan, estimate_normals,
    mask_filter_grasps, sample_antipodal_grasps, select_top_grasp,
)
from .pipeline import (
    FailureAttribution, GraspRequest, PipelineError, PipelineResult,
    PromptPair, Stage, StageTimings, run_pipeline,
)

__version__ = "0.1.0"
