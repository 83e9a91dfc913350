from .metrics import compute_iou
from .dataset import AugmentationOp, SegSample, augment, load_manifest
from .segeval import ObjectScore, SegReport, aggregate_object_scores, evaluate_segmentation
from .trials import TrialRecord, TrialReport, aggregate_trials, ingest_trial_log
from .sankey import export_sankey

__all__ = [
    "compute_iou", "AugmentationOp", "SegSample", "augment", "load_manifest",
    "ObjectScore", "SegReport", "aggregate_object_scores", "evaluate_segmentation",
    "TrialRecord", "TrialReport", "aggregate_trials", "ingest_trial_log",
    "export_sankey",
]
