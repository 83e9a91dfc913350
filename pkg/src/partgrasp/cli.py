"""Operator command line: grasp prediction on stored RGB-D inputs, scene
generation, simulated trial campaigns, segmentation evaluation, trial-log
reports, and a mock stage server.

Exit status: 0 success, 1 usage error, 2 pipeline failure (attribution
printed), 3 I/O error.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from .config import PipelineConfig
from .errors import ManifestError, PartGraspError
from .campaign import campaign_config, parse_fault_specs, run_campaign
from .evaluation.dataset import load_manifest
from .evaluation.sankey import write_sankey
from .evaluation.segeval import evaluate_segmentation
from .evaluation.trials import SCENARIOS, aggregate_trials, ingest_trial_log
from .imageio import (
    read_depth_png, read_intrinsics, read_rgb_png, write_depth_png,
    write_intrinsics, write_mask_png, write_rgb_png,
)
from .pipeline import GraspRequest, PipelineError, PromptPair, run_pipeline
from .protocol.client import RemoteDetector, RemoteGraspStage, RemoteSegmenter, probe_health
from .protocol.schema import StageEndpoint
from .protocol.server import serve_mock
from .sim.oracle import OracleDetector, OracleGraspStage, OracleSegmenter
from .sim.render import raycast_render
from .sim.scenes import load_scene, random_scene, save_scene, scene_to_dict


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _load_config(path: str | None) -> PipelineConfig:
    return PipelineConfig.load(path) if path else PipelineConfig.load(None)


def _pose_doc(pose) -> dict:
    return {"q": [float(v) for v in pose.quaternion],
            "t": [float(v) for v in pose.translation], "frame": pose.frame}


@click.group()
def cli() -> None:
    """Part-constrained grasp planning toolkit."""


@cli.command("grasp")
@click.option("--rgb", "rgb_path", required=True, help="RGB PNG input.")
@click.option("--depth", "depth_path", required=True, help="16-bit millimeter depth PNG.")
@click.option("--intrinsics", "intrinsics_path", required=True, help="Camera intrinsics JSON.")
@click.option("--object", "object_text", required=True, help="Object prompt text.")
@click.option("--part", "part_text", required=True, help="Part prompt text.")
@click.option("--config", "config_path", default=None, help="Pipeline config JSON.")
@click.option("--backends", type=click.Choice(["oracle", "remote"]), default="oracle",
              show_default=True, help="Stage backends to run against.")
@click.option("--scene", "scene_path", default=None,
              help="Scene JSON providing oracle ground truth (oracle backends only).")
@click.option("--out", "out_path", default=None, help="Write the plan document here.")
@click.option("--dry-run", is_flag=True, help="Run without writing any files.")
def grasp_cmd(rgb_path, depth_path, intrinsics_path, object_text, part_text,
              config_path, backends, scene_path, out_path, dry_run) -> None:
    """Predict a grasp plan for an (object, part) prompt on stored RGB-D."""
    config = _load_config(config_path)
    rgb = read_rgb_png(rgb_path)
    depth = read_depth_png(depth_path)
    intrinsics, _width, _height = read_intrinsics(intrinsics_path)

    if backends == "oracle":
        if scene_path is None:
            raise click.UsageError("--backends oracle requires --scene for ground truth")
        scene = load_scene(scene_path)
        render = raycast_render(scene)
        detector = OracleDetector(render, scene)
        segmenter = OracleSegmenter(render, scene)
        grasper = OracleGraspStage(config)
        camera_pose = scene.camera_pose
    else:
        endpoints = {
            "detect": config.detect_endpoint, "segment": config.segment_endpoint,
            "grasp": config.grasp_endpoint,
        }
        missing = [k for k, v in endpoints.items() if not v]
        if missing:
            raise click.UsageError(f"remote backends need endpoints for: {', '.join(missing)}")
        timeout = config.stage_timeout_ms
        detect_ep = StageEndpoint(endpoints["detect"], timeout, "detect")
        segment_ep = StageEndpoint(endpoints["segment"], timeout, "segment")
        grasp_ep = StageEndpoint(endpoints["grasp"], timeout, "grasp")
        if config.health_probe:
            for ep in (detect_ep, segment_ep, grasp_ep):
                probe_health(ep)
        detector = RemoteDetector(detect_ep, config.detector_threshold)
        segmenter = RemoteSegmenter(segment_ep)
        grasper = RemoteGraspStage(grasp_ep)
        camera_pose = None
        if scene_path is not None:
            camera_pose = load_scene(scene_path).camera_pose

    request = GraspRequest(rgb, depth, intrinsics, PromptPair(object_text, part_text),
                           camera_pose)
    result = run_pipeline(request, detector, segmenter, grasper, config)

    mask_path = None
    if out_path and not dry_run:
        mask_path = str(Path(out_path).with_suffix(".mask.png"))
        write_mask_png(result.part_mask_full, mask_path)
    doc = {
        "plan": {
            "frame": result.plan.frame,
            "pre_grasp": _pose_doc(result.plan.pre_grasp),
            "grasp": _pose_doc(result.plan.grasp),
            "post_grasp": _pose_doc(result.plan.post_grasp),
        },
        "selected": {
            "width": float(result.selected.opening_width),
            "score": float(result.selected.score),
            "contacts": [[float(v) for v in result.selected.contact_a],
                         [float(v) for v in result.selected.contact_b]],
        },
        "bbox": [result.bbox.x_min, result.bbox.y_min, result.bbox.x_max, result.bbox.y_max],
        "timings_ms": {
            "detect": result.timings.detect_ms, "segment": result.timings.segment_ms,
            "grasp": result.timings.grasp_ms, "overhead": result.timings.overhead_ms,
            "total": result.timings.total_ms,
        },
        "part_mask_path": mask_path,
    }
    text = json.dumps(doc, indent=2)
    if out_path and not dry_run:
        Path(out_path).write_text(text + "\n")
    click.echo(text)


@cli.command("simulate")
@click.option("--scenes", "n_scenes", type=int, required=True, help="Number of trial scenes.")
@click.option("--objects", "n_objects", type=click.IntRange(1, 5), default=1,
              show_default=True, help="Objects per scene.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--faults", "faults_text", default="",
              help="Fault spec, e.g. 'wrong_object:0.1;mask_shift(8,0)'.")
@click.option("--config", "config_path", default=None, help="Pipeline config JSON.")
@click.option("--report", "report_dir", default=None, help="Report output directory.")
@click.option("--jobs", type=int, default=_default_jobs, help="Worker bound (default: cores).")
@click.option("--dry-run", is_flag=True, help="Run without writing any files.")
def simulate_cmd(n_scenes, n_objects, seed, faults_text, config_path, report_dir,
                 jobs, dry_run) -> None:
    """Run a simulated grasp-trial campaign and write its report."""
    del jobs  # rendering and sampling are vectorized; flag bounds nothing further
    config = PipelineConfig.load(config_path) if config_path else campaign_config()
    fault_specs = parse_fault_specs(faults_text) if faults_text else None
    report = run_campaign(n_scenes, n_objects, seed, fault_specs, config)
    scenario = "individual" if n_objects == 1 else "table_clearing"
    if report_dir and not dry_run:
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.trial_report.write_json(out / "trials.json")
        report.trial_report.write_csv(out / "trials.csv")
        write_sankey(report.trial_report, scenario, out / "sankey.json")
    stats = report.trial_report.scenarios.get(scenario)
    counts = {o.value: n for o, n in stats.counts.items()} if stats else {}
    for stage, n in sorted(report.error_counts.items()):
        counts[f"ERR:{stage}"] = n
    click.echo(json.dumps({"scenario": scenario, "trials": n_scenes, "outcomes": counts}))


@cli.command("eval-seg")
@click.option("--manifest", "manifest_path", required=True, help="Dataset manifest JSON.")
@click.option("--backends", type=click.Choice(["oracle", "remote"]), default="oracle",
              show_default=True)
@click.option("--config", "config_path", default=None, help="Pipeline config JSON.")
@click.option("--augment", is_flag=True, help="Expand samples with the augmentation family.")
@click.option("--report", "report_dir", default=None, help="Report output directory.")
@click.option("--jobs", type=int, default=_default_jobs, help="Worker bound (default: cores).")
@click.option("--dry-run", is_flag=True, help="Run without writing any files.")
def eval_seg_cmd(manifest_path, backends, config_path, augment, report_dir,
                 jobs, dry_run) -> None:
    """Evaluate detector + segmenter mIoU over a dataset manifest."""
    config = _load_config(config_path)
    samples = load_manifest(manifest_path)
    if backends == "remote":
        missing = [k for k, v in (("detect", config.detect_endpoint),
                                  ("segment", config.segment_endpoint)) if not v]
        if missing:
            raise click.UsageError(f"remote backends need endpoints for: {', '.join(missing)}")
        timeout = config.stage_timeout_ms
        detector = RemoteDetector(StageEndpoint(config.detect_endpoint, timeout, "detect"),
                                  config.detector_threshold)
        segmenter = RemoteSegmenter(StageEndpoint(config.segment_endpoint, timeout, "segment"))
    else:
        detector = segmenter = None
    seg_report = evaluate_segmentation(samples, detector, segmenter,
                                       augment=augment, jobs=jobs)
    if report_dir and not dry_run:
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        seg_report.write_json(out / "segmentation.json")
        seg_report.write_csv(out / "segmentation.csv")
    click.echo(json.dumps({
        "samples": seg_report.sample_count,
        "overall_single": seg_report.overall_single,
        "overall_group": seg_report.overall_group,
    }))


@cli.command("trials-report")
@click.option("--log", "log_path", required=True, help="Trial log CSV.")
@click.option("--report", "report_dir", required=True, help="Report output directory.")
@click.option("--dry-run", is_flag=True, help="Run without writing any files.")
def trials_report_cmd(log_path, report_dir, dry_run) -> None:
    """Aggregate a recorded trial log into percentage tables and Sankey data."""
    records = ingest_trial_log(log_path)
    report = aggregate_trials(records)
    if not dry_run:
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_json(out / "trials.json")
        report.write_csv(out / "trials.csv")
        for scenario in SCENARIOS:
            if scenario in report.scenarios:
                write_sankey(report, scenario, out / f"sankey_{scenario}.json")
    summary = {s: {o.value: n for o, n in stats.counts.items()}
               for s, stats in report.scenarios.items()}
    click.echo(json.dumps(summary))


@cli.command("gen-scenes")
@click.option("--out", "out_dir", required=True, help="Scene output directory.")
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--objects", "n_objects", type=click.IntRange(1, 5), default=1,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--width", type=int, default=640, show_default=True)
@click.option("--height", type=int, default=480, show_default=True)
@click.option("--dry-run", is_flag=True, help="Run without writing any files.")
def gen_scenes_cmd(out_dir, count, n_objects, seed, width, height, dry_run) -> None:
    """Generate random scenes and their rendered RGB-D ground-truth layers."""
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    if not dry_run:
        out.mkdir(parents=True, exist_ok=True)
    names = []
    for i in range(count):
        scene = random_scene(int(rng.integers(2 ** 31)), n_objects, width, height)
        render = raycast_render(scene)
        stem = f"scene_{i:03d}"
        if not dry_run:
            save_scene(scene, out / f"{stem}.json")
            write_rgb_png(render.rgb, out / f"{stem}_rgb.png")
            write_depth_png(render.depth, out / f"{stem}_depth.png")
            write_intrinsics(scene.intrinsics, width, height, out / f"{stem}_intrinsics.json")
            np.save(out / f"{stem}_instance.npy", render.instance_map)
            np.save(out / f"{stem}_parts.npy", render.part_map)
        names.append({"scene": stem,
                      "objects": [o.display_name for o in scene.objects]})
    click.echo(json.dumps(names))


@cli.command("serve-mock")
@click.option("--listen", default="127.0.0.1:8088", show_default=True,
              help="host:port to bind.")
@click.option("--scene", "scene_path", required=True,
              help="Scene JSON backing the oracle stages.")
@click.option("--config", "config_path", default=None, help="Pipeline config JSON.")
def serve_mock_cmd(listen, scene_path, config_path) -> None:
    """Serve oracle-backed detect/segment/grasp stages over HTTP."""
    try:
        host, port_text = listen.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    config = _load_config(config_path)
    scene = load_scene(scene_path)
    render = raycast_render(scene)
    handle = serve_mock(OracleDetector(render, scene), OracleSegmenter(render, scene),
                        OracleGraspStage(config), host=host, port=port)
    click.echo(json.dumps({"listening": handle.base_url}))
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        handle.stop()


def main(argv: list[str] | None = None) -> int:
    """Entry point mapping exceptions onto the documented exit statuses."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        return 1
    except PipelineError as exc:
        att = exc.attribution
        click.echo(f"FAIL stage={att.stage.value}: {att.detail}", err=True)
        return 2
    except (OSError, ManifestError) as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return 3
    except PartGraspError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
