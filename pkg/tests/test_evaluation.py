"""Evaluation stack: IoU metric, augmentation family, dataset manifests,
segmentation scoring, trial-log aggregation and flow-diagram export."""

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partgrasp.errors import InvalidInputError, ManifestError
from partgrasp.evaluation.dataset import (
    AUGMENTATION_FAMILY, AugmentationOp, SegSample, apply_augmentation_image,
    apply_augmentation_mask, augment, load_manifest,
)
from partgrasp.evaluation.metrics import compute_iou
from partgrasp.evaluation.sankey import export_sankey
from partgrasp.evaluation.segeval import (
    ObjectScore, aggregate_object_scores, evaluate_segmentation,
    load_object_scores_csv,
)
from partgrasp.evaluation.trials import (
    OUTCOME_ORDER, TrialRecord, aggregate_trials, ingest_trial_log,
)
from partgrasp.geometry import BinaryMask, ImageRGB
from partgrasp.imageio import write_mask_png, write_rgb_png
from partgrasp.sim.classify import OutcomeTaxonomy

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def counting_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Naive per-pixel loop reference."""
    inter = union = 0
    for y in range(a.shape[0]):
        for x in range(a.shape[1]):
            if a[y, x] or b[y, x]:
                union += 1
                if a[y, x] and b[y, x]:
                    inter += 1
    return inter / union if union else 1.0


class TestIoU:
    def test_matches_counting_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            h, w = rng.integers(1, 33, size=2)
            a = rng.random((h, w)) > rng.random()
            b = rng.random((h, w)) > rng.random()
            assert compute_iou(BinaryMask(a), BinaryMask(b)) == counting_iou(a, b)

    def test_identical_masks_score_one(self):
        bits = np.random.default_rng(1).random((8, 8)) > 0.5
        assert compute_iou(BinaryMask(bits), BinaryMask(bits.copy())) == 1.0

    def test_disjoint_masks_score_zero(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[0, 0] = b[3, 3] = True
        assert compute_iou(BinaryMask(a), BinaryMask(b)) == 0.0

    def test_both_empty_scores_one(self):
        empty = BinaryMask(np.zeros((5, 5), dtype=bool))
        assert compute_iou(empty, empty) == 1.0

    def test_dim_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            compute_iou(BinaryMask(np.zeros((4, 4), dtype=bool)),
                        BinaryMask(np.zeros((4, 5), dtype=bool)))


class TestAugmentation:
    def test_family_has_six_members(self):
        assert len(AUGMENTATION_FAMILY) == 6
        assert len({op.label() for op in AUGMENTATION_FAMILY}) == 6
        assert AugmentationOp() in AUGMENTATION_FAMILY

    def test_hflip_is_bit_exact_involution(self):
        rng = np.random.default_rng(2)
        op = AugmentationOp(hflip=True)
        image = ImageRGB(rng.integers(0, 256, size=(15, 21, 3), dtype=np.uint8))
        once = apply_augmentation_image(image, op)
        assert np.array_equal(apply_augmentation_image(once, op).pixels, image.pixels)
        mask = BinaryMask(rng.random((15, 21)) > 0.5)
        flipped = apply_augmentation_mask(mask, op)
        assert np.array_equal(apply_augmentation_mask(flipped, op).bits, mask.bits)

    def test_rotation_preserves_dims(self):
        image = ImageRGB(np.zeros((10, 16, 3), dtype=np.uint8))
        out = apply_augmentation_image(image, AugmentationOp(rotate_deg=10))
        assert (out.width, out.height) == (image.width, image.height)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_identity_op_is_identity(self, seed):
        rng = np.random.default_rng(seed)
        bits = rng.random((6, 9)) > 0.5
        out = apply_augmentation_mask(BinaryMask(bits), AugmentationOp())
        assert np.array_equal(out.bits, bits)


def write_sample_files(root: Path, n: int, size=(12, 16)):
    """Write n tiny image/mask pairs and return manifest entries."""
    rng = np.random.default_rng(42)
    entries = []
    h, w = size
    for i in range(n):
        img = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        bits = np.zeros((h, w), dtype=bool)
        bits[2:2 + 1 + i % 5, 3:3 + 2 + i % 6] = True
        write_rgb_png(ImageRGB(img), root / f"img_{i}.png")
        write_mask_png(BinaryMask(bits), root / f"mask_{i}.png")
        entries.append({
            "image": f"img_{i}.png", "gt_mask": f"mask_{i}.png",
            "object_prompt": f"object {i}", "part_prompt": "part",
            "group": i % 2 == 1, "category": f"cat{i % 3}",
            "object": f"object_{i:02d}",
        })
    return entries


def write_manifest(root: Path, entries, schema_version=1) -> Path:
    path = root / "manifest.json"
    path.write_text(json.dumps({"schema_version": schema_version, "samples": entries}))
    return path


class TestManifests:
    def test_load_resolves_and_validates(self, tmp_path):
        entries = write_sample_files(tmp_path, 3)
        samples = load_manifest(write_manifest(tmp_path, entries))
        assert len(samples) == 3
        assert all(s.image_path.exists() for s in samples)
        assert samples[1].group is True
        assert samples[0].prompt.object_text == "object 0"

    def test_schema_version_enforced(self, tmp_path):
        entries = write_sample_files(tmp_path, 1)
        with pytest.raises(ManifestError):
            load_manifest(write_manifest(tmp_path, entries, schema_version=2))

    def test_missing_key_reported(self, tmp_path):
        entries = write_sample_files(tmp_path, 1)
        del entries[0]["part_prompt"]
        with pytest.raises(ManifestError, match="part_prompt"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_missing_file_reported(self, tmp_path):
        entries = write_sample_files(tmp_path, 1)
        entries[0]["gt_mask"] = "nowhere.png"
        with pytest.raises(ManifestError, match="missing file"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_dim_mismatch_reported(self, tmp_path):
        entries = write_sample_files(tmp_path, 1)
        write_mask_png(BinaryMask(np.zeros((5, 5), dtype=bool)), tmp_path / "mask_0.png")
        with pytest.raises(ManifestError, match="dims"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_augment_expands_sixfold(self, tmp_path):
        entries = write_sample_files(tmp_path, 2)
        samples = load_manifest(write_manifest(tmp_path, entries))
        expanded = [aug for s in samples for aug in augment(s)]
        assert len(expanded) == 12
        with pytest.raises(ManifestError):
            augment(expanded[0])


class TestSegmentationEvaluation:
    def test_oracle_backends_score_perfect(self, tmp_path):
        entries = write_sample_files(tmp_path, 6)
        samples = load_manifest(write_manifest(tmp_path, entries))
        report = evaluate_segmentation(samples)
        assert report.overall_single == pytest.approx(1.0)
        assert report.overall_group == pytest.approx(1.0)
        assert report.failure_count == 0
        assert report.sample_count == 6

    def test_jobs_do_not_change_the_report(self, tmp_path):
        entries = write_sample_files(tmp_path, 6)
        samples = load_manifest(write_manifest(tmp_path, entries))
        serial = evaluate_segmentation(samples)
        parallel = evaluate_segmentation(samples, jobs=4)
        assert serial.to_dict() == parallel.to_dict()

    def test_augment_multiplies_sample_count(self, tmp_path):
        entries = write_sample_files(tmp_path, 2)
        samples = load_manifest(write_manifest(tmp_path, entries))
        report = evaluate_segmentation(samples, augment=True)
        assert report.sample_count == 12

    def test_failing_stage_scores_zero(self, tmp_path):
        entries = write_sample_files(tmp_path, 2)
        samples = load_manifest(write_manifest(tmp_path, entries))

        class Exploding:
            def detect(self, image, object_text):
                raise InvalidInputError("down")

        class Unused:
            def segment(self, image, part_text):  # pragma: no cover
                raise AssertionError

        report = evaluate_segmentation(samples, Exploding(), Unused())
        assert report.failure_count == 2
        assert report.overall_single == 0.0

    def test_report_csv_round_trip(self, tmp_path):
        scores = [ObjectScore("catA", "obj_a", 0.5, 0.25),
                  ObjectScore("catA", "obj_b", 0.75, None),
                  ObjectScore("catB", "obj_c", None, 0.1)]
        report = aggregate_object_scores(scores)
        path = tmp_path / "report.csv"
        report.write_csv(path)
        back = load_object_scores_csv(path)
        # the Averaged footer row comes back as a plain row; drop it
        assert back[-1].category == "Averaged"
        for orig, loaded in zip(scores, back[:-1]):
            assert loaded.category == orig.category
            assert loaded.object_name == orig.object_name
            assert (loaded.single is None) == (orig.single is None)
            if orig.single is not None:
                assert loaded.single == pytest.approx(orig.single, abs=1e-4)

    def test_macro_aggregation(self):
        scores = [ObjectScore("catA", "a", 1.0, None),
                  ObjectScore("catA", "b", 0.0, None),
                  ObjectScore("catB", "c", 0.2, 0.4)]
        report = aggregate_object_scores(scores)
        # category means 0.5 and 0.2; macro mean 0.35; flat mean 0.4
        assert report.overall_single == pytest.approx(0.35)
        assert report.overall_single_per_object == pytest.approx(0.4)
        assert report.category_averages["catB"] == pytest.approx(0.3)


class TestTrialLogs:
    def test_fixture_log_ingests(self):
        records = ingest_trial_log(FIXTURES / "trials_log.csv")
        assert len(records) == 360
        scenarios = {r.scenario for r in records}
        assert scenarios == {"individual", "table_clearing"}

    def test_fixture_reproduces_published_percentages(self):
        report = aggregate_trials(ingest_trial_log(FIXTURES / "trials_log.csv"))
        ind = report.scenarios["individual"]
        assert ind.total == 210
        assert ind.percentage(OutcomeTaxonomy.Success) == 69.52
        assert ind.percentage(OutcomeTaxonomy.WrongPart) == 11.43
        assert ind.correct_part_rate == 88.57
        grp = report.scenarios["table_clearing"]
        assert grp.total == 150
        assert grp.percentage(OutcomeTaxonomy.Success) == 54.67
        assert grp.correct_part_rate == 82.0

    def test_unknown_outcome_reports_line(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("scenario,object,part,orientation_index,outcome,notes\n"
                        "individual,mug,handle,0,Success,\n"
                        "individual,mug,handle,1,Exploded,\n")
        with pytest.raises(ManifestError, match=":3"):
            ingest_trial_log(path)

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("object,outcome\nmug,Success\n")
        with pytest.raises(ManifestError, match="missing columns"):
            ingest_trial_log(path)

    def test_orientation_only_for_individual(self):
        with pytest.raises(ManifestError):
            TrialRecord("mug", "handle", "table_clearing",
                        OutcomeTaxonomy.Success, orientation_index=1)
        with pytest.raises(ManifestError):
            TrialRecord("mug", "handle", "bogus", OutcomeTaxonomy.Success)

    def test_csv_report_layout(self, tmp_path):
        report = aggregate_trials(ingest_trial_log(FIXTURES / "trials_log.csv"))
        path = tmp_path / "trials.csv"
        report.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "outcome,individual,table_clearing"
        assert lines[1] == "Success,69.52,54.67"
        assert len(lines) == 1 + len(OUTCOME_ORDER)


class TestTableOneFixture:
    def test_reproduces_published_averages(self):
        scores = load_object_scores_csv(FIXTURES / "table1_miou.csv")
        report = aggregate_object_scores(scores)
        assert round(report.overall_single, 2) == 0.50
        assert round(report.overall_group, 2) == 0.33
        published = {"Cooking": 0.49, "Fragile": 0.26, "Tools": 0.50,
                     "Knives": 0.48, "Bottles": 0.48, "Mugs": 0.54,
                     "Electronics": 0.49, "Coords": 0.33, "Kitchen": 0.36,
                     "Handles": 0.47, "Buttons": 0.12}
        for category, value in published.items():
            assert report.category_averages[category] == pytest.approx(value, abs=0.01)


class TestSankey:
    def test_counts_are_conserved(self):
        report = aggregate_trials(ingest_trial_log(FIXTURES / "trials_log.csv"))
        doc = export_sankey(report, "individual")
        total = report.scenarios["individual"].total
        roots = [l for l in doc["links"] if l["source"] == "All Trials"]
        assert sum(l["value"] for l in roots) == total
        for root in roots:
            leaves = [l for l in doc["links"] if l["source"] == root["target"]]
            if leaves:
                assert sum(l["value"] for l in leaves) == root["value"]

    def test_unknown_scenario_rejected(self):
        report = aggregate_trials([TrialRecord("mug", "handle", "individual",
                                               OutcomeTaxonomy.Success, 0)])
        with pytest.raises(InvalidInputError):
            export_sankey(report, "table_clearing")
