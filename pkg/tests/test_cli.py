import json

import numpy as np
import pytest
from PIL import Image

from flowerseg import RasterImage, SegMask, load_mask, save_mask
from flowerseg.cli import format_stats_table, main
from flowerseg.evaluation import dataset_stats


@pytest.fixture()
def flower_scene(tmp_path):
    """Small orchard-like scene: near-white blobs on textured green,
    with its exact ground truth. The HSV box (low saturation) selects
    the blobs precisely."""
    rng = np.random.default_rng(21)
    h, w = 48, 64
    arr = np.zeros((h, w, 3), dtype=np.uint8)
    arr[..., 0] = rng.integers(10, 60, (h, w))
    arr[..., 1] = rng.integers(120, 200, (h, w))
    arr[..., 2] = rng.integers(10, 60, (h, w))
    truth = np.zeros((h, w), dtype=bool)
    for cy, cx in ((12, 16), (30, 40), (38, 10)):
        yy, xx = np.mgrid[0:h, 0:w]
        blob = (yy - cy) ** 2 + (xx - cx) ** 2 <= 36
        truth |= blob
    arr[truth] = (250, 248, 246)
    img_path = tmp_path / "scene.png"
    Image.fromarray(arr).save(img_path)
    truth_dir = tmp_path / "truth"
    truth_dir.mkdir()
    save_mask(SegMask(truth.astype(np.uint8)), truth_dir / "scene.png")
    return img_path, truth_dir, truth


HSV_FLAGS = ["--sat-hi", "0.2", "--val-lo", "0.5"]


class TestSegment:
    def test_single_tile_image(self, tmp_path, flower_scene, rgr_warmup):
        img_path, _, truth = flower_scene
        out = tmp_path / "out"
        code = main(
            ["segment", str(img_path), "--tile-size", "64", "--out-dir", str(out), *HSV_FLAGS]
        )
        assert code == 0
        mask = load_mask(out / "scene.mask.png")
        assert np.array_equal(mask.values.astype(bool), truth)

    def test_threshold_only_equals_theta_zero(self, tmp_path, flower_scene, rgr_warmup):
        img_path, _, _ = flower_scene
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        common = ["segment", str(img_path), "--tile-size", "32", *HSV_FLAGS]
        assert main([*common, "--theta", "0", "--out-dir", str(out_a)]) == 0
        assert main([*common, "--threshold-only", "--out-dir", str(out_b)]) == 0
        assert (out_a / "scene.mask.png").read_bytes() == (out_b / "scene.mask.png").read_bytes()

    def test_overlay_and_scores_outputs(self, tmp_path, flower_scene, rgr_warmup):
        img_path, truth_dir, _ = flower_scene
        out = tmp_path / "out"
        code = main([
            "segment", str(img_path), "--tile-size", "32", "--out-dir", str(out),
            "--overlay", "--truth-dir", str(truth_dir), "--save-scores", *HSV_FLAGS,
        ])
        assert code == 0
        assert (out / "scene.mask.png").is_file()
        overlay = np.asarray(Image.open(out / "scene.overlay.png"))
        assert overlay.shape == (48, 64, 3)
        from flowerseg import read_scoremap_pair

        raw_fg, raw_bg = read_scoremap_pair(out / "scene.scores.bsgs")
        assert raw_fg.width == 64 and raw_fg.height == 48
        assert set(np.unique(raw_fg.values)) <= {0.0, 1.0}

    def test_deterministic_across_runs_and_workers(self, tmp_path, flower_scene, rgr_warmup):
        img_path, _, _ = flower_scene
        blobs = []
        for tag, workers in (("r1", 1), ("r2", 1), ("r3", 4)):
            out = tmp_path / tag
            code = main([
                "segment", str(img_path), "--tile-size", "32", "--seed", "7",
                "--workers", str(workers), "--out-dir", str(out), *HSV_FLAGS,
            ])
            assert code == 0
            blobs.append((out / "scene.mask.png").read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]

    def test_invalid_workers_fails(self, tmp_path, flower_scene):
        img_path, _, _ = flower_scene
        assert main(["segment", str(img_path), "--workers", "0"]) == 1

    def test_wall_time_scales_roughly_with_pixels(self, tmp_path, rgr_warmup):
        # smoke check, not a hard bound: 4x the pixels should cost far
        # less than 12x the time
        import time

        rng = np.random.default_rng(50)
        durations = []
        for tag, (h, w) in (("small", (240, 320)), ("big", (480, 640))):
            arr = np.zeros((h, w, 3), dtype=np.uint8)
            arr[..., 1] = rng.integers(100, 220, (h, w))
            arr[h // 3 : h // 3 + 20, w // 3 : w // 3 + 20] = (250, 248, 250)
            img_path = tmp_path / f"{tag}.png"
            Image.fromarray(arr).save(img_path)
            started = time.monotonic()
            assert main([
                "segment", str(img_path), "--tile-size", "155",
                "--out-dir", str(tmp_path / tag), *HSV_FLAGS,
            ]) == 0
            durations.append(time.monotonic() - started)
        assert durations[1] < 12 * max(durations[0], 0.05)


def write_mask(dirpath, name, values):
    dirpath.mkdir(parents=True, exist_ok=True)
    save_mask(SegMask(values.astype(np.uint8)), dirpath / name)


class TestEvaluate:
    def test_identical_dirs_score_one(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        mask = (rng.random((20, 20)) < 0.4).astype(np.uint8)
        write_mask(tmp_path / "pred", "a.png", mask)
        write_mask(tmp_path / "truth", "a.png", mask)
        code = main([
            "evaluate", "--pred-dir", str(tmp_path / "pred"),
            "--truth-dir", str(tmp_path / "truth"), "--out-dir", str(tmp_path / "out"),
        ])
        assert code == 0
        payload = json.loads((tmp_path / "out" / "evaluation.json").read_text())
        assert payload["aggregate"]["f1"] == 1.0
        assert payload["images"]["a"]["iou"] == 1.0

    def test_disjoint_masks_score_zero_iou(self, tmp_path):
        a = np.zeros((10, 10), dtype=np.uint8)
        b = np.zeros((10, 10), dtype=np.uint8)
        a[:5] = 1
        b[5:] = 1
        write_mask(tmp_path / "pred", "x.png", a)
        write_mask(tmp_path / "truth", "x.png", b)
        code = main([
            "evaluate", "--pred-dir", str(tmp_path / "pred"),
            "--truth-dir", str(tmp_path / "truth"), "--out-dir", str(tmp_path / "out"),
        ])
        assert code == 0
        payload = json.loads((tmp_path / "out" / "evaluation.json").read_text())
        assert payload["aggregate"]["iou"] == 0.0

    def test_quarter_overlap_fixture(self, tmp_path):
        pred = np.zeros((20, 20), dtype=np.uint8)
        truth = np.zeros((20, 20), dtype=np.uint8)
        pred[0:5, 0:10] = 1
        truth[0:5, 5:15] = 1
        write_mask(tmp_path / "pred", "x.png", pred)
        write_mask(tmp_path / "truth", "x.png", truth)
        main([
            "evaluate", "--pred-dir", str(tmp_path / "pred"),
            "--truth-dir", str(tmp_path / "truth"), "--out-dir", str(tmp_path / "out"),
        ])
        payload = json.loads((tmp_path / "out" / "evaluation.json").read_text())
        assert payload["aggregate"]["iou"] == pytest.approx(1 / 3)

    def test_mask_suffix_pairs_with_plain_stem(self, tmp_path):
        mask = np.ones((5, 5), dtype=np.uint8)
        write_mask(tmp_path / "pred", "img.mask.png", mask)
        write_mask(tmp_path / "truth", "img.png", mask)
        assert main([
            "evaluate", "--pred-dir", str(tmp_path / "pred"),
            "--truth-dir", str(tmp_path / "truth"), "--out-dir", str(tmp_path / "out"),
        ]) == 0

    def test_unpaired_files_fail(self, tmp_path, capsys):
        write_mask(tmp_path / "pred", "only.png", np.ones((4, 4)))
        (tmp_path / "truth").mkdir()
        code = main([
            "evaluate", "--pred-dir", str(tmp_path / "pred"),
            "--truth-dir", str(tmp_path / "truth"), "--out-dir", str(tmp_path / "out"),
        ])
        assert code == 1
        assert "unpaired" in capsys.readouterr().err


class TestSweep:
    def test_csv_has_one_row_per_tau(self, tmp_path, flower_scene, rgr_warmup):
        img_path, truth_dir, _ = flower_scene
        images_dir = tmp_path / "imgs"
        images_dir.mkdir()
        (images_dir / "scene.png").write_bytes(img_path.read_bytes())
        out = tmp_path / "out"
        code = main([
            "sweep", "--images-dir", str(images_dir), "--truth-dir", str(truth_dir),
            "--taus", "0.2,0.3,0.4", "--tile-size", "32", "--out-dir", str(out), *HSV_FLAGS,
        ])
        assert code == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "tau0,precision,recall,f1,iou"
        assert len(lines) == 4
        assert (out / "sweep.png").is_file()

    def test_single_tau_matches_evaluate(self, tmp_path, flower_scene, rgr_warmup):
        img_path, truth_dir, truth = flower_scene
        images_dir = tmp_path / "imgs"
        images_dir.mkdir()
        (images_dir / "scene.png").write_bytes(img_path.read_bytes())
        out = tmp_path / "out"
        main([
            "sweep", "--images-dir", str(images_dir), "--truth-dir", str(truth_dir),
            "--taus", "0.3", "--tile-size", "32", "--out-dir", str(out), *HSV_FLAGS,
        ])
        row = (out / "sweep.csv").read_text().strip().splitlines()[1]
        f1_sweep = float(row.split(",")[3])

        seg_out = tmp_path / "seg"
        main(["segment", str(img_path), "--tile-size", "32",
              "--out-dir", str(seg_out), *HSV_FLAGS])
        from flowerseg import compare

        report = compare(load_mask(seg_out / "scene.mask.png"), SegMask(truth.astype(np.uint8)))
        assert f1_sweep == pytest.approx(report.f1, abs=5e-7)


class TestStats:
    def test_uniform_image_snapshot(self, tmp_path, capsys):
        images_dir = tmp_path / "imgs"
        images_dir.mkdir()
        Image.fromarray(np.full((6, 6, 3), (255, 0, 0), dtype=np.uint8)).save(
            images_dir / "red.png"
        )
        code = main(["stats", "--images-dir", str(images_dir), "--name", "red"])
        assert code == 0
        out = capsys.readouterr().out
        expected = (
            "                       H [0-360]           S [%]           V [%]\n"
            "dataset             mu_H   IQR_H    mu_S   IQR_S    mu_V   IQR_V\n"
            "red                  0.0     0.0   100.0     0.0   100.0     0.0\n"
        )
        assert out == expected

    def test_masked_stats_differ(self, tmp_path):
        rng = np.random.default_rng(9)
        images_dir = tmp_path / "imgs"
        masks_dir = tmp_path / "masks"
        images_dir.mkdir()
        arr = rng.integers(0, 256, (10, 10, 3), dtype=np.uint8)
        Image.fromarray(arr).save(images_dir / "a.png")
        write_mask(masks_dir, "a.png", (rng.random((10, 10)) < 0.5).astype(np.uint8))
        image = RasterImage(arr)
        mask = load_mask(masks_dir / "a.png")
        assert dataset_stats([image], [mask]) != dataset_stats([image])

    def test_table_formatter_shape(self):
        stats = dataset_stats([RasterImage(np.full((3, 3, 3), 128, dtype=np.uint8))])
        table = format_stats_table([("gray", stats)])
        lines = table.splitlines()
        assert len(lines) == 3
        assert "mu_H" in lines[1] and "IQR_V" in lines[1]


class TestGridSearch:
    def test_recovers_box_from_grid_file(self, tmp_path, flower_scene):
        img_path, truth_dir, _ = flower_scene
        images_dir = tmp_path / "imgs"
        images_dir.mkdir()
        (images_dir / "scene.png").write_bytes(img_path.read_bytes())
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(json.dumps({"sat_hi": [0.2, 0.9], "val_lo": [0.0, 0.5]}))
        out = tmp_path / "out"
        code = main([
            "gridsearch", "--images-dir", str(images_dir), "--truth-dir", str(truth_dir),
            "--grid", str(grid_path), "--out-dir", str(out),
        ])
        assert code == 0
        payload = json.loads((out / "gridsearch.json").read_text())
        assert payload["thresholds"]["sat_hi"] == 0.2
        assert payload["report"]["f1"] == 1.0
