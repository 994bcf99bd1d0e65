import json

import numpy as np
import pytest
from PIL import Image

from segsweep import dataset_io
from segsweep.cli import main

from conftest import (
    REFERENCE_DICE,
    REFERENCE_IOU,
    REFERENCE_PIXACC,
    reference_csv_text,
)


def synth_args(out, n=6, size="24x24", seed=7, **extra):
    args = [
        "synth", "--out", str(out), "--n", str(n), "--size", size,
        "--seed", str(seed), "--presence", "0.8",
    ]
    for key, value in extra.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


def tree_bytes(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestSynthCommand:
    def test_writes_complete_dataset(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert main(synth_args(out)) == 0
        manifest = dataset_io.DatasetManifest.load(out / "manifest.tsv", root=out)
        assert len(manifest) == 6
        assert (out / "plant.txt").exists()
        assert (out / "run_manifest.json").exists()
        pm = dataset_io.read_pmap(out / manifest.records[0].pmap_path)
        assert pm.width == 24 and pm.height == 24

    def test_byte_identical_reruns(self, tmp_path):
        out = tmp_path / "data"
        assert main(synth_args(out, n=10)) == 0
        first = tree_bytes(out)
        assert main(synth_args(out, n=10)) == 0
        second = tree_bytes(out)
        assert list(first) == list(second)
        assert all(first[k] == second[k] for k in first)

    def test_data_files_independent_of_output_location(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(synth_args(a, n=10)) == 0
        assert main(synth_args(b, n=10)) == 0
        ta, tb = tree_bytes(a), tree_bytes(b)
        assert list(ta) == list(tb)
        for name in ta:
            if name == "run_manifest.json":
                continue  # echoes the differing --out path, by design
            assert ta[name] == tb[name]


class TestSplitCommand:
    def test_assigns_ratio_and_rewrites_manifest(self, tmp_path, capsys):
        out = tmp_path / "data"
        main(synth_args(out, n=10))
        assert main(["split", "--root", str(out), "--seed", "3"]) == 0
        captured = capsys.readouterr()
        assert "train 8 / validation 1 / test 1" in captured.out
        manifest = dataset_io.DatasetManifest.load(out / "manifest.tsv")
        assert manifest.split_counts()["train"] == 8

    def test_deterministic_assignment(self, tmp_path):
        out = tmp_path / "data"
        main(synth_args(out, n=10))
        main(["split", "--root", str(out), "--seed", "3"])
        first = (out / "manifest.tsv").read_bytes()
        main(["split", "--root", str(out), "--seed", "3"])
        assert (out / "manifest.tsv").read_bytes() == first


class TestEvalCommand:
    def test_perfect_dataset_scores_ones(self, tmp_path, capsys):
        out = tmp_path / "data"
        main(synth_args(out, blur_radius=0, noise=0.0, compression=0.0))
        report = tmp_path / "report"
        code = main([
            "eval", "--root", str(out), "--threshold", "0.4", "--out", str(report),
        ])
        assert code == 0
        summary = json.loads((report / "summary.json").read_text())
        assert summary["threshold"] == 0.4
        assert summary["mean_dice"] == 1.0
        assert summary["mean_iou"] == 1.0
        assert summary["mean_pixel_accuracy"] == 1.0
        assert summary["n_images"] == 6
        assert summary["policy"] == "include"
        per_image = (report / "per_image.csv").read_text().splitlines()
        assert per_image[0] == "image_id,dice,iou,pixel_accuracy"
        assert len(per_image) == 7

    def test_replay_reference_row(self, tmp_path):
        csv_path = tmp_path / "curve.csv"
        csv_path.write_text(reference_csv_text())
        report = tmp_path / "report"
        code = main([
            "eval", "--from-csv", str(csv_path), "--threshold", "0.14",
            "--out", str(report),
        ])
        assert code == 0
        summary = json.loads((report / "summary.json").read_text())
        assert summary["mean_dice"] == 0.7812
        assert summary["mean_iou"] == 0.7015
        assert summary["mean_pixel_accuracy"] == 0.9576

    def test_missing_threshold_errors(self, tmp_path, capsys):
        out = tmp_path / "data"
        main(synth_args(out))
        assert main(["eval", "--root", str(out)]) == 1
        assert "threshold" in capsys.readouterr().err

    def test_unreadable_file_nonzero_exit(self, tmp_path, capsys):
        out = tmp_path / "data"
        main(synth_args(out))
        first = dataset_io.DatasetManifest.load(out / "manifest.tsv").records[0]
        (out / first.pmap_path).write_bytes(b"JUNKJUNKJUNK!")
        assert main(["eval", "--root", str(out), "--threshold", "0.5"]) == 1
        err = capsys.readouterr().err
        assert first.image_id in err

    def test_empty_manifest_errors(self, tmp_path, capsys):
        root = tmp_path / "root"
        root.mkdir()
        (root / "manifest.tsv").write_text("")
        assert main(["eval", "--root", str(root), "--threshold", "0.5"]) == 1
        assert "no images" in capsys.readouterr().err


class TestSweepCommand:
    def test_replay_reference_curve(self, tmp_path, capsys):
        csv_path = tmp_path / "aggregates.csv"
        csv_path.write_text(reference_csv_text())
        report = tmp_path / "report"
        code = main([
            "sweep", "--from-csv", str(csv_path), "--weights", "1,0,0",
            "--out", str(report),
        ])
        assert code == 0
        assert "T* = 0.140000" in capsys.readouterr().out

        rows = (report / "curve.csv").read_text().splitlines()
        assert rows[0] == "threshold,dice,iou,pixel_accuracy,objective"
        assert len(rows) == 6
        for i, row in enumerate(rows[1:]):
            cols = row.split(",")
            assert float(cols[1]) == REFERENCE_DICE[i]
            assert float(cols[2]) == REFERENCE_IOU[i]
            assert float(cols[3]) == REFERENCE_PIXACC[i]
        # across-grid mean of the dice column reproduces the summary table
        dice_mean = sum(float(r.split(",")[1]) for r in rows[1:]) / 5
        assert f"{dice_mean:.6f}" == "0.780100"

        payload = json.loads((report / "sweep.json").read_text())
        assert payload["optimal_threshold"] == 0.14
        assert payload["mean_dice"] == 0.7812
        assert payload["weights"] == [1.0, 0.0, 0.0]

    def test_single_image_single_threshold(self, tmp_path):
        out = tmp_path / "data"
        main(synth_args(out, n=1, blur_radius=0, noise=0.0, compression=0.0))
        report = tmp_path / "report"
        code = main([
            "sweep", "--root", str(out), "--grid", "0.5:0.6:0.1",
            "--out", str(report),
        ])
        assert code == 0
        rows = (report / "curve.csv").read_text().splitlines()
        assert len(rows) == 3

    def test_worker_count_invariant_outputs(self, tmp_path):
        out = tmp_path / "data"
        main(synth_args(out, n=8, size="32x32"))
        reports = []
        for workers in ("1", "8"):
            report = tmp_path / f"report-{workers}"
            code = main([
                "sweep", "--root", str(out), "--grid", "0.05:0.95:0.05",
                "--workers", workers, "--out", str(report),
            ])
            assert code == 0
            reports.append(report)
        assert (reports[0] / "curve.csv").read_bytes() == (reports[1] / "curve.csv").read_bytes()
        assert (reports[0] / "sweep.json").read_bytes() == (reports[1] / "sweep.json").read_bytes()

    def test_postprocess_flag_changes_curve(self, tmp_path):
        out = tmp_path / "data"
        main(synth_args(out, n=4, size="32x32", noise=0.25))
        plain = tmp_path / "plain"
        cleaned = tmp_path / "cleaned"
        main(["sweep", "--root", str(out), "--grid", "0.2:0.8:0.2", "--out", str(plain)])
        main([
            "sweep", "--root", str(out), "--grid", "0.2:0.8:0.2",
            "--postprocess", "--se", "cross3", "--out", str(cleaned),
        ])
        assert (plain / "curve.csv").read_text() != (cleaned / "curve.csv").read_text()


class TestOptimizeCommand:
    def test_dice_only_weights_select_014(self, tmp_path, capsys):
        csv_path = tmp_path / "aggregates.csv"
        csv_path.write_text(reference_csv_text())
        code = main(["optimize", "--from-csv", str(csv_path), "--weights", "1,0,0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "T* = 0.140000" in out
        assert "threshold objective" in out

    def test_equal_weights_select_015(self, tmp_path, capsys):
        csv_path = tmp_path / "aggregates.csv"
        csv_path.write_text(reference_csv_text())
        code = main(["optimize", "--from-csv", str(csv_path), "--weights", "1,1,1"])
        assert code == 0
        assert "T* = 0.150000" in capsys.readouterr().out

    def test_planted_dataset_recovers_plant(self, tmp_path, capsys):
        out = tmp_path / "data"
        main(synth_args(out, n=24, size="48x48", plant="0.30"))
        capsys.readouterr()  # drain synth output
        code = main([
            "optimize", "--root", str(out), "--weights", "1,0,0",
            "--grid", "0.01:0.99:0.01",
        ])
        assert code == 0
        line = capsys.readouterr().out.splitlines()[0]
        t_star = float(line.split("=")[1])
        assert abs(t_star - 0.30) <= 0.01 + 1e-9


class TestPreprocessCommand:
    def _make_raw_dataset(self, root, rng, size=96):
        (root / "images").mkdir(parents=True)
        (root / "masks").mkdir()
        for i in range(3):
            img = (rng.random((size, size)) * 255).astype(np.uint8)
            Image.fromarray(img, mode="L").save(root / "images" / f"case{i}.png")
            mask = np.zeros((size, size), dtype=np.uint8)
            mask[20:60, 20:60] = 255
            Image.fromarray(mask, mode="L").save(root / "masks" / f"case{i}.png")

    def test_resizes_to_target(self, tmp_path, rng):
        raw = tmp_path / "raw"
        self._make_raw_dataset(raw, rng)
        out = tmp_path / "prepped"
        code = main([
            "preprocess", "--root", str(raw), "--out", str(out), "--size", "48x48",
        ])
        assert code == 0
        manifest = dataset_io.DatasetManifest.load(out / "manifest.tsv", root=out)
        assert len(manifest) == 3
        pm = dataset_io.read_pmap(out / manifest.records[0].pmap_path)
        assert (pm.width, pm.height) == (48, 48)
        mask = dataset_io.read_mask(out / manifest.records[0].mask_path)
        assert (mask.width, mask.height) == (48, 48)
        assert 0 < mask.foreground_count() < 48 * 48

    def test_augmented_copies(self, tmp_path, rng):
        raw = tmp_path / "raw"
        self._make_raw_dataset(raw, rng, size=40)
        out = tmp_path / "prepped"
        code = main([
            "preprocess", "--root", str(raw), "--out", str(out),
            "--size", "32x32", "--augment", "2", "--seed", "5",
        ])
        assert code == 0
        manifest = dataset_io.DatasetManifest.load(out / "manifest.tsv", root=out)
        assert len(manifest) == 9  # 3 originals + 2 copies each
        assert any("-aug" in r.image_id for r in manifest.records)


class TestPostprocessCommand:
    def test_cleans_mask_files(self, tmp_path):
        root = tmp_path / "masks"
        root.mkdir()
        noisy = np.zeros((16, 16), dtype=np.uint8)
        noisy[4:12, 4:12] = 255
        noisy[0, 15] = 255  # speckle
        Image.fromarray(noisy, mode="L").save(root / "pred.png")
        out = tmp_path / "cleaned"
        assert main(["postprocess", "--root", str(root), "--out", str(out)]) == 0
        cleaned = dataset_io.read_mask(out / "pred.png")
        assert not cleaned.data[0, 15]
        assert cleaned.data[8, 8]


class TestConfigPrecedence:
    def test_cli_overrides_config_file(self, tmp_path):
        csv_path = tmp_path / "aggregates.csv"
        csv_path.write_text(reference_csv_text())
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"weights": "1,0,0", "policy": "exclude"}))
        report = tmp_path / "report"
        code = main([
            "sweep", "--config", str(config), "--from-csv", str(csv_path),
            "--weights", "0,0,1", "--out", str(report),
        ])
        assert code == 0
        echo = json.loads((report / "run_manifest.json").read_text())["config"]
        assert echo["weights"] == [0.0, 0.0, 1.0]  # CLI wins
        assert echo["policy"] == "exclude"  # config file survives

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"thresold": 0.5}))
        assert main(["sweep", "--config", str(config)]) == 1
        assert "unknown config file keys" in capsys.readouterr().err


class TestCsvValidation:
    def test_bad_header_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,d,i,p\n0.1,0.5,0.4,0.9\n")
        assert main(["sweep", "--from-csv", str(bad)]) == 1
        assert "header" in capsys.readouterr().err

    def test_objective_column_accepted_on_input(self, tmp_path, capsys):
        csv_path = tmp_path / "with_objective.csv"
        csv_path.write_text(reference_csv_text(include_objective=True))
        assert main(["optimize", "--from-csv", str(csv_path), "--weights", "1,0,0"]) == 0
        assert "T* = 0.140000" in capsys.readouterr().out
