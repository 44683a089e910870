import json

import pytest
from synthdata import make_scene

from wavemamba import hsi_io
from wavemamba.cli import main

CONFIG = {
    "epochs": 2,
    "batch_size": 64,
    "lr": 0.001,
    "seed": 3407,
    "patch_side": 4,
    "reduced_bands": 4,
    "embed_dim": 12,
    "state_dim": 12,
    "dropout": 0.1,
    "fractions": [25.0, 25.0, 50.0],
}


@pytest.fixture(scope="module")
def scene_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("scene")
    cube, labels = make_scene(16, 16, 6, 3, texture_scale=0.8, noise=0.2, seed=40)
    hsi_io.write_cube(cube, root / "scene.hsic")
    hsi_io.write_labels(labels, root / "scene.hsil")
    config = root / "config.json"
    config.write_text(json.dumps(CONFIG))
    return root


def run_train(scene_files, out_dir):
    return main(
        [
            "train",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
            "--config", str(scene_files / "config.json"),
            "--out-dir", str(out_dir),
        ]
    )


def test_train_smoke_writes_all_artifacts(scene_files, tmp_path):
    out = tmp_path / "run"
    assert run_train(scene_files, out) == 0
    for name in (
        "model.wmck",
        "model.json",
        "history.csv",
        "metrics_train.json",
        "metrics_val.json",
        "metrics_test.json",
        "timing.json",
    ):
        assert (out / name).exists(), name
    history = (out / "history.csv").read_text().strip().splitlines()
    assert history[0] == "epoch,train_loss,train_acc,val_loss,val_acc"
    assert len(history) == 1 + CONFIG["epochs"]


def test_train_missing_cube_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["train", "--labels", "x.hsil", "--out-dir", "out"])
    assert err.value.code == 2
    assert "--cube" in capsys.readouterr().err


def test_odd_patch_size_is_usage_error_before_any_work(scene_files, tmp_path, capsys):
    out = tmp_path / "never"
    with pytest.raises(SystemExit) as err:
        main(
            [
                "train",
                "--cube", str(scene_files / "scene.hsic"),
                "--labels", str(scene_files / "scene.hsil"),
                "--patch-side", "5",
                "--out-dir", str(out),
            ]
        )
    assert err.value.code == 2
    assert not out.exists()


def test_rerun_is_byte_identical(scene_files, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run_train(scene_files, out_a) == 0
    assert run_train(scene_files, out_b) == 0
    for name in ("metrics_train.json", "metrics_val.json", "metrics_test.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    assert (out_a / "model.wmck").read_bytes() == (out_b / "model.wmck").read_bytes()


def test_eval_checkpoint(scene_files, tmp_path, capsys):
    out = tmp_path / "run"
    assert run_train(scene_files, out) == 0
    code = main(
        [
            "eval",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
            "--checkpoint", str(out / "model.wmck"),
            "--out", str(tmp_path / "eval.json"),
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "eval.json").read_text())
    assert 0.0 <= report["oa"] <= 1.0
    # matches the training run's own test-split metrics
    assert report["oa"] == json.loads((out / "metrics_test.json").read_text())["oa"]


def test_eval_class_count_mismatch(scene_files, tmp_path, capsys):
    out = tmp_path / "run"
    assert run_train(scene_files, out) == 0
    other_cube, other_labels = make_scene(16, 16, 6, 5, texture_scale=0.8, seed=41)
    hsi_io.write_cube(other_cube, tmp_path / "o.hsic")
    hsi_io.write_labels(other_labels, tmp_path / "o.hsil")
    code = main(
        [
            "eval",
            "--cube", str(tmp_path / "o.hsic"),
            "--labels", str(tmp_path / "o.hsil"),
            "--checkpoint", str(out / "model.wmck"),
        ]
    )
    assert code == 1
    assert "classes" in capsys.readouterr().err


def test_corrupt_checkpoint_exit_one(scene_files, tmp_path, capsys):
    out = tmp_path / "run"
    assert run_train(scene_files, out) == 0
    (out / "model.wmck").write_bytes(b"garbage")
    code = main(
        [
            "eval",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
            "--checkpoint", str(out / "model.wmck"),
        ]
    )
    assert code == 1
    assert "WMCK" in capsys.readouterr().err


def test_map_output_is_valid_p6(scene_files, tmp_path):
    out = tmp_path / "run"
    assert run_train(scene_files, out) == 0
    ppm = tmp_path / "map.ppm"
    code = main(
        [
            "map",
            "--cube", str(scene_files / "scene.hsic"),
            "--checkpoint", str(out / "model.wmck"),
            "--out", str(ppm),
        ]
    )
    assert code == 0
    raw = ppm.read_bytes()
    assert raw.startswith(b"P6\n16 16\n255\n")
    assert len(raw) == len(b"P6\n16 16\n255\n") + 3 * 16 * 16


def test_sweep_single_cell(scene_files, tmp_path):
    out = tmp_path / "sweep"
    code = main(
        [
            "sweep",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
            "--config", str(scene_files / "config.json"),
            "--patch-sizes", "4",
            "--train-fracs", "25",
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    rows = (out / "sweep.csv").read_text().strip().splitlines()
    assert rows[0] == "patch,frac,oa,aa,kappa,train_time_s"
    assert len(rows) == 2


def test_sweep_grid_rows(scene_files, tmp_path):
    out = tmp_path / "sweep"
    code = main(
        [
            "sweep",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
            "--config", str(scene_files / "config.json"),
            "--patch-sizes", "2,4",
            "--train-fracs", "10,25,40",
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    rows = (out / "sweep.csv").read_text().strip().splitlines()
    assert len(rows) == 7
    cells = {tuple(r.split(",")[:2]) for r in rows[1:]}
    assert len(cells) == 6


def test_sweep_odd_patch_usage_error(scene_files, tmp_path, capsys):
    out = tmp_path / "never"
    with pytest.raises(SystemExit) as err:
        main(
            [
                "sweep",
                "--cube", str(scene_files / "scene.hsic"),
                "--labels", str(scene_files / "scene.hsil"),
                "--patch-sizes", "3",
                "--train-fracs", "25",
                "--out-dir", str(out),
            ]
        )
    assert err.value.code == 2
    assert not out.exists()


def test_ablate_writes_paired_reports(scene_files, tmp_path):
    out = tmp_path / "ablate"
    code = main(
        [
            "ablate",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
            "--config", str(scene_files / "config.json"),
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    with_report = json.loads((out / "ablate_with_wavelet.json").read_text())
    without_report = json.loads((out / "ablate_without_wavelet.json").read_text())
    assert len(with_report["per_class"]) == len(without_report["per_class"])


def test_inspect_reports_header_info(scene_files, capsys):
    code = main(
        [
            "inspect",
            "--cube", str(scene_files / "scene.hsic"),
            "--labels", str(scene_files / "scene.hsil"),
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "H=16 W=16 C=6" in text
    assert "classes=3" in text
