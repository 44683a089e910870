import numpy as np
import pytest
from conftest import build_dataset, small_train_config

from wavemamba import model as wm
from wavemamba.errors import EmptySplit
from wavemamba.preprocess import SplitSet
from wavemamba.train import ablate_wavelet, evaluate, predict_map, train


@pytest.fixture(scope="module")
def small_dataset():
    from synthdata import make_scene

    cube, labels = make_scene(20, 20, 6, 3, texture_scale=0.8, noise=0.2, seed=21)
    patches, split = build_dataset(cube, labels, 4, 4, (25, 25, 50), seed=5)
    return cube, labels, patches, split


def test_single_batch_single_epoch(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=1, batch_size=10_000, seed=1)
    params, history = train(patches, split, cfg)
    assert len(history.epochs) == 1
    assert np.isfinite(history.epochs[0].train_loss)


def test_training_deterministic_to_last_bit(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=3, batch_size=64, seed=7)
    params_a, hist_a = train(patches, split, cfg)
    params_b, hist_b = train(patches, split, cfg)
    assert hist_a.epochs[-1].train_loss == hist_b.epochs[-1].train_loss
    for name in params_a:
        assert np.array_equal(params_a[name].data, params_b[name].data)


def test_memorizing_run_overfits_train_split(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(
        3, epochs=60, batch_size=64, seed=2, dropout=0.0, embed_dim=24, state_dim=32
    )
    cfg.model.weight_decay = 0.0
    params, _ = train(patches, split, cfg)
    report = evaluate(params, patches, split.train, cfg)
    assert report.oa > 0.9


def test_evaluate_single_sample(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=1, batch_size=64, seed=3)
    params, _ = train(patches, split, cfg)
    report = evaluate(params, patches, split.test[:1], cfg)
    assert report.oa in (0.0, 1.0)


def test_evaluate_sharded_matches_serial(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=2, batch_size=64, seed=4)
    params, _ = train(patches, split, cfg)
    serial = evaluate(params, patches, split.test, cfg, shards=1)
    sharded = evaluate(params, patches, split.test, cfg, shards=3)
    assert serial.confusion == sharded.confusion


def test_evaluate_does_not_mutate_params(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=1, batch_size=64, seed=5)
    params, _ = train(patches, split, cfg)
    before = {k: p.data.copy() for k, p in params.items()}
    evaluate(params, patches, split.test, cfg)
    for k in params:
        assert np.array_equal(params[k].data, before[k])


def test_empty_split_errors(small_dataset):
    _, _, patches, _ = small_dataset
    cfg = small_train_config(3)
    empty = SplitSet([], [], [], 0, (25, 25, 50))
    with pytest.raises(EmptySplit):
        train(patches, empty, cfg)
    with pytest.raises(EmptySplit):
        evaluate({}, patches, [], cfg)


def test_smoothed_train_loss_nonincreasing(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=20, batch_size=64, seed=6)
    _, history = train(patches, split, cfg)
    losses = np.array([e.train_loss for e in history.epochs])
    smoothed = np.convolve(losses, np.ones(10) / 10, mode="valid")
    assert np.all(np.diff(smoothed) <= 1e-3)


# --- ablation ---------------------------------------------------------------

def test_ablation_produces_paired_reports(small_dataset):
    _, _, patches, split = small_dataset
    cfg = small_train_config(3, epochs=2, batch_size=64, seed=8)
    with_report, without_report = ablate_wavelet(patches, split, cfg)
    assert len(with_report.per_class) == len(without_report.per_class) == 3
    assert with_report.config["wavelet_enabled"] is True
    assert without_report.config["wavelet_enabled"] is False


@pytest.mark.parametrize("patch_side", [2, 4, 6, 8, 10])
def test_sequence_length_law_on_off(patch_side):
    from wavemamba.model import ModelConfig

    on = ModelConfig(patch_side=patch_side, reduced_bands=2, num_classes=2, wavelet_enabled=True)
    off = ModelConfig(patch_side=patch_side, reduced_bands=2, num_classes=2, wavelet_enabled=False)
    assert on.seq_len == (patch_side // 2) ** 2
    assert off.seq_len == patch_side**2
    assert on.in_channels == 16
    assert off.in_channels == 4


# --- full-scene map ---------------------------------------------------------

def test_predict_map_dims_and_consistency(small_dataset):
    cube, labels, patches, split = small_dataset
    cfg = small_train_config(3, epochs=2, batch_size=64, seed=9)
    params, _ = train(patches, split, cfg)
    from wavemamba import preprocess

    reduced = preprocess.normalize(preprocess.reduce_bands(cube, 4))
    predicted = predict_map(params, reduced, labels, cfg)
    assert (predicted.height, predicted.width) == (cube.height, cube.width)
    p = cfg.model.patch_side
    half = p // 2 - 1
    # border pixels without a full window stay unlabeled
    assert np.all(predicted.labels[:half] == 0)
    assert np.all(predicted.labels[:, :half] == 0)
    # interior predictions agree with a direct forward on the same windows
    for patch in patches[:5]:
        probs = wm.model_forward(patch.window, params, cfg.model)
        assert predicted.labels[patch.center_row, patch.center_col] == np.argmax(probs) + 1


def test_predict_map_single_window():
    from synthdata import make_scene

    cube, labels = make_scene(12, 12, 3, 2, region=4, seed=30)
    patches, split = build_dataset(cube, labels, 4, 3, (40, 20, 40), seed=1)
    cfg = small_train_config(2, patch_side=4, reduced_bands=3, epochs=1, batch_size=8, seed=10)
    params, _ = train(patches, split, cfg)
    from wavemamba import preprocess
    from wavemamba.hsi_io import HsiCube

    reduced = preprocess.normalize(preprocess.reduce_bands(cube, 3))
    scene = HsiCube(reduced.data[:4, :4, :])  # exactly one full window fits
    predicted = predict_map(params, scene, None, cfg)
    assert np.count_nonzero(predicted.labels) == 1
    assert predicted.labels[1, 1] != 0
