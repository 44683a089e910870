"""Training loop, split evaluation, wavelet ablation, full-scene maps.

All randomness flows from one seed through named substreams (split=0,
init=1, shuffle=2, dropout=3) so each stage is independently
reproducible.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import model as wm
from .autodiff import Adam, Tensor
from .errors import EmptySplit
from .hsi_io import HsiCube, LabelMap
from .metrics import ConfusionMatrix, MetricsReport
from .model import ModelConfig
from .preprocess import Patch, SplitSet

STREAM_SPLIT = 0
STREAM_INIT = 1
STREAM_SHUFFLE = 2
STREAM_DROPOUT = 3


@dataclass
class TrainConfig:
    model: ModelConfig
    epochs: int = 50
    batch_size: int = 256
    lr: float = 0.001
    seed: int = 3407
    fractions: tuple[float, float, float] = (25.0, 25.0, 50.0)
    keep_best_validation: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")


@dataclass
class EpochStats:
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    wall_seconds: float = 0.0

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,train_acc,val_loss,val_acc"]
        for i, e in enumerate(self.epochs, start=1):
            lines.append(
                f"{i},{e.train_loss:.10g},{e.train_acc:.10g},"
                f"{e.val_loss:.10g},{e.val_acc:.10g}"
            )
        return "\n".join(lines) + "\n"


def _stack_patches(patches: list[Patch], indices) -> tuple[np.ndarray, np.ndarray]:
    windows = np.stack([patches[i].window for i in indices])
    targets = np.array([patches[i].label - 1 for i in indices], dtype=np.int64)
    return windows, targets


def _batch_eval(params, volumes, targets, cfg: ModelConfig, batch_size=512):
    """Eval-mode loss and predictions without touching gradients."""
    losses = []
    preds = []
    for start in range(0, len(volumes), batch_size):
        vol = volumes[start : start + batch_size]
        tgt = targets[start : start + batch_size]
        loss = wm.training_loss(vol, tgt, params, cfg, training=False)
        logits = wm.forward_logits(vol, params, cfg, training=False)
        losses.append(loss.data * len(vol))
        preds.append(np.argmax(logits.data, axis=1))
    return float(np.sum(losses) / len(volumes)), np.concatenate(preds)


def train(
    patches: list[Patch], split: SplitSet, cfg: TrainConfig
) -> tuple[dict[str, Tensor], TrainHistory]:
    if not split.train:
        raise EmptySplit("train split is empty")
    started = time.perf_counter()
    train_x, train_y = _stack_patches(patches, split.train)
    if split.validation:
        val_x, val_y = _stack_patches(patches, split.validation)
    else:
        val_x = val_y = None

    init_rng = np.random.default_rng([cfg.seed, STREAM_INIT])
    shuffle_rng = np.random.default_rng([cfg.seed, STREAM_SHUFFLE])
    dropout_rng = np.random.default_rng([cfg.seed, STREAM_DROPOUT])

    params = wm.init_params(cfg.model, init_rng)
    optimizer = Adam(params, lr=cfg.lr)
    history = TrainHistory()
    best_val = -np.inf
    best_params = None

    n = len(train_x)
    for _epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss = wm.training_loss(
                train_x[idx], train_y[idx], params, cfg.model, rng=dropout_rng
            )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.data) * len(idx)
            logits = wm.forward_logits(train_x[idx], params, cfg.model, training=False)
            epoch_correct += int(np.sum(np.argmax(logits.data, axis=1) == train_y[idx]))
        if val_x is not None:
            val_loss, val_pred = _batch_eval(params, val_x, val_y, cfg.model)
            val_acc = float(np.mean(val_pred == val_y))
        else:
            val_loss, val_acc = float("nan"), float("nan")
        history.epochs.append(
            EpochStats(epoch_loss / n, epoch_correct / n, val_loss, val_acc)
        )
        if cfg.keep_best_validation and val_x is not None and val_acc >= best_val:
            best_val = val_acc
            best_params = {k: p.data.copy() for k, p in params.items()}

    if cfg.keep_best_validation and best_params is not None:
        for k, p in params.items():
            p.data = best_params[k]
    history.wall_seconds = time.perf_counter() - started
    return params, history


def evaluate(
    params: dict[str, Tensor],
    patches: list[Patch],
    indices: list[int],
    cfg: TrainConfig,
    shards: int | None = None,
) -> MetricsReport:
    """Eval-mode forward over a split; shard matrices merge elementwise."""
    if not indices:
        raise EmptySplit("evaluation split is empty")
    shards = shards or max(cfg.threads, 1)
    shards = min(shards, len(indices))
    chunks = np.array_split(np.asarray(indices), shards)

    def run_shard(chunk) -> ConfusionMatrix:
        cm = ConfusionMatrix(cfg.model.num_classes)
        x, y = _stack_patches(patches, chunk)
        for start in range(0, len(x), 512):
            logits = wm.forward_logits(
                x[start : start + 512], params, cfg.model, training=False
            )
            cm.accumulate_many(y[start : start + 512], np.argmax(logits.data, axis=1))
        return cm

    merged = ConfusionMatrix(cfg.model.num_classes)
    if shards == 1:
        merged.merge(run_shard(chunks[0]))
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            for cm in pool.map(run_shard, chunks):
                merged.merge(cm)
    return MetricsReport.from_matrix(merged, config=asdict(cfg.model))


def ablate_wavelet(
    patches: list[Patch], split: SplitSet, cfg: TrainConfig
) -> tuple[MetricsReport, MetricsReport]:
    """Train twice from identical seeds, with and without the wavelet stage."""
    with_cfg = replace(cfg, model=replace(cfg.model, wavelet_enabled=True))
    without_cfg = replace(cfg, model=replace(cfg.model, wavelet_enabled=False))
    reports = []
    for run_cfg in (with_cfg, without_cfg):
        params, history = train(patches, split, run_cfg)
        report = evaluate(params, patches, split.test, run_cfg)
        report.train_time_s = history.wall_seconds
        reports.append(report)
    return reports[0], reports[1]


def predict_map(
    params: dict[str, Tensor],
    cube: HsiCube,
    labels: LabelMap | None,
    cfg: TrainConfig,
) -> LabelMap:
    """Classify every pixel whose full window fits; others stay 0."""
    p = cfg.model.patch_side
    if labels is not None and (labels.height, labels.width) != (cube.height, cube.width):
        raise ValueError("label map dims do not match cube")
    out = np.zeros((cube.height, cube.width), dtype=np.uint16)
    half = p // 2 - 1
    anchors = [
        (r, c)
        for r in range(cube.height - p + 1)
        for c in range(cube.width - p + 1)
    ]
    for start in range(0, len(anchors), 512):
        chunk = anchors[start : start + 512]
        windows = np.stack([cube.data[r : r + p, c : c + p, :] for r, c in chunk])
        logits = wm.forward_logits(windows, params, cfg.model, training=False)
        preds = np.argmax(logits.data, axis=1) + 1
        for (r, c), pred in zip(chunk, preds):
            out[r + half, c + half] = pred
    return LabelMap(out)
