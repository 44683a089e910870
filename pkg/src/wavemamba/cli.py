"""Command-line surface: train / eval / map / sweep / ablate / inspect.

Settings come from an optional JSON config file; flags override file
values.  Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import hsi_io, preprocess
from .autodiff import load_checkpoint, save_checkpoint, Tensor
from .errors import WaveMambaError
from .metrics import MetricsReport
from .model import ModelConfig
from .train import TrainConfig, ablate_wavelet, evaluate, predict_map, train

CONFIG_DEFAULTS = {
    "epochs": 50,
    "batch_size": 256,
    "lr": 0.001,
    "seed": 3407,
    "patch_side": 8,
    "reduced_bands": 15,
    "embed_dim": 64,
    "state_dim": 128,
    "dropout": 0.1,
    "weight_decay": 0.01,
    "wavelet": True,
    "head": "softmax",
    "fractions": [25.0, 25.0, 50.0],
    "keep_best_validation": False,
    "threads": 1,
}

OVERRIDE_FLAGS = (
    "epochs",
    "batch_size",
    "lr",
    "seed",
    "patch_side",
    "reduced_bands",
    "embed_dim",
    "state_dim",
    "dropout",
    "threads",
)


def _load_settings(args) -> dict:
    settings = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(CONFIG_DEFAULTS)
        if unknown:
            raise WaveMambaError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    for key in OVERRIDE_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "no_wavelet", False):
        settings["wavelet"] = False
    return settings


def _train_config(settings: dict, num_classes: int) -> TrainConfig:
    model = ModelConfig(
        patch_side=settings["patch_side"],
        reduced_bands=settings["reduced_bands"],
        num_classes=num_classes,
        embed_dim=settings["embed_dim"],
        state_dim=settings["state_dim"],
        dropout=settings["dropout"],
        weight_decay=settings["weight_decay"],
        wavelet_enabled=settings["wavelet"],
        head=settings["head"],
    )
    return TrainConfig(
        model=model,
        epochs=settings["epochs"],
        batch_size=settings["batch_size"],
        lr=settings["lr"],
        seed=settings["seed"],
        fractions=tuple(settings["fractions"]),
        keep_best_validation=settings["keep_best_validation"],
        threads=settings["threads"],
    )


def _prepare(cube_path, labels_path, settings):
    cube = hsi_io.load_cube(cube_path)
    labels = hsi_io.load_labels(labels_path)
    target = min(settings["reduced_bands"], cube.bands)
    settings["reduced_bands"] = target
    reduced = preprocess.normalize(preprocess.reduce_bands(cube, target))
    patches = preprocess.extract_patches(reduced, labels, settings["patch_side"])
    split = preprocess.split_dataset(
        patches, tuple(settings["fractions"]), settings["seed"]
    )
    return reduced, labels, patches, split


def _write_metrics(report: MetricsReport, path: Path) -> None:
    path.write_text(report.to_json() + "\n")


def _sidecar_path(checkpoint: Path) -> Path:
    return checkpoint.with_suffix(".json")


def _load_run(checkpoint_path: Path):
    arrays = load_checkpoint(checkpoint_path)
    sidecar = _sidecar_path(checkpoint_path)
    if not sidecar.exists():
        raise WaveMambaError(f"missing checkpoint sidecar {sidecar}")
    settings = json.loads(sidecar.read_text())
    num_classes = settings.pop("num_classes")
    params = {k: Tensor(v, requires_grad=True) for k, v in arrays.items()}
    return params, settings, num_classes


# --- subcommands ------------------------------------------------------------


def cmd_train(args) -> int:
    settings = _load_settings(args)
    _reduced, labels, patches, split = _prepare(args.cube, args.labels, settings)
    cfg = _train_config(settings, labels.num_classes)
    params, history = train(patches, split, cfg)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(params, out / "model.wmck")
    sidecar = dict(settings, num_classes=labels.num_classes)
    (out / "model.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    (out / "history.csv").write_text(history.to_csv())
    for name, indices in (
        ("train", split.train),
        ("val", split.validation),
        ("test", split.test),
    ):
        _write_metrics(evaluate(params, patches, indices, cfg), out / f"metrics_{name}.json")
    (out / "timing.json").write_text(
        json.dumps({"train_time_s": history.wall_seconds}) + "\n"
    )
    print(f"trained {cfg.epochs} epochs; artifacts in {out}")
    return 0


def cmd_eval(args) -> int:
    params, settings, num_classes = _load_run(Path(args.checkpoint))
    if hsi_io.load_labels(args.labels).num_classes != num_classes:
        raise WaveMambaError(
            f"checkpoint has {num_classes} classes, labels disagree"
        )
    _reduced, labels, patches, split = _prepare(args.cube, args.labels, settings)
    cfg = _train_config(settings, num_classes)
    report = evaluate(params, patches, split.test, cfg)
    if args.out:
        _write_metrics(report, Path(args.out))
    print(report.to_json())
    return 0


def cmd_map(args) -> int:
    params, settings, num_classes = _load_run(Path(args.checkpoint))
    cube = hsi_io.load_cube(args.cube)
    target = min(settings["reduced_bands"], cube.bands)
    reduced = preprocess.normalize(preprocess.reduce_bands(cube, target))
    cfg = _train_config(settings, num_classes)
    predicted = predict_map(params, reduced, None, cfg)
    hsi_io.render_map(predicted, hsi_io.default_palette(num_classes), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_sweep(args) -> int:
    settings = _load_settings(args)
    rows = ["patch,frac,oa,aa,kappa,train_time_s"]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for patch in args.patch_sizes:
        for frac in args.train_fracs:
            cell = dict(settings)
            cell["patch_side"] = patch
            val = min(cell["fractions"][1], (100.0 - frac) / 2.0)
            cell["fractions"] = [frac, val, 100.0 - frac - val]
            _reduced, labels, patches, split = _prepare(args.cube, args.labels, cell)
            cfg = _train_config(cell, labels.num_classes)
            params, history = train(patches, split, cfg)
            report = evaluate(params, patches, split.test, cfg)
            rows.append(
                f"{patch},{frac:g},{report.oa:.6f},{report.aa:.6f},"
                f"{report.kappa:.6f},{history.wall_seconds:.3f}"
            )
    (out / "sweep.csv").write_text("\n".join(rows) + "\n")
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_ablate(args) -> int:
    settings = _load_settings(args)
    _reduced, labels, patches, split = _prepare(args.cube, args.labels, settings)
    cfg = _train_config(settings, labels.num_classes)
    with_report, without_report = ablate_wavelet(patches, split, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_metrics(with_report, out / "ablate_with_wavelet.json")
    _write_metrics(without_report, out / "ablate_without_wavelet.json")
    print(
        f"OA with wavelet {with_report.oa:.4f}, without {without_report.oa:.4f}"
    )
    return 0


def cmd_inspect(args) -> int:
    if not args.cube and not args.labels:
        raise WaveMambaError("inspect needs --cube and/or --labels")
    if args.cube:
        cube = hsi_io.load_cube(args.cube)
        print(f"cube: H={cube.height} W={cube.width} C={cube.bands}")
    if args.labels:
        labels = hsi_io.load_labels(args.labels)
        counts = np.bincount(labels.labels.ravel())
        print(
            f"labels: H={labels.height} W={labels.width} "
            f"classes={labels.num_classes} unlabeled={int(counts[0])}"
        )
    return 0


# --- parser -----------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _add_common(sub, cube=True, labels=True, config=True):
    if cube:
        sub.add_argument("--cube", required=True, help="HSIC cube file")
    if labels:
        sub.add_argument("--labels", required=True, help="HSIL label file")
    if config:
        sub.add_argument("--config", help="JSON config file")
        for flag, kind in (
            ("epochs", int),
            ("batch-size", int),
            ("seed", int),
            ("patch-side", int),
            ("reduced-bands", int),
            ("embed-dim", int),
            ("state-dim", int),
            ("threads", int),
            ("lr", float),
            ("dropout", float),
        ):
            sub.add_argument(f"--{flag}", type=kind, default=None)
        sub.add_argument("--no-wavelet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavemamba", description="Hyperspectral classification toolkit"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_train = commands.add_parser("train", help="train a model and write artifacts")
    _add_common(p_train)
    p_train.add_argument("--out-dir", required=True)
    p_train.set_defaults(func=cmd_train)

    p_eval = commands.add_parser("eval", help="evaluate a checkpoint on the test split")
    _add_common(p_eval, config=False)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--out")
    p_eval.set_defaults(func=cmd_eval)

    p_map = commands.add_parser("map", help="render a full-scene classification map")
    _add_common(p_map, labels=False, config=False)
    p_map.add_argument("--checkpoint", required=True)
    p_map.add_argument("--out", required=True)
    p_map.set_defaults(func=cmd_map)

    p_sweep = commands.add_parser("sweep", help="grid over patch sizes and train fractions")
    _add_common(p_sweep)
    p_sweep.add_argument("--patch-sizes", type=_int_list, required=True)
    p_sweep.add_argument("--train-fracs", type=_float_list, required=True)
    p_sweep.add_argument("--out-dir", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_ablate = commands.add_parser("ablate", help="paired runs with/without the wavelet stage")
    _add_common(p_ablate)
    p_ablate.add_argument("--out-dir", required=True)
    p_ablate.set_defaults(func=cmd_ablate)

    p_inspect = commands.add_parser("inspect", help="print cube/label header info")
    p_inspect.add_argument("--cube")
    p_inspect.add_argument("--labels")
    p_inspect.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep":
        if not args.patch_sizes or not args.train_fracs:
            parser.error("sweep needs nonempty --patch-sizes and --train-fracs")
        odd = [p for p in args.patch_sizes if p % 2]
        if odd:
            parser.error(f"patch sizes must be even, got {odd}")
    if getattr(args, "patch_side", None) is not None and args.patch_side % 2:
        parser.error(f"--patch-side must be even, got {args.patch_side}")
    try:
        return args.func(args)
    except (WaveMambaError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
