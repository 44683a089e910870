"""Convert MATLAB-container HSI benchmarks to HSIC/HSIL files, and
generate synthetic fixture scenes in the same formats.

The output layouts are written here directly (four-byte magic, u32
little-endian dims, then a flat little-endian payload) so the converter
stays decoupled from the classification package; the formats are the
only contract between the two.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io

from .errors import NoNumericArray, ShapeMismatch


@dataclass
class ConversionManifest:
    sources: list[str]
    variables: dict[str, str]
    outputs: dict[str, str]
    height: int
    width: int
    bands: int
    num_classes: int
    value_range: tuple[float, float]

    def to_json(self) -> str:
        payload = {
            "sources": self.sources,
            "variables": self.variables,
            "outputs": self.outputs,
            "dims": [self.height, self.width, self.bands],
            "num_classes": self.num_classes,
            "value_range": list(self.value_range),
        }
        return json.dumps(payload, indent=2, sort_keys=True)


# --- container reading ------------------------------------------------------


def load_container(path) -> dict:
    """Return name -> ndarray for every numeric variable in a .mat file.

    Handles both the classic format (via scipy) and v7.3 HDF5 containers
    (via h5py, if installed).  v7.3 arrays come back in MATLAB's
    column-major axis order, so they are transposed to match.
    """
    try:
        raw = scipy.io.loadmat(path)
        return {
            k: np.asarray(v)
            for k, v in raw.items()
            if not k.startswith("__") and isinstance(v, np.ndarray)
        }
    except NotImplementedError:
        pass  # v7.3 file; fall through to h5py
    try:
        import h5py
    except ImportError:
        raise NoNumericArray(
            f"{path} is a v7.3 container and h5py is not installed"
        ) from None
    out = {}
    with h5py.File(path, "r") as fh:
        def visit(name, obj):
            if isinstance(obj, h5py.Dataset) and obj.dtype.kind in "iuf":
                out[name] = np.transpose(obj[()])
        fh.visititems(visit)
    return out


def detect_scene(arrays: dict, override: str | None = None) -> str:
    """Pick the scene variable: largest 3-D numeric array."""
    if override is not None:
        if override not in arrays:
            raise NoNumericArray(f"no variable named {override!r} in container")
        return override
    best = None
    for name, arr in arrays.items():
        if arr.ndim == 3 and arr.dtype.kind in "iuf":
            if best is None or arr.size > arrays[best].size:
                best = name
    if best is None:
        raise NoNumericArray("no 3-D numeric array found for the scene")
    return best


def detect_labels(arrays: dict, override: str | None = None) -> str:
    """Pick the ground-truth variable: largest 2-D integer array."""
    if override is not None:
        if override not in arrays:
            raise NoNumericArray(f"no variable named {override!r} in container")
        return override
    best = None
    for name, arr in arrays.items():
        if arr.ndim == 2 and arr.dtype.kind in "iu":
            if best is None or arr.size > arrays[best].size:
                best = name
    if best is None:
        raise NoNumericArray("no 2-D integer array found for the ground truth")
    return best


# --- output writers ---------------------------------------------------------


def write_hsic(data: np.ndarray, path) -> None:
    data = np.ascontiguousarray(data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", b"HSIC", *data.shape))
        fh.write(data.tobytes())


def write_hsil(labels: np.ndarray, path) -> None:
    labels = np.ascontiguousarray(labels, dtype="<u2")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", b"HSIL", *labels.shape))
        fh.write(labels.tobytes())


# --- conversion -------------------------------------------------------------


def convert(scene_path, gt_path, out_prefix, scene_var=None, gt_var=None) -> ConversionManifest:
    scene_arrays = load_container(scene_path)
    gt_arrays = load_container(gt_path)
    scene_name = detect_scene(scene_arrays, scene_var)
    gt_name = detect_labels(gt_arrays, gt_var)
    scene = scene_arrays[scene_name]
    gt = gt_arrays[gt_name]
    if scene.shape[:2] != gt.shape:
        raise ShapeMismatch(
            f"scene is {scene.shape[0]}x{scene.shape[1]} but ground truth "
            f"is {gt.shape[0]}x{gt.shape[1]}"
        )
    if gt.min() < 0 or gt.max() > np.iinfo(np.uint16).max:
        raise NoNumericArray(
            f"ground truth values {gt.min()}..{gt.max()} do not fit class ids"
        )
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    cube_path = prefix.with_suffix(".hsic")
    label_path = prefix.with_suffix(".hsil")
    write_hsic(scene, cube_path)
    write_hsil(gt, label_path)
    return ConversionManifest(
        sources=[str(scene_path), str(gt_path)],
        variables={"scene": scene_name, "ground_truth": gt_name},
        outputs={"cube": str(cube_path), "labels": str(label_path)},
        height=scene.shape[0],
        width=scene.shape[1],
        bands=scene.shape[2],
        num_classes=int(gt.max()),
        value_range=(float(scene.min()), float(scene.max())),
    )


# --- synthetic fixtures -----------------------------------------------------


def make_synthetic(
    height, width, bands, num_classes, texture_scale, seed, out_prefix, noise=0.25
) -> ConversionManifest:
    """Generate a class-striped scene with per-class spectral signatures,
    per-class 2-D texture frequency, and band-correlated noise, then
    write it as an HSIC/HSIL pair.  Deterministic per seed.
    """
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    rng = np.random.default_rng([seed, 0])

    # horizontal class stripes; remainder rows go to the last class
    classes = np.minimum(
        np.arange(height) * num_classes // height, num_classes - 1
    )
    class_map = np.broadcast_to(classes[:, None], (height, width))

    signatures = rng.normal(size=(num_classes, bands))
    rows = np.arange(height)[:, None]
    cols = np.arange(width)[None, :]
    data = signatures[class_map].astype(np.float64)
    for k in range(num_classes):
        # class k gets spatial frequency (k+1)/4 along a random direction,
        # so higher class ids carry more high-frequency subband energy
        theta = rng.uniform(0, np.pi)
        freq = (k + 1) / 4.0
        wave = np.sin(2 * np.pi * freq * (rows * np.cos(theta) + cols * np.sin(theta)))
        data[class_map == k] += texture_scale * wave[class_map == k, None]
    if noise > 0:
        raw = rng.normal(scale=noise, size=(height, width, bands + 2))
        # [0.25, 0.5, 0.25] smoothing along the band axis correlates the noise
        data += 0.25 * raw[..., :-2] + 0.5 * raw[..., 1:-1] + 0.25 * raw[..., 2:]

    labels = (class_map + 1).astype(np.uint16)
    prefix = Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    cube_path = prefix.with_suffix(".hsic")
    label_path = prefix.with_suffix(".hsil")
    write_hsic(data, cube_path)
    write_hsil(labels, label_path)
    return ConversionManifest(
        sources=[],
        variables={},
        outputs={"cube": str(cube_path), "labels": str(label_path)},
        height=height,
        width=width,
        bands=bands,
        num_classes=num_classes,
        value_range=(float(data.min()), float(data.max())),
    )
