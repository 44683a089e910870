"""Binary HSI cube / label-map formats and classification-map rendering.

HSIC cube file:  magic "HSIC", u32le H, W, C, then H*W*C float32le values
in band-interleaved-by-pixel order (row-major pixels, bands contiguous
per pixel).  HSIL label file: magic "HSIL", u32le H, W, then H*W u16le
labels, 0 meaning unlabeled.  Maps are rendered as binary PPM (P6).

Values are float32 on disk and float64 in memory.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, DimMismatch, IoFailure, MissingPaletteEntry, NonFinite

CUBE_MAGIC = b"HSIC"
LABEL_MAGIC = b"HSIL"


@dataclass
class HsiCube:
    """An H x W x C data volume, float64, row-major."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise DimMismatch(f"cube must be 3-D, got shape {self.data.shape}")
        if min(self.data.shape) < 1:
            raise DimMismatch(f"cube dims must be >= 1, got {self.data.shape}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]


@dataclass
class LabelMap:
    """Per-pixel class ids, u16, 0 = unlabeled."""

    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint16)
        if self.labels.ndim != 2:
            raise DimMismatch(f"label map must be 2-D, got shape {self.labels.shape}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max(initial=0))


# Palette: mapping class id -> (r, g, b), each in [0, 255].

def default_palette(num_classes: int) -> dict[int, tuple[int, int, int]]:
    """Black for unlabeled, then well-spread hues for classes 1..K."""
    palette = {0: (0, 0, 0)}
    for k in range(1, num_classes + 1):
        h = (k - 1) / max(num_classes, 1)
        palette[k] = _hsv_to_rgb(h, 0.85, 0.95)
    return palette


def _hsv_to_rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    i = int(h * 6.0) % 6
    f = h * 6.0 - int(h * 6.0)
    p, q, t = v * (1 - s), v * (1 - s * f), v * (1 - s * (1 - f))
    r, g, b = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def load_cube(path) -> HsiCube:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if raw[:4] != CUBE_MAGIC:
        raise BadMagic(f"{path}: not an HSIC file")
    if len(raw) < 16:
        raise DimMismatch(f"{path}: truncated header")
    h, w, c = struct.unpack("<III", raw[4:16])
    if h < 1 or w < 1 or c < 1:
        raise DimMismatch(f"{path}: bad dims ({h}, {w}, {c})")
    payload = raw[16:]
    if len(payload) != h * w * c * 4:
        raise DimMismatch(
            f"{path}: payload is {len(payload)} bytes, expected {h * w * c * 4}"
        )
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.isfinite(values).all():
        raise NonFinite(f"{path}: payload contains NaN or Inf")
    return HsiCube(values.reshape(h, w, c))


def write_cube(cube: HsiCube, path) -> None:
    header = CUBE_MAGIC + struct.pack("<III", cube.height, cube.width, cube.bands)
    payload = cube.data.astype("<f4").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_labels(path) -> LabelMap:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if raw[:4] != LABEL_MAGIC:
        raise BadMagic(f"{path}: not an HSIL file")
    if len(raw) < 12:
        raise DimMismatch(f"{path}: truncated header")
    h, w = struct.unpack("<II", raw[4:12])
    if h < 1 or w < 1:
        raise DimMismatch(f"{path}: bad dims ({h}, {w})")
    payload = raw[12:]
    if len(payload) != h * w * 2:
        raise DimMismatch(f"{path}: payload is {len(payload)} bytes, expected {h * w * 2}")
    labels = np.frombuffer(payload, dtype="<u2").reshape(h, w)
    return LabelMap(labels)


def write_labels(labels: LabelMap, path) -> None:
    header = LABEL_MAGIC + struct.pack("<II", labels.height, labels.width)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(labels.labels.astype("<u2").tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def render_map(labels: LabelMap, palette: dict[int, tuple[int, int, int]], path) -> None:
    """Write the label map as a binary PPM (P6), one RGB triple per pixel."""
    present = np.unique(labels.labels)
    missing = [int(l) for l in present if int(l) not in palette]
    if missing:
        raise MissingPaletteEntry(f"no palette entry for labels {missing}")
    lut = np.zeros((int(present.max(initial=0)) + 1, 3), dtype=np.uint8)
    for lab, rgb in palette.items():
        if lab < lut.shape[0]:
            lut[lab] = rgb
    pixels = lut[labels.labels]
    header = f"P6\n{labels.width} {labels.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(pixels.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
