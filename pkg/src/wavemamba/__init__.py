"""Wavelet-enhanced spatial-spectral state-space classifier for HSI scenes."""

from .hsi_io import HsiCube, LabelMap, load_cube, load_labels, write_cube, write_labels
from .model import ModelConfig
from .train import TrainConfig, ablate_wavelet, evaluate, predict_map, train
from .wavelet import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "HsiCube",
    "LabelMap",
    "ModelConfig",
    "TrainConfig",
    "KERNEL_BACKEND",
    "load_cube",
    "load_labels",
    "write_cube",
    "write_labels",
    "train",
    "evaluate",
    "ablate_wavelet",
    "predict_map",
    "__version__",
]
