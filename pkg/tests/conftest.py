import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synthdata import make_scene  # noqa: E402

from wavemamba import preprocess
from wavemamba.model import ModelConfig
from wavemamba.train import TrainConfig


@pytest.fixture
def tiny_scene():
    """Small labeled scene suitable for fast end-to-end runs."""
    return make_scene(24, 24, 6, 3, texture_scale=0.8, noise=0.2, seed=11)


def build_dataset(cube, labels, patch_side, reduced_bands, fractions, seed):
    reduced = preprocess.normalize(preprocess.reduce_bands(cube, reduced_bands))
    patches = preprocess.extract_patches(reduced, labels, patch_side)
    split = preprocess.split_dataset(patches, fractions, seed)
    return patches, split


def small_train_config(num_classes, patch_side=4, reduced_bands=4, **kwargs):
    model = ModelConfig(
        patch_side=patch_side,
        reduced_bands=reduced_bands,
        num_classes=num_classes,
        embed_dim=kwargs.pop("embed_dim", 16),
        state_dim=kwargs.pop("state_dim", 16),
        dropout=kwargs.pop("dropout", 0.1),
        wavelet_enabled=kwargs.pop("wavelet_enabled", True),
    )
    return TrainConfig(model=model, **kwargs)
