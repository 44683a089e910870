"""Band reduction, normalization, patch extraction, tokens and splits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyClass, OddPatch, PatchTooLarge
from .hsi_io import HsiCube, LabelMap


@dataclass
class Patch:
    """A P x P x C* window with the label of its center pixel."""

    window: np.ndarray
    center_row: int
    center_col: int
    label: int


@dataclass
class TokenPair:
    """Spatial tokens S (C* x P^2) and spectral tokens F (P^2 x C*); S == F.T."""

    spatial: np.ndarray
    spectral: np.ndarray


@dataclass
class SplitSet:
    """Disjoint train/validation/test patch indices covering all labeled patches."""

    train: list[int]
    validation: list[int]
    test: list[int]
    seed: int
    fractions: tuple[float, float, float]


def reduce_bands(cube: HsiCube, target: int) -> HsiCube:
    """Project each pixel spectrum onto the top `target` principal components.

    Components are ordered by descending eigenvalue of the band covariance
    over all pixels.  If the covariance rank is below `target`, the output
    is reduced to the available rank and a warning is issued.
    """
    c = cube.bands
    if not 1 <= target <= c:
        raise ValueError(f"target bands must be in [1, {c}], got {target}")
    x = cube.data.reshape(-1, c)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / max(x.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    tol = max(eigvals[0], 0.0) * 1e-12
    rank = int(np.sum(eigvals > tol))
    k = target
    if rank < target:
        warnings.warn(
            f"band covariance rank {rank} < requested {target}; reducing",
            stacklevel=2,
        )
        k = max(rank, 1)
    scores = centered @ eigvecs[:, :k]
    return HsiCube(scores.reshape(cube.height, cube.width, k))


def explained_variance_ratio(cube: HsiCube) -> np.ndarray:
    """Per-band variance of a cube as a fraction of the total."""
    x = cube.data.reshape(-1, cube.bands)
    var = x.var(axis=0)
    total = var.sum()
    return var / total if total > 0 else var


def normalize(cube: HsiCube) -> HsiCube:
    """Zero mean, unit variance per band over all pixels; constant bands -> 0."""
    x = cube.data.reshape(-1, cube.bands)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    out = (x - mean) / std
    return HsiCube(out.reshape(cube.data.shape))


def candidate_count(height: int, width: int, patch_side: int) -> int:
    return (height - patch_side + 1) * (width - patch_side + 1)


def extract_patches(cube: HsiCube, labels: LabelMap, patch_side: int) -> list[Patch]:
    """One window per top-left anchor; keep windows with a labeled center.

    The center of the window anchored at (r, c) is (r + P/2 - 1, c + P/2 - 1).
    """
    p = patch_side
    if p % 2:
        raise OddPatch(f"patch side must be even, got {p}")
    if p > cube.height or p > cube.width:
        raise PatchTooLarge(f"patch {p} exceeds scene {cube.height}x{cube.width}")
    if (labels.height, labels.width) != (cube.height, cube.width):
        raise ValueError("label map dims do not match cube")
    half = p // 2 - 1
    patches = []
    for r in range(cube.height - p + 1):
        for c in range(cube.width - p + 1):
            cr, cc = r + half, c + half
            lab = int(labels.labels[cr, cc])
            if lab == 0:
                continue
            window = np.ascontiguousarray(cube.data[r : r + p, c : c + p, :])
            patches.append(Patch(window, cr, cc, lab))
    return patches


def make_tokens(patch: Patch) -> TokenPair:
    """Spectral tokens: one band vector per pixel (row-major); spatial: transpose."""
    p = patch.window.shape[0]
    c = patch.window.shape[2]
    spectral = patch.window.reshape(p * p, c)
    return TokenPair(spatial=spectral.T.copy(), spectral=spectral.copy())


def split_dataset(
    patches: list[Patch],
    fractions: tuple[float, float, float],
    seed: int,
) -> SplitSet:
    """Per-class stratified shuffle into train/validation/test index lists."""
    tr, va, te = fractions
    if min(tr, va, te) <= 0 or abs(tr + va + te - 100.0) > 1e-9:
        raise ValueError(f"fractions must be positive and sum to 100, got {fractions}")
    if not patches:
        raise EmptyClass("no labeled patches to split")
    by_class: dict[int, list[int]] = {}
    for i, patch in enumerate(patches):
        by_class.setdefault(patch.label, []).append(i)
    for lab in range(1, max(by_class) + 1):
        if lab not in by_class:
            raise EmptyClass(f"class {lab} has zero samples")
    rng = np.random.default_rng([seed, 0])
    train: list[int] = []
    validation: list[int] = []
    test: list[int] = []
    for lab in sorted(by_class):
        idx = np.array(by_class[lab])
        rng.shuffle(idx)
        n = len(idx)
        n_tr = int(round(n * tr / 100.0))
        if n >= 3:
            n_tr = max(n_tr, 1)
        n_tr = min(n_tr, n)
        n_va = min(int(round(n * va / 100.0)), n - n_tr)
        train.extend(int(i) for i in idx[:n_tr])
        validation.extend(int(i) for i in idx[n_tr : n_tr + n_va])
        test.extend(int(i) for i in idx[n_tr + n_va :])
    return SplitSet(train, validation, test, seed, (tr, va, te))
