"""Single-level 2D Haar analysis/synthesis and the eight-subband stack.

Subband naming: first letter = filter along rows, second = filter along
columns (ll = lowpass both).  Filters are orthonormal (1/sqrt(2)), so
one level conserves energy exactly and inverts losslessly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND, dwt2_batch, idwt2_batch
from .errors import OddDimension

__all__ = [
    "BACKEND",
    "Subbands2D",
    "SubbandStack",
    "dwt2_haar",
    "idwt2_haar",
    "decompose_tokens",
    "decompose_volume",
    "dwt2_batch",
    "idwt2_batch",
]


@dataclass
class Subbands2D:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray


@dataclass
class SubbandStack:
    """(P/2, P/2, 8*C) volume; channel blocks in order
    [S_ll, S_lh, S_hl, S_hh, F_ll, F_lh, F_hl, F_hh], each C deep."""

    data: np.ndarray


def _check_even(shape):
    if any(s % 2 for s in shape) or any(s < 2 for s in shape):
        raise OddDimension(f"Haar analysis needs even sides >= 2, got {shape}")


def dwt2_haar(plane: np.ndarray) -> Subbands2D:
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise OddDimension(f"expected a 2-D plane, got shape {plane.shape}")
    _check_even(plane.shape)
    sb = dwt2_batch(plane[None])
    return Subbands2D(ll=sb[0, 0], lh=sb[0, 1], hl=sb[0, 2], hh=sb[0, 3])


def idwt2_haar(subbands: Subbands2D) -> np.ndarray:
    sb = np.stack(
        [subbands.ll, subbands.lh, subbands.hl, subbands.hh], axis=0
    ).astype(np.float64)
    return idwt2_batch(sb[None])[0]


def decompose_volume(volume: np.ndarray) -> np.ndarray:
    """Per-band analysis of a (P, P, C) volume -> (P/2, P/2, 4C) with
    channel blocks [ll, lh, hl, hh], each C deep."""
    volume = np.asarray(volume, dtype=np.float64)
    p, q, c = volume.shape
    _check_even((p, q))
    planes = np.ascontiguousarray(volume.transpose(2, 0, 1))
    sb = dwt2_batch(planes)  # (c, 4, h, w)
    return np.ascontiguousarray(sb.transpose(2, 3, 1, 0).reshape(p // 2, q // 2, 4 * c))


def decompose_tokens(s_hat: np.ndarray, f_hat: np.ndarray) -> SubbandStack:
    """Eight-subband stack from the gated spatial and spectral volumes."""
    s_hat = np.asarray(s_hat, dtype=np.float64)
    f_hat = np.asarray(f_hat, dtype=np.float64)
    if s_hat.shape != f_hat.shape:
        raise OddDimension(
            f"volume shapes differ: {s_hat.shape} vs {f_hat.shape}"
        )
    return SubbandStack(
        np.concatenate([decompose_volume(s_hat), decompose_volume(f_hat)], axis=2)
    )
