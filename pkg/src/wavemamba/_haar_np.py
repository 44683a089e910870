"""Pure-numpy Haar kernels; fallback when the compiled extension is absent.

Layout contract shared with the compiled kernel: inputs are C-contiguous
float64 stacks of square planes (n, p, p) with p even; analysis returns
(n, 4, p/2, p/2) in subband order [ll, lh, hl, hh], where the first
letter is the filter applied along the rows and the second along the
columns.  Filters are the orthonormal pair (1/sqrt(2), +-1/sqrt(2)),
stride 2, so synthesis is the exact adjoint/inverse.
"""

import numpy as np


def dwt2_batch(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    n, p, q = x.shape
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    c = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    out = np.empty((n, 4, p // 2, q // 2), dtype=np.float64)
    out[:, 0] = (a + b + c + d) * 0.5
    out[:, 1] = (a + b - c - d) * 0.5
    out[:, 2] = (a - b + c - d) * 0.5
    out[:, 3] = (a - b - c + d) * 0.5
    return out


def idwt2_batch(sb: np.ndarray) -> np.ndarray:
    sb = np.ascontiguousarray(sb, dtype=np.float64)
    n, four, h, w = sb.shape
    ll, lh, hl, hh = sb[:, 0], sb[:, 1], sb[:, 2], sb[:, 3]
    out = np.empty((n, 2 * h, 2 * w), dtype=np.float64)
    out[:, 0::2, 0::2] = (ll + lh + hl + hh) * 0.5
    out[:, 0::2, 1::2] = (ll + lh - hl - hh) * 0.5
    out[:, 1::2, 0::2] = (ll - lh + hl - hh) * 0.5
    out[:, 1::2, 1::2] = (ll - lh - hl + hh) * 0.5
    return out
