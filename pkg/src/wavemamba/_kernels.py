"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set WAVEMAMBA_PURE_PYTHON=1 to force the numpy fallback.
"""

import os

if os.environ.get("WAVEMAMBA_PURE_PYTHON"):
    from . import _haar_np as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _haar_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _haar_np as _impl

        BACKEND = "numpy"

dwt2_batch = _impl.dwt2_batch
idwt2_batch = _impl.idwt2_batch
