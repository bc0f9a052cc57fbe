"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set ``HUMANCORPUS_NO_EXT=1`` to force the NumPy backend (used by the
benchmark to compare both paths).
"""

from __future__ import annotations

import os

from . import _ref

if os.environ.get("HUMANCORPUS_NO_EXT"):
    _backend = _ref
else:
    try:
        from . import _core as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _ref

BACKEND: str = _backend.BACKEND
local_mean_std = _backend.local_mean_std
paired_products = _backend.paired_products
signed_moments = _backend.signed_moments
box_downsample2 = _backend.box_downsample2

__all__ = [
    "BACKEND",
    "box_downsample2",
    "local_mean_std",
    "paired_products",
    "signed_moments",
]
