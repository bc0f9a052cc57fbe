"""NumPy/SciPy reference implementations of the image-quality kernels.

This is the fallback backend; the Cython module ``_core`` implements the
same four functions with identical semantics.  Both use half-sample
symmetric boundary handling (np.pad "symmetric" / ndimage "reflect").
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

BACKEND = "numpy"


def local_mean_std(image: np.ndarray, kernel1d: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-weighted local mean and standard deviation (separable)."""
    img = np.ascontiguousarray(image, dtype=np.float64)
    k = np.ascontiguousarray(kernel1d, dtype=np.float64)
    mu = correlate1d(correlate1d(img, k, axis=0, mode="reflect"),
                     k, axis=1, mode="reflect")
    m2 = correlate1d(correlate1d(img * img, k, axis=0, mode="reflect"),
                     k, axis=1, mode="reflect")
    var = m2 - mu * mu
    np.maximum(var, 0.0, out=var)
    return mu, np.sqrt(var)


def paired_products(m: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Neighboring-coefficient products: H, V, and both diagonals."""
    h = m[:, :-1] * m[:, 1:]
    v = m[:-1, :] * m[1:, :]
    d1 = m[:-1, :-1] * m[1:, 1:]
    d2 = m[1:, :-1] * m[:-1, 1:]
    return h, v, d1, d2


def signed_moments(x: np.ndarray) -> tuple[int, float, float, int, float, int, float]:
    """Single-pass accumulation for the distribution fits.

    Returns (n, sum|x|, sum x^2, n_neg, sum_{x<0} x^2, n_pos, sum_{x>0} x^2).
    Zeros count toward n and the global sums but neither one-sided moment.
    """
    flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    sq = flat * flat
    neg = flat < 0
    pos = flat > 0
    return (
        flat.size,
        float(np.abs(flat).sum()),
        float(sq.sum()),
        int(neg.sum()),
        float(sq[neg].sum()),
        int(pos.sum()),
        float(sq[pos].sum()),
    )


def box_downsample2(image: np.ndarray) -> np.ndarray:
    """2x downsample by averaging 2x2 blocks (odd edges cropped)."""
    img = np.asarray(image, dtype=np.float64)
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    if h2 == 0 or w2 == 0:
        raise ValueError("image too small to downsample")
    return img[:2 * h2, :2 * w2].reshape(h2, 2, w2, 2).mean(axis=(1, 3))
