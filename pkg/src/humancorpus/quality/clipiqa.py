"""Prompt-contrast quality score from precomputed embeddings.

The embedder itself is external: callers supply the image embedding and the
embeddings of a positive and a negative quality prompt.  The score is the
softmax weight of the positive prompt over scaled cosine similarities, so
it lies in (0, 1) and increases with image-positive alignment.
"""

from __future__ import annotations

import math

import numpy as np

DEFAULT_LOGIT_SCALE = 100.0


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"embedding shape mismatch: {x.shape} vs {y.shape}")
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("zero-norm embedding")
    return float(np.dot(x, y) / (nx * ny))


def clipiqa_score(image_emb: np.ndarray, pos_emb: np.ndarray,
                  neg_emb: np.ndarray,
                  logit_scale: float = DEFAULT_LOGIT_SCALE) -> float:
    """Softmax over (scale * cos(img, pos), scale * cos(img, neg)),
    positive component."""
    cos_pos = cosine(image_emb, pos_emb)
    cos_neg = cosine(image_emb, neg_emb)
    # Numerically stable two-way softmax; exact 0.5 at equal cosines.
    return 1.0 / (1.0 + math.exp(logit_scale * (cos_neg - cos_pos)))
