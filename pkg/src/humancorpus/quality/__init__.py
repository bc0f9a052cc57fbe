"""No-reference image quality scoring: feature extraction, fits, histograms."""

from .brisque import (
    ImageError, ScoreModel, brisque_features, brisque_score, gaussian_kernel1d,
    load_score_model, mscn, to_gray,
)
from .clipiqa import clipiqa_score, cosine
from .fits import AggdFit, FitError, GgdFit, aggd_fit, ggd_fit, shape_ratio, solve_shape
from .histogram import ScoreHistogram, equal_bins, score_histogram
from .kernels import BACKEND

__all__ = [
    "AggdFit",
    "BACKEND",
    "FitError",
    "GgdFit",
    "ImageError",
    "ScoreHistogram",
    "ScoreModel",
    "aggd_fit",
    "brisque_features",
    "brisque_score",
    "clipiqa_score",
    "cosine",
    "equal_bins",
    "gaussian_kernel1d",
    "ggd_fit",
    "load_score_model",
    "mscn",
    "score_histogram",
    "shape_ratio",
    "solve_shape",
    "to_gray",
]
