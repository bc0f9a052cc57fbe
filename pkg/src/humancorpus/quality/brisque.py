"""No-reference quality features from contrast-normalized coefficients.

Pipeline per scale (2 scales: original and one 2x box downsample):

1. MSCN map: (I - mu) / (sigma + C) with Gaussian-weighted local moments
   (7x7 window, sigma = 7/6, C = 1 by default, symmetric boundaries).
2. Symmetric GGD fit of the MSCN coefficients -> (alpha, sigma2).
3. Asymmetric GGD fits of the four neighboring-coefficient products
   (H, V, D1, D2) -> (alpha, eta, sigma_l2, sigma_r2) each.

That is 2 + 4 * 4 = 18 values per scale, 36 in total.  The trained scoring
regressor is not re-implemented; scoring loads a JSON model file instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .fits import DEFAULT_ALPHA_BRACKET, FitError, aggd_fit, ggd_fit

MIN_SIDE = 16  # two scales: the downsampled image must stay >= 8 px
N_FEATURES = 36
# An 8x8 second scale has 64 MSCN samples and 49 diagonal products; the
# public fit API keeps its 100-sample floor, the pipeline relaxes it here.
_MIN_FIT_SAMPLES = 32
DEFAULT_KERNEL_SIZE = 7
DEFAULT_KERNEL_SIGMA = 7.0 / 6.0
DEFAULT_C = 1.0

_ORIENTATIONS = ("H", "V", "D1", "D2")

# ITU-R 601 luminance weights for RGB -> gray.
_LUMA = np.array([0.299, 0.587, 0.114])


class ImageError(ValueError):
    pass


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Accept an HxW or HxWx3 array in [0, 255]; return float64 grayscale."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        arr = arr @ _LUMA
    if arr.ndim != 2:
        raise ImageError(f"expected HxW or HxWx3 pixels, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ImageError("pixel values must be finite")
    if arr.min() < 0 or arr.max() > 255:
        raise ImageError("pixel intensities must lie in [0, 255]")
    return arr


def gaussian_kernel1d(size: int = DEFAULT_KERNEL_SIZE,
                      sigma: float = DEFAULT_KERNEL_SIGMA) -> np.ndarray:
    if size < 3 or size % 2 == 0:
        raise ImageError("kernel size must be odd and >= 3")
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def mscn(image: np.ndarray, kernel_size: int = DEFAULT_KERNEL_SIZE,
         kernel_sigma: float = DEFAULT_KERNEL_SIGMA,
         c: float = DEFAULT_C) -> np.ndarray:
    """Locally normalized brightness coefficients, same shape as the input."""
    img = to_gray(image)
    if min(img.shape) < kernel_size:
        raise ImageError(
            f"image {img.shape} smaller than the {kernel_size}x{kernel_size} window")
    mu, sigma = kernels.local_mean_std(img, gaussian_kernel1d(kernel_size,
                                                              kernel_sigma))
    return (img - mu) / (sigma + c)


def brisque_features(image: np.ndarray,
                     kernel_size: int = DEFAULT_KERNEL_SIZE,
                     kernel_sigma: float = DEFAULT_KERNEL_SIGMA,
                     c: float = DEFAULT_C,
                     bracket: tuple[float, float] = DEFAULT_ALPHA_BRACKET,
                     ) -> np.ndarray:
    """36-dimensional feature vector; deterministic in the input."""
    img = to_gray(image)
    if img.shape[0] < MIN_SIDE or img.shape[1] < MIN_SIDE:
        raise ImageError(
            f"feature extraction needs at least {MIN_SIDE}x{MIN_SIDE} pixels, "
            f"got {img.shape[0]}x{img.shape[1]}")
    features: list[float] = []
    current = img
    for scale in (1, 2):
        coeffs = mscn(current, kernel_size, kernel_sigma, c)
        try:
            g = ggd_fit(coeffs.ravel(), bracket, min_samples=_MIN_FIT_SAMPLES)
        except FitError as exc:
            raise FitError(f"scale {scale} MSCN: {exc}") from exc
        features.extend((g.alpha, g.sigma2))
        for name, prod in zip(_ORIENTATIONS, kernels.paired_products(coeffs)):
            try:
                a = aggd_fit(prod.ravel(), bracket,
                             min_samples=_MIN_FIT_SAMPLES)
            except FitError as exc:
                raise FitError(f"scale {scale} {name}: {exc}") from exc
            features.extend((a.alpha, a.eta, a.sigma_l2, a.sigma_r2))
        if scale == 1:
            current = kernels.box_downsample2(current)
    out = np.array(features, dtype=np.float64)
    assert out.shape == (N_FEATURES,)
    return out


@dataclass(frozen=True)
class ScoreModel:
    """Pluggable scorer: published coefficient sets load from JSON.

    Kinds: "linear" (weights + bias over scaled features) and "rbf_svr"
    (libsvm-style support vectors, dual coefficients, gamma, rho).  When
    ``feature_min``/``feature_max`` are present, features are scaled to
    [-1, 1] first.
    """

    kind: str
    dims: int
    feature_min: tuple[float, ...] | None = None
    feature_max: tuple[float, ...] | None = None
    weights: tuple[float, ...] | None = None
    bias: float = 0.0
    support_vectors: tuple[tuple[float, ...], ...] | None = None
    dual_coef: tuple[float, ...] | None = None
    gamma: float = 1.0
    rho: float = 0.0


def load_score_model(path: str | Path) -> ScoreModel:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        kind = raw["kind"]
        dims = int(raw["dims"])
    except KeyError as exc:
        raise ValueError(f"score model missing key {exc}") from exc
    if kind not in ("linear", "rbf_svr"):
        raise ValueError(f"unknown score model kind {kind!r}")
    model = ScoreModel(
        kind=kind,
        dims=dims,
        feature_min=tuple(raw["feature_min"]) if "feature_min" in raw else None,
        feature_max=tuple(raw["feature_max"]) if "feature_max" in raw else None,
        weights=tuple(raw["weights"]) if "weights" in raw else None,
        bias=float(raw.get("bias", 0.0)),
        support_vectors=tuple(tuple(sv) for sv in raw["support_vectors"])
        if "support_vectors" in raw else None,
        dual_coef=tuple(raw["dual_coef"]) if "dual_coef" in raw else None,
        gamma=float(raw.get("gamma", 1.0)),
        rho=float(raw.get("rho", 0.0)),
    )
    _validate_model(model)
    return model


def _validate_model(model: ScoreModel) -> None:
    for name in ("feature_min", "feature_max", "weights"):
        vec = getattr(model, name)
        if vec is not None and len(vec) != model.dims:
            raise ValueError(f"{name} has {len(vec)} entries, expected {model.dims}")
    if model.kind == "linear" and model.weights is None:
        raise ValueError("linear model requires weights")
    if model.kind == "rbf_svr":
        if model.support_vectors is None or model.dual_coef is None:
            raise ValueError("rbf_svr model requires support_vectors and dual_coef")
        if len(model.support_vectors) != len(model.dual_coef):
            raise ValueError("support_vectors and dual_coef length mismatch")
        for sv in model.support_vectors:
            if len(sv) != model.dims:
                raise ValueError("support vector dimension mismatch")


def brisque_score(features: np.ndarray, model: ScoreModel) -> float:
    """Evaluate a loaded model on a feature vector (pure function)."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.dims,):
        raise ValueError(
            f"feature vector has shape {x.shape}, model expects ({model.dims},)")
    if model.feature_min is not None and model.feature_max is not None:
        lo = np.asarray(model.feature_min)
        hi = np.asarray(model.feature_max)
        span = hi - lo
        if np.any(span <= 0):
            raise ValueError("feature_max must exceed feature_min")
        x = 2.0 * (x - lo) / span - 1.0
    if model.kind == "linear":
        return float(np.dot(np.asarray(model.weights), x) + model.bias)
    sv = np.asarray(model.support_vectors, dtype=np.float64)
    coef = np.asarray(model.dual_coef, dtype=np.float64)
    dist2 = ((sv - x) ** 2).sum(axis=1)
    return float(coef @ np.exp(-model.gamma * dist2) - model.rho)
