"""Moment-matching fits for (asymmetric) generalized Gaussian distributions.

Both fits invert the same monotone moment ratio

    r(alpha) = Gamma(2/alpha)^2 / (Gamma(1/alpha) * Gamma(3/alpha))

which equals (E|x|)^2 / E[x^2] for a zero-mean GGD with shape ``alpha``
(2/pi at alpha = 2, i.e. Gaussian; 1/2 at alpha = 1, Laplacian).  The
inversion is a bisection over a fixed bracket; ratios outside the bracket's
range clamp to its endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels

DEFAULT_ALPHA_BRACKET = (0.1, 10.0)
MIN_FIT_SAMPLES = 100


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class GgdFit:
    alpha: float   # shape
    sigma2: float  # second moment E[x^2]


@dataclass(frozen=True)
class AggdFit:
    alpha: float
    sigma_l2: float  # E[x^2 | x < 0]
    sigma_r2: float  # E[x^2 | x > 0]
    eta: float       # distribution mean implied by the fit


def shape_ratio(alpha: float) -> float:
    """r(alpha); computed in log space to stay stable at small alpha."""
    return math.exp(2.0 * gammaln(2.0 / alpha)
                    - gammaln(1.0 / alpha) - gammaln(3.0 / alpha))


def solve_shape(ratio: float,
                bracket: tuple[float, float] = DEFAULT_ALPHA_BRACKET,
                tol: float = 1e-6) -> float:
    """Invert the monotone-increasing moment ratio by bisection."""
    lo, hi = bracket
    if not 0 < lo < hi:
        raise FitError(f"invalid bracket {bracket}")
    if not math.isfinite(ratio):
        raise FitError(f"moment ratio is not finite: {ratio!r}")
    if ratio <= shape_ratio(lo):
        return lo
    if ratio >= shape_ratio(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if shape_ratio(mid) < ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_samples(n: int, floor: int) -> None:
    if n < floor:
        raise FitError(f"need at least {floor} samples, got {n}")


def ggd_fit(samples: np.ndarray,
            bracket: tuple[float, float] = DEFAULT_ALPHA_BRACKET,
            tol: float = 1e-6,
            min_samples: int = MIN_FIT_SAMPLES) -> GgdFit:
    """Symmetric fit: alpha from the moment ratio, sigma2 = E[x^2].

    ``min_samples`` exists for the feature pipeline: a 16x16 image's second
    scale is 8x8, i.e. fewer coefficients than the default floor.
    """
    x = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise FitError("samples must be finite")
    n, sum_abs, sum_sq, *_ = kernels.signed_moments(x)
    _check_samples(n, min_samples)
    if sum_sq == 0.0:
        raise FitError("degenerate samples: all zero")
    mean_abs = sum_abs / n
    mean_sq = sum_sq / n
    alpha = solve_shape(mean_abs * mean_abs / mean_sq, bracket, tol)
    return GgdFit(alpha=alpha, sigma2=mean_sq)


def aggd_fit(samples: np.ndarray,
             bracket: tuple[float, float] = DEFAULT_ALPHA_BRACKET,
             tol: float = 1e-6,
             min_samples: int = MIN_FIT_SAMPLES) -> AggdFit:
    """Asymmetric fit from one-sided second moments.

    The generalized ratio R = r * (g^3 + 1)(g + 1) / (g^2 + 1)^2 with
    g = sigma_l / sigma_r reduces to the symmetric ratio at g = 1; eta is
    the implied distribution mean.
    """
    x = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise FitError("samples must be finite")
    n, sum_abs, sum_sq, n_neg, sum_sq_neg, n_pos, sum_sq_pos = \
        kernels.signed_moments(x)
    _check_samples(n, min_samples)
    if n_neg == 0 or n_pos == 0:
        raise FitError("samples must contain both signs")
    sigma_l2 = sum_sq_neg / n_neg
    sigma_r2 = sum_sq_pos / n_pos
    if sigma_l2 == 0.0 or sigma_r2 == 0.0:
        raise FitError("degenerate one-sided moments")
    g = math.sqrt(sigma_l2 / sigma_r2)
    r_hat = (sum_abs / n) ** 2 / (sum_sq / n)
    big_r = r_hat * (g ** 3 + 1.0) * (g + 1.0) / (g ** 2 + 1.0) ** 2
    alpha = solve_shape(big_r, bracket, tol)
    sigma_l = math.sqrt(sigma_l2)
    sigma_r = math.sqrt(sigma_r2)
    eta = ((sigma_r - sigma_l)
           * math.exp(gammaln(2.0 / alpha) - gammaln(1.0 / alpha))
           * math.exp(0.5 * (gammaln(1.0 / alpha) - gammaln(3.0 / alpha))))
    return AggdFit(alpha=alpha, sigma_l2=sigma_l2, sigma_r2=sigma_r2, eta=eta)
