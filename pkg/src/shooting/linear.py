"""Ordinary least squares with coefficient-covariance offset sampling.

The fitted model keeps the coefficient covariance s^2 (X'X)^-1 and its
lower-triangular factor so that coefficient perturbations can be drawn
from the same multivariate normal law that describes resampling noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import Dataset
from .rng import OFFSET_STREAM, make_rng


class SingularDesignError(ValueError):
    """The intercept-augmented design matrix is numerically rank deficient."""


class FactorizationError(ValueError):
    """Covariance factorization failed even after jitter escalation."""


MAX_CONDITION = 1e12

# Jitter ladder: 1e-12 * trace(C)/(n+1) escalating tenfold up to 1e-6 * same.
_JITTER_LADDER = [1e-12 * 10**i for i in range(7)]


def augment(features) -> np.ndarray:
    """Prepend an intercept column of ones to a feature matrix."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    return np.hstack([np.ones((features.shape[0], 1)), features])


@dataclass(frozen=True)
class LinearModel:
    """OLS coefficients plus the sampling law of their estimation noise.

    coefficients has the intercept first; covariance is the possibly
    jittered matrix that covariance_factor reproduces as L L'.
    """

    coefficients: np.ndarray
    residual_variance: float
    covariance: np.ndarray
    covariance_factor: np.ndarray
    jitter: float = 0.0


@dataclass(frozen=True)
class OffsetSet:
    """Sampled coefficient offsets and their projection through the design.

    offsets is (n+1) x k with one draw per column; projected is the
    intercept-augmented feature matrix times offsets, i.e. each column is
    the per-row prediction shift that offset induces.
    """

    offsets: np.ndarray
    projected: np.ndarray


def _factor_covariance(cov: np.ndarray) -> tuple[np.ndarray, float]:
    p = cov.shape[0]
    scale = float(np.trace(cov)) / p
    if scale == 0.0:
        if np.any(cov):
            raise FactorizationError("covariance has zero trace but nonzero entries")
        return np.zeros_like(cov), 0.0
    for relative in [0.0] + _JITTER_LADDER:
        jitter = relative * scale
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(p)), jitter
        except np.linalg.LinAlgError:
            continue
    raise FactorizationError("covariance not factorizable within the jitter ladder")


def fit_ols(d: Dataset) -> LinearModel:
    """Least-squares fit with intercept via QR on the augmented design."""
    x = augment(d.features)
    y = d.target
    m, p = x.shape
    if m <= p:
        raise SingularDesignError(f"need more rows ({m}) than coefficients ({p})")
    singular_values = np.linalg.svd(x, compute_uv=False)
    if singular_values[-1] == 0.0 or singular_values[0] / singular_values[-1] > MAX_CONDITION:
        raise SingularDesignError("design matrix condition estimate exceeds 1e12")
    q, r = np.linalg.qr(x)
    coef = scipy.linalg.solve_triangular(r, q.T @ y)
    resid = y - x @ coef
    rss = float(resid @ resid)
    if rss <= 1e-26 * max(float(y @ y), 1.0):
        # QR leaves machine-noise residuals on exactly-linear data; a true
        # zero here lets the degenerate zero-covariance path engage
        rss = 0.0
    s2 = rss / (m - p)
    r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
    cov = s2 * (r_inv @ r_inv.T)
    cov = 0.5 * (cov + cov.T)
    factor, jitter = _factor_covariance(cov)
    if jitter:
        cov = cov + jitter * np.eye(p)
    return LinearModel(coef, s2, cov, factor, jitter)


def sample_offsets(model: LinearModel, features, k: int, seed: int) -> OffsetSet:
    """Draw k offsets from N(0, C) and project them through the design.

    Column i comes from a stream derived from (seed, i), so the result is
    independent of evaluation order and stable under parallel sampling.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = model.coefficients.size
    x = augment(features)
    if x.shape[1] != p:
        raise ValueError(
            f"feature count {x.shape[1] - 1} does not match model ({p - 1})"
        )
    draws = np.empty((p, k))
    for i in range(k):
        z = make_rng(seed, OFFSET_STREAM, i).standard_normal(p)
        draws[:, i] = model.covariance_factor @ z
    return OffsetSet(draws, x @ draws)


def predict_linear(model: LinearModel, features) -> np.ndarray:
    """Linear prediction on the intercept-augmented features."""
    x = augment(features)
    if x.shape[1] != model.coefficients.size:
        raise ValueError(
            f"feature count {x.shape[1] - 1} does not match model "
            f"({model.coefficients.size - 1})"
        )
    return x @ model.coefficients
