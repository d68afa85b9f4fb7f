"""Gradient-ensemble regressor built from perturbed linear initializations.

Fit draws k coefficient offsets around the least-squares solution, scales
them by nu (tuned or fixed), trains one tree per offset on the induced
gradient target, and predicts by averaging the k corrected estimates.
Subtracting a perfect gradient estimate from its initial vector lands
exactly on Y, which is what pins the sign conventions here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .linear import LinearModel, OffsetSet, augment, fit_ols, sample_offsets
from .nuopt import (
    DEFAULT_GRID_POINTS,
    DEFAULT_NU_HI,
    DEFAULT_NU_LO,
    DEFAULT_NU_TOL,
    DegenerateCorrelationError,
    NuResult,
    balanced_magnitude_weight,
    build_cache,
    minimize_nu,
)
from .rng import TREE_STREAM, derive_seed
from .tree import RegressionTree, TreeParams, fit_tree, predict_tree

DEFAULT_NU_SEARCH = (DEFAULT_NU_LO, DEFAULT_NU_HI, DEFAULT_GRID_POINTS, DEFAULT_NU_TOL)

# nu used when the correlation objective is degenerate (perfect linear fit)
FALLBACK_NU = 1.0


@dataclass(frozen=True)
class SRConfig:
    """Ensemble settings. nu None means tune it; a float fixes it.

    magnitude_weight None applies the balanced weight (magnitude term
    rescaled to the correlation term's nu=0 value); 1.0 gives the raw
    unweighted sum of the two terms.
    """

    k: int = 100
    nu: float | None = None
    tree_params: TreeParams = TreeParams()
    seed: int = 0
    nu_search: tuple[float, float, int, float] = DEFAULT_NU_SEARCH
    magnitude_weight: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.nu is not None and self.nu < 0.0:
            raise ValueError("fixed nu must be >= 0")
        if self.magnitude_weight is not None and self.magnitude_weight < 0.0:
            raise ValueError("magnitude_weight must be >= 0")


@dataclass(frozen=True)
class ShootingEnsemble:
    linear: LinearModel
    offsets: OffsetSet
    nu: float
    trees: tuple[RegressionTree, ...]
    nu_diagnostics: NuResult | None = None

    @property
    def k(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return self.linear.coefficients.size - 1


def gradient_targets(
    linear: LinearModel, offsets: OffsetSet, nu: float, d: Dataset
) -> np.ndarray:
    """Column i is the loss gradient at initial vector i: X(B + nu*D_i) - Y."""
    if offsets.projected.shape[0] != d.n_rows:
        raise ValueError("offset projection rows do not match the dataset")
    z = augment(d.features) @ linear.coefficients - d.target
    return z[:, None] + nu * offsets.projected


def _row_means(columns: np.ndarray) -> np.ndarray:
    # exact accumulation makes the mean invariant to estimator order
    k = columns.shape[1]
    return np.array([math.fsum(row) for row in columns]) / k


def fit_shooting(train: Dataset, config: SRConfig = SRConfig()) -> ShootingEnsemble:
    """OLS, offset sampling, nu selection, then one tree per gradient target."""
    linear = fit_ols(train)
    offsets = sample_offsets(linear, train.features, config.k, config.seed)
    diagnostics: NuResult | None = None
    if config.nu is not None:
        nu = config.nu
    elif config.k < 2:
        warnings.warn(
            "nu tuning needs at least 2 estimators; using nu=1", RuntimeWarning
        )
        nu = FALLBACK_NU
    else:
        z = augment(train.features) @ linear.coefficients - train.target
        try:
            if linear.residual_variance == 0.0:
                # exact linear fit: offsets are all zero and z is machine
                # noise, so the correlation surface carries no signal
                raise DegenerateCorrelationError(
                    "perfect linear fit leaves nothing to decorrelate"
                )
            cache = build_cache(z, offsets.projected)
            weight = (
                balanced_magnitude_weight(cache)
                if config.magnitude_weight is None
                else config.magnitude_weight
            )
            lo, hi, grid_points, tol = config.nu_search
            diagnostics = minimize_nu(cache, lo, hi, grid_points, tol, weight)
            nu = diagnostics.nu
        except DegenerateCorrelationError as exc:
            warnings.warn(
                f"nu tuning degenerate ({exc}); using nu={FALLBACK_NU}",
                RuntimeWarning,
            )
            nu = FALLBACK_NU
    targets = gradient_targets(linear, offsets, nu, train)
    trees = tuple(
        fit_tree(
            train.features,
            targets[:, i],
            replace(config.tree_params, rng_seed=derive_seed(config.seed, TREE_STREAM, i)),
        )
        for i in range(config.k)
    )
    return ShootingEnsemble(linear, offsets, nu, trees, diagnostics)


def initial_vectors(ensemble: ShootingEnsemble, features) -> np.ndarray:
    """Per-estimator linear predictions X(B + nu*D_i) on arbitrary features."""
    x = augment(features)
    base = x @ ensemble.linear.coefficients
    return base[:, None] + ensemble.nu * (x @ ensemble.offsets.offsets)


def predict_per_estimator(ensemble: ShootingEnsemble, features) -> np.ndarray:
    """Column i: initial vector i minus tree i's gradient estimate."""
    x = np.asarray(features, dtype=float)
    initial = initial_vectors(ensemble, x)
    for i, tree in enumerate(ensemble.trees):
        initial[:, i] -= predict_tree(tree, x)
    return initial


def predict(ensemble: ShootingEnsemble, features) -> np.ndarray:
    """Mean of the per-estimator corrected predictions."""
    return _row_means(predict_per_estimator(ensemble, features))


def oracle_predict(
    linear: LinearModel, offsets: OffsetSet, nu: float, d: Dataset
) -> tuple[np.ndarray, np.ndarray]:
    """Replace every tree with the exact gradient; all estimates collapse to Y.

    Returns (per_estimator, aggregate). The subtraction is carried out
    rather than shortcut to Y so the identity is demonstrated, not assumed.
    """
    x = augment(d.features)
    base = x @ linear.coefficients
    initial = base[:, None] + nu * (x @ offsets.offsets)
    exact_gradient = initial - d.target[:, None]
    per_estimator = initial - exact_gradient
    return per_estimator, _row_means(per_estimator)


@dataclass(frozen=True)
class PCADiagnostics:
    """First-principal-component coordinates of the ensemble's trajectory.

    One (initial, terminal) pair per estimator plus the target's
    coordinate, all along the leading axis of the stacked collection.
    """

    initial_coords: np.ndarray
    terminal_coords: np.ndarray
    target_coord: float


def _leading_component(rows: np.ndarray) -> np.ndarray:
    """First principal axis of the row collection via power iteration."""
    n, m = rows.shape
    centered = rows - rows.mean(axis=0)
    if not np.any(centered):
        raise ValueError("collection has zero variance; no principal axis")

    def apply_cov(v: np.ndarray) -> np.ndarray:
        return centered.T @ (centered @ v) / n

    v = np.ones(m) / math.sqrt(m)
    w = apply_cov(v)
    if np.linalg.norm(w) == 0.0:
        # start vector happened to be orthogonal to the row space
        j = int(np.argmax(np.einsum("ij,ij->j", centered, centered)))
        v = np.zeros(m)
        v[j] = 1.0
        w = apply_cov(v)
    for _ in range(10000):
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            raise ValueError("power iteration collapsed to zero")
        v_next = w / w_norm
        if v_next @ v < 0:
            v_next = -v_next
        if np.linalg.norm(v_next - v) <= 1e-9:
            v = v_next
            break
        v = v_next
        w = apply_cov(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def project_trajectories(initial, terminal, target) -> PCADiagnostics:
    """Project (m, k) initial and terminal columns plus the target vector.

    The principal axis comes from the centered collection; the reported
    coordinates are the uncentered dot products with that axis.
    """
    initial = np.asarray(initial, dtype=float)
    terminal = np.asarray(terminal, dtype=float)
    target = np.asarray(target, dtype=float)
    if initial.shape != terminal.shape or initial.shape[0] != target.size:
        raise ValueError("initial, terminal, and target shapes do not agree")
    collection = np.vstack([initial.T, terminal.T, target[None, :]])
    axis = _leading_component(collection)
    return PCADiagnostics(
        initial_coords=initial.T @ axis,
        terminal_coords=terminal.T @ axis,
        target_coord=float(target @ axis),
    )


def pca_project_diagnostics(ensemble: ShootingEnsemble, d: Dataset) -> PCADiagnostics:
    """Project initial vectors, terminal vectors, and Y onto their first PC."""
    if d.n_rows < 2:
        raise ValueError("need at least 2 rows for a principal axis")
    return project_trajectories(
        initial_vectors(ensemble, d.features),
        predict_per_estimator(ensemble, d.features),
        d.target,
    )
