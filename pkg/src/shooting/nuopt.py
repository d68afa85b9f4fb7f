"""Scaling-parameter objective: cached covariances, correlations, minimizer.

Every pairwise correlation among the gradient targets g_i = z + nu*(XD_i)
is a rational function of six cached covariance scalars, so after one
O(m k^2) pass the objective costs O(k^2) per evaluation no matter how many
rows the data has. Population (1/m) covariances throughout; correlations
are invariant to that choice, the cached magnitude sums rely on it being
fixed.

Sign note: the expansion below scores the columns z - nu*XD_i, which are
the gradient targets one would get from the sign-flipped offset draws
-D_i. Offsets are mean-zero normal, so -D_i is exactly as probable as
D_i and the two orientations are statistically interchangeable; the
minus-sign form is kept because the cross terms read straight off it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Above this nu a constant offset column makes the correlation limit
# meaningless, so flagged columns turn the evaluation degenerate.
LARGE_NU = 1e6

DEFAULT_NU_LO = 1e-6
DEFAULT_NU_HI = 1e3
DEFAULT_GRID_POINTS = 64
DEFAULT_NU_TOL = 1e-4

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class DegenerateCorrelationError(ValueError):
    """A correlation variance term vanished; carries the offending nu."""

    def __init__(self, message: str, nu: float | None = None):
        super().__init__(message)
        self.nu = nu


@dataclass(frozen=True)
class NuCache:
    """Covariance scalars and raw sums for O(k^2) objective evaluation.

    c_* are population covariances of z and the projected offset columns;
    sum_* are the uncentered dot products that rebuild the Frobenius norm
    of the gradient-target matrix. constant_columns flags offset columns
    with zero variance.
    """

    c_zz: float
    c_zi: np.ndarray
    c_ij: np.ndarray
    sum_zz: float
    sum_zx: np.ndarray
    sum_xx: np.ndarray
    mean_z: float
    mean_x: np.ndarray
    m: int
    constant_columns: np.ndarray

    @property
    def k(self) -> int:
        return self.c_zi.size


@dataclass(frozen=True)
class NuResult:
    """Minimizer output; objective_value = corr_term + magnitude_term."""

    nu: float
    objective_value: float
    corr_term: float
    magnitude_term: float
    evaluations: int


def build_cache(z, projected_offsets) -> NuCache:
    """One pass over the m-length vectors; everything after is m-free."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(projected_offsets, dtype=float)
    if z.ndim != 1 or x.ndim != 2 or x.shape[0] != z.size:
        raise ValueError("need z of length m and offsets of shape (m, k)")
    m, k = x.shape
    if m < 2:
        raise ValueError("need at least 2 rows")
    if k < 2:
        raise ValueError("need at least 2 offset columns")
    if np.ptp(z) == 0.0:
        raise DegenerateCorrelationError("z is constant; correlations undefined")
    mean_z = float(z.mean())
    mean_x = x.mean(axis=0)
    zc = z - mean_z
    xc = x - mean_x
    c_zz = float(zc @ zc) / m
    c_zi = (zc @ xc) / m
    c_ij = (xc.T @ xc) / m
    c_ij = 0.5 * (c_ij + c_ij.T)
    constant = np.ptp(x, axis=0) == 0.0
    return NuCache(
        c_zz=c_zz,
        c_zi=c_zi,
        c_ij=c_ij,
        sum_zz=float(z @ z),
        sum_zx=z @ x,
        sum_xx=x.T @ x,
        mean_z=mean_z,
        mean_x=mean_x,
        m=m,
        constant_columns=constant,
    )


def _variances(cache: NuCache, nu: float) -> np.ndarray:
    return cache.c_zz - 2.0 * nu * cache.c_zi + nu * nu * np.diag(cache.c_ij)


def correlation_at(cache: NuCache, nu: float, i: int, j: int) -> float:
    """Corr(z - nu*x_i, z - nu*x_j) from cached scalars, clamped to [-1, 1]."""
    k = cache.k
    if not (0 <= i < k and 0 <= j < k):
        raise IndexError("column index out of range")
    if nu >= LARGE_NU and (cache.constant_columns[i] or cache.constant_columns[j]):
        raise DegenerateCorrelationError(
            "constant offset column has no large-nu correlation", nu
        )
    v_i = cache.c_zz - 2.0 * nu * cache.c_zi[i] + nu * nu * cache.c_ij[i, i]
    v_j = cache.c_zz - 2.0 * nu * cache.c_zi[j] + nu * nu * cache.c_ij[j, j]
    if v_i <= 0.0 or v_j <= 0.0:
        raise DegenerateCorrelationError(f"zero variance at nu={nu}", nu)
    if i == j:
        return 1.0
    num = cache.c_zz - nu * (cache.c_zi[i] + cache.c_zi[j]) + nu * nu * cache.c_ij[i, j]
    r = num / np.sqrt(v_i * v_j)
    return float(min(1.0, max(-1.0, r)))


def objective(
    cache: NuCache, nu: float, magnitude_weight: float = 1.0
) -> tuple[float, float, float]:
    """(total, corr_term, magnitude_term) at this nu.

    corr_term is the Frobenius norm of the k x k correlation matrix,
    magnitude_term the (weighted) Frobenius norm of the m x k target
    matrix, both assembled purely from the cache.
    """
    if nu < 0.0:
        raise ValueError("nu must be >= 0")
    if nu >= LARGE_NU and cache.constant_columns.any():
        raise DegenerateCorrelationError(
            "constant offset column has no large-nu correlation", nu
        )
    v = _variances(cache, nu)
    if np.any(v <= 0.0):
        raise DegenerateCorrelationError(f"zero variance at nu={nu}", nu)
    num = (
        cache.c_zz
        - nu * (cache.c_zi[:, None] + cache.c_zi[None, :])
        + nu * nu * cache.c_ij
    )
    corr = num / np.sqrt(np.outer(v, v))
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    corr_term = float(np.linalg.norm(corr))
    sq = (
        cache.k * cache.sum_zz
        - 2.0 * nu * float(cache.sum_zx.sum())
        + nu * nu * float(np.trace(cache.sum_xx))
    )
    magnitude_term = magnitude_weight * float(np.sqrt(max(sq, 0.0)))
    return corr_term + magnitude_term, corr_term, magnitude_term


def balanced_magnitude_weight(cache: NuCache) -> float:
    """Weight that puts the magnitude term at the corr term's nu=0 value k.

    The raw magnitude term scales with the data (sqrt of k * sum z^2)
    while the corr term never exceeds k, so an unweighted sum is dominated
    by whichever is larger. Equalizing at nu = 0 puts the two on one scale.
    """
    if cache.sum_zz <= 0.0:
        return 1.0
    return float(np.sqrt(cache.k / cache.sum_zz))


def minimize_nu(
    cache: NuCache,
    lo: float = DEFAULT_NU_LO,
    hi: float = DEFAULT_NU_HI,
    grid_points: int = DEFAULT_GRID_POINTS,
    tol: float = DEFAULT_NU_TOL,
    magnitude_weight: float = 1.0,
) -> NuResult:
    """Coarse log-grid scan then golden-section refinement of the bracket.

    Degenerate evaluations count as +inf; only a fully degenerate range is
    an error. Strictly-lower comparisons throughout, so a flat objective
    returns the first grid point.
    """
    if lo < 0.0 or hi <= lo:
        raise ValueError("need 0 <= lo < hi")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    lo = max(lo, 1e-6)
    evaluations = 0

    def safe(nu: float) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            return objective(cache, nu, magnitude_weight)[0]
        except DegenerateCorrelationError:
            return np.inf

    grid = np.logspace(np.log10(lo), np.log10(hi), grid_points)
    values = [safe(nu) for nu in grid]
    best_i = 0
    for i in range(1, grid_points):
        if values[i] < values[best_i]:
            best_i = i
    if not np.isfinite(values[best_i]):
        raise DegenerateCorrelationError(
            "objective degenerate over the entire search range"
        )
    best_nu = float(grid[best_i])
    best_val = values[best_i]

    a = float(grid[max(best_i - 1, 0)])
    b = float(grid[min(best_i + 1, grid_points - 1)])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = safe(c), safe(d)
    while b - a > tol * (1.0 + best_nu):
        if fc < best_val:
            best_nu, best_val = c, fc
        if fd < best_val:
            best_nu, best_val = d, fd
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = safe(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = safe(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx < best_val:
            best_nu, best_val = float(x), fx

    total, corr_term, magnitude_term = objective(cache, best_nu, magnitude_weight)
    return NuResult(best_nu, total, corr_term, magnitude_term, evaluations)
