"""Dataset ingestion, holdout splitting, and evaluation statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import sqrt

import numpy as np
from scipy import special

from .rng import SPLIT_STREAM, SYNTH_STREAM, make_rng


class ParseError(ValueError):
    """A data file row could not be interpreted."""


class MetricError(ValueError):
    """A score is undefined for the given inputs (e.g. constant targets)."""


class DegenerateTestError(ValueError):
    """The test statistic is undefined (zero-variance differences)."""


MPG_FEATURE_NAMES = [
    "cylinders",
    "displacement",
    "horsepower",
    "weight",
    "acceleration",
    "model_year",
    "origin",
]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with an aligned regression target."""

    features: np.ndarray
    target: np.ndarray
    feature_names: list[str]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        target = np.asarray(self.target, dtype=float)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "target", target)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        m, n = features.shape
        if m < 2:
            raise ValueError(f"need at least 2 rows, got {m}")
        if n < 1:
            raise ValueError("need at least 1 feature column")
        if target.shape != (m,):
            raise ValueError("target length must match the number of feature rows")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        if not np.all(np.isfinite(target)):
            raise ValueError("target contains non-finite values")
        if len(self.feature_names) != n:
            raise ValueError("feature_names must have one entry per column")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _parse_mpg_line(line: str, lineno: int) -> list[float] | None:
    """One UCI row -> [mpg, 7 features], or None when horsepower is '?'."""
    stripped = line.strip()
    first_quote = stripped.find('"')
    if first_quote < 0 or not stripped.endswith('"') or len(stripped) - 1 == first_quote:
        raise ParseError(f"line {lineno}: expected a trailing quoted car name")
    head = stripped[:first_quote].split()
    if len(head) != 8:
        raise ParseError(
            f"line {lineno}: expected 8 fields before the car name, got {len(head)}"
        )
    if head[3] == "?":
        return None
    values = []
    for token in head:
        try:
            values.append(float(token))
        except ValueError:
            raise ParseError(f"line {lineno}: unparsable field {token!r}") from None
    return values


def load_auto_mpg(path) -> Dataset:
    """Read the whitespace-delimited UCI fuel-economy file.

    The mpg column becomes the target; the seven numeric columns after it
    become the features. Rows whose horsepower entry is "?" are dropped and
    the quoted car-name field is discarded.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parsed = _parse_mpg_line(line, lineno)
        if parsed is not None:
            rows.append(parsed)
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least 2 usable rows, got {len(rows)}")
    table = np.array(rows)
    return Dataset(table[:, 1:], table[:, 0], list(MPG_FEATURE_NAMES))


def make_synthetic(m: int, n: int, noise_sd: float, seed: int) -> Dataset:
    """Gaussian features with a noisy linear response, reproducible per seed."""
    if m < 2 or n < 1:
        raise ValueError("need m >= 2 and n >= 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = make_rng(seed, SYNTH_STREAM)
    weights = rng.standard_normal(n)
    bias = rng.standard_normal()
    features = rng.standard_normal((m, n))
    target = features @ weights + bias + noise_sd * rng.standard_normal(m)
    return Dataset(features, target, [f"x{j}" for j in range(n)])


def _take(d: Dataset, idx: np.ndarray) -> Dataset:
    return Dataset(d.features[idx], d.target[idx], list(d.feature_names))


def split(d: Dataset, val_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded random holdout partition: (train, validation)."""
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("val_fraction must lie in (0, 1)")
    m = d.n_rows
    n_val = int(round(m * val_fraction))
    n_train = m - n_val
    if n_val < 2 or n_train < 2:
        raise ValueError(
            f"split sizes ({n_train}, {n_val}) too small; both partitions need >= 2 rows"
        )
    perm = make_rng(seed, SPLIT_STREAM).permutation(m)
    return _take(d, perm[n_val:]), _take(d, perm[:n_val])


def r_squared(y_true, y_pred) -> float:
    """Coefficient of determination 1 - SSres/SStot."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.ndim != 1 or y_true.shape != y_pred.shape or y_true.size < 2:
        raise ValueError("need two equal-length vectors with at least 2 entries")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise MetricError("R^2 is undefined for a constant target")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def mse(y_true, y_pred) -> float:
    """Mean squared error."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.ndim != 1 or y_true.shape != y_pred.shape or y_true.size < 1:
        raise ValueError("need two equal-length vectors with at least 1 entry")
    return float(np.mean((y_true - y_pred) ** 2))


def student_t_p(t: float, df: int, sidedness: str = "two-sided") -> float:
    """Tail probability of Student's t via the regularized incomplete beta.

    sidedness "two-sided" gives P(|T| >= |t|); "greater" gives P(T >= t).
    """
    if df < 1:
        raise ValueError("df must be >= 1")
    t = float(t)
    x = df / (df + t * t)
    two_sided = float(special.betainc(df / 2.0, 0.5, x))
    if sidedness == "two-sided":
        return two_sided
    if sidedness == "greater":
        return two_sided / 2.0 if t >= 0 else 1.0 - two_sided / 2.0
    raise ValueError(f"unknown sidedness {sidedness!r}")


def paired_t_test(a, b, sidedness: str = "two-sided") -> tuple[float, float]:
    """Paired t statistic and p-value for matched score vectors.

    "greater" tests the alternative mean(a) > mean(b).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape or a.size < 2:
        raise ValueError("need two equal-length vectors with at least 2 entries")
    diff = a - b
    sd = float(diff.std(ddof=1))
    if sd == 0.0:
        raise DegenerateTestError("paired differences have zero variance")
    n = diff.size
    t = float(diff.mean()) / (sd / sqrt(n))
    return t, student_t_p(t, n - 1, sidedness)


@dataclass(frozen=True)
class TrialReport:
    """Validation scores of one train/validation trial."""

    trial_index: int
    scores: dict[str, float] = field(default_factory=dict)
    nu_selected: float = 0.0


@dataclass(frozen=True)
class ComparisonReport:
    """Aggregate of per-trial scores with pairwise paired t-tests."""

    means: dict[str, float]
    stds: dict[str, float]
    t_stats: dict[tuple[str, str], float]
    p_values: dict[tuple[str, str], float]
    n_trials: int


def summarize_trials(reports: list[TrialReport], sidedness: str = "two-sided") -> ComparisonReport:
    """Aggregate trial scores into means, stds, and pairwise tests.

    Pairs whose test is undefined (fewer than 2 trials, or identical score
    differences) are omitted from the t/p maps.
    """
    if not reports:
        raise ValueError("need at least one trial")
    models = list(reports[0].scores)
    by_model = {name: np.array([r.scores[name] for r in reports]) for name in models}
    n = len(reports)
    means = {name: float(v.mean()) for name, v in by_model.items()}
    stds = {name: float(v.std(ddof=1)) if n > 1 else 0.0 for name, v in by_model.items()}
    t_stats: dict[tuple[str, str], float] = {}
    p_values: dict[tuple[str, str], float] = {}
    if n > 1:
        for left, right in combinations(models, 2):
            try:
                t, p = paired_t_test(by_model[left], by_model[right], sidedness)
            except DegenerateTestError:
                continue
            t_stats[(left, right)] = t
            p_values[(left, right)] = p
    return ComparisonReport(means, stds, t_stats, p_values, n)
