"""Bootstrapping, linear gap regression, R^2, and the paired 5x2-CV test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import (
    DimensionMismatchError,
    FoldMismatchError,
    LengthMismatchError,
    TooFewModelsError,
    ZeroVarianceTargetError,
)

DEFAULT_N_RESAMPLES = 1000
DEFAULT_RESAMPLE_SIZE = 20


@dataclass(frozen=True)
class BootstrappedSummary:
    model_id: str
    combination_id: int
    dimension_mode: str
    values: np.ndarray
    n_samples: int
    n_resamples: int


@dataclass(frozen=True)
class CvResult:
    """Ten R^2 scores (5 repetitions x 2 folds) plus their mean/std."""

    r2_scores: np.ndarray
    mean_r2: float
    std_r2: float
    fold_seed: int
    n_models: int
    combination_id: int | None = None
    dimension_mode: str | None = None

    def __post_init__(self):
        scores = np.asarray(self.r2_scores, dtype=np.float64)
        object.__setattr__(self, "r2_scores", scores)
        if scores.shape != (10,):
            raise ValueError("expected exactly 10 scores")
        if abs(scores.mean() - self.mean_r2) > 1e-12:
            raise ValueError("mean_r2 inconsistent with scores")
        if abs(scores.std() - self.std_r2) > 1e-12:
            raise ValueError("std_r2 inconsistent with scores")
        scores.setflags(write=False)


def bootstrap_summary(
    samples,
    n_resamples: int = DEFAULT_N_RESAMPLES,
    resample_size: int = DEFAULT_RESAMPLE_SIZE,
    seed: int = 0,
    model_id: str = "",
    combination_id: int = 0,
    dimension_mode: str = "H0",
) -> BootstrappedSummary:
    """Mean over ``n_resamples`` with-replacement resample means.

    ``samples`` is the list of k per-diagram summary vectors for one model.
    """
    arr = [np.asarray(s.values if hasattr(s, "values") else s, dtype=np.float64)
           for s in samples]
    if not arr:
        raise LengthMismatchError("need at least one summary vector")
    p = arr[0].shape[0]
    if any(a.shape != (p,) for a in arr):
        raise LengthMismatchError("summary vectors differ in length")
    stacked = np.stack(arr)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, stacked.shape[0], size=(n_resamples, resample_size))
    values = stacked[idx].mean(axis=1).mean(axis=0)
    return BootstrappedSummary(
        model_id=model_id,
        combination_id=combination_id,
        dimension_mode=dimension_mode,
        values=values,
        n_samples=stacked.shape[0],
        n_resamples=n_resamples,
    )


def fit_linear(features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """OLS with intercept; minimum-norm solution under rank deficiency.

    Returns (p + 1) coefficients, intercept first.
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[0] == 1 and np.asarray(targets).size != 1:
        x = x.T
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"{x.shape[0]} rows vs {y.shape[0]} targets")
    if x.shape[0] < 2:
        raise DimensionMismatchError("need at least 2 models")
    design = np.hstack([np.ones((x.shape[0], 1)), x])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coeffs


def predict_linear(features: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != coeffs.shape[0] - 1:
        x = x.T
    return coeffs[0] + x @ coeffs[1:]


def r_squared(actual, predicted) -> float:
    """1 - SS_res / SS_tot; can be negative on unseen data."""
    y = np.asarray(actual, dtype=np.float64).reshape(-1)
    yhat = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if y.shape != yhat.shape or y.size < 2:
        raise DimensionMismatchError("actual/predicted must align, length >= 2")
    ss_tot = ((y - y.mean()) ** 2).sum()
    if ss_tot == 0:
        raise ZeroVarianceTargetError("actual values are all identical")
    ss_res = ((y - yhat) ** 2).sum()
    return float(1.0 - ss_res / ss_tot)


def five_by_two_cv(
    features: np.ndarray,
    targets: np.ndarray,
    seed: int,
    combination_id: int | None = None,
    dimension_mode: str | None = None,
) -> CvResult:
    """Five shuffled 2-fold splits; R^2 of a linear model on each held-out half.

    Odd model counts split ceil(n/2) / floor(n/2).
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if x.shape[0] != y.shape[0]:
        x = x.T
    n = y.shape[0]
    if n < 4:
        raise TooFewModelsError(f"need >= 4 models, got {n}")
    rng = np.random.default_rng(seed)
    scores = []
    for _ in range(5):
        perm = rng.permutation(n)
        half = (n + 1) // 2
        fold_a, fold_b = perm[:half], perm[half:]
        for train, test in ((fold_a, fold_b), (fold_b, fold_a)):
            coeffs = fit_linear(x[train], y[train])
            scores.append(r_squared(y[test], predict_linear(x[test], coeffs)))
    scores = np.asarray(scores)
    return CvResult(
        r2_scores=scores,
        mean_r2=float(scores.mean()),
        std_r2=float(scores.std()),
        fold_seed=seed,
        n_models=n,
        combination_id=combination_id,
        dimension_mode=dimension_mode,
    )


def paired_5x2_statistic(a: CvResult, b: CvResult) -> tuple[float, float]:
    """Dietterich's 5x2-cv paired t statistic and two-sided p-value.

    t = d_1^(1) / sqrt((1/5) sum_i s_i^2) with 5 degrees of freedom, where
    s_i^2 is the per-repetition variance of the two fold differences. When
    every s_i^2 is zero, p = 1 for d_1^(1) = 0 and p = 0 otherwise.
    """
    if a.fold_seed != b.fold_seed or a.n_models != b.n_models:
        raise FoldMismatchError("results computed on different partitions")
    d = (a.r2_scores - b.r2_scores).reshape(5, 2)
    s2 = ((d[:, 0] - d[:, 1]) ** 2) / 2.0
    denom = s2.sum() / 5.0
    if denom == 0.0:
        return (0.0, 1.0) if d[0, 0] == 0.0 else (np.inf, 0.0)
    t = d[0, 0] / np.sqrt(denom)
    p = 2.0 * float(sps.t.sf(abs(t), df=5))
    return float(t), p


def paired_5x2_test(a: CvResult, b: CvResult) -> float:
    """Two-sided p-value of the paired 5x2-cv test."""
    return paired_5x2_statistic(a, b)[1]
