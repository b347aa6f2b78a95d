"""Persistence-diagram vectorizations and the eleven summary combinations.

Combination numbering (fixed per dimension choice):
  1  persistence pooling of 10 elements
  2  average lives and midlives
  3  combination 2 plus its element-wise squares
  4  average births and deaths
  5  combination 4 plus its element-wise squares
  6  average births and deaths under x -> 1/x + ln x
  7  concatenation of combinations 3 and 5
  8  persistence entropy
  9  average and standard deviation of births and deaths
  10 combination 9 plus its element-wise squares
  11 complex polynomial, 10 coefficients (20 reals)

Dimension modes: ``H0``, ``H1``, or ``H0_and_H1`` (H0 vector then H1 vector).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDiagramError, ZeroTotalLifeError
from .persistence import PersistenceDiagram

H0 = "H0"
H1 = "H1"
H0_AND_H1 = "H0_and_H1"
DIMENSION_MODES = (H0, H1, H0_AND_H1)

ALL_COMBINATIONS = tuple(range(1, 12))

# Vector length per combination for a single homological dimension.
COMBINATION_LENGTHS = {1: 10, 2: 2, 3: 4, 4: 2, 5: 4, 6: 2, 7: 8, 8: 1, 9: 4, 10: 8, 11: 20}

# Guard for the 1/x + ln x transform at x = 0 (all H0 births are 0).
LOG_TRANSFORM_CLAMP = 1e-12


@dataclass(frozen=True)
class SummaryVector:
    combination_id: int
    dimension_mode: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", v)
        if self.combination_id not in COMBINATION_LENGTHS:
            raise ValueError(f"unknown combination {self.combination_id}")
        if self.dimension_mode not in DIMENSION_MODES:
            raise ValueError(f"unknown dimension mode {self.dimension_mode!r}")
        expected = COMBINATION_LENGTHS[self.combination_id]
        if self.dimension_mode == H0_AND_H1:
            expected *= 2
        if v.shape[0] != expected:
            raise ValueError(f"expected length {expected}, got {v.shape[0]}")
        if not np.isfinite(v).all():
            raise ValueError("summary entries must be finite")
        v.setflags(write=False)


def _require_nonempty(p: PersistenceDiagram):
    if len(p) == 0:
        raise EmptyDiagramError(f"empty dimension-{p.dimension} diagram")


def births_deaths_stats(p: PersistenceDiagram):
    """(avg_b, std_b, avg_d, std_d), population standard deviations."""
    _require_nonempty(p)
    b, d = p.births, p.deaths
    return float(b.mean()), float(b.std()), float(d.mean()), float(d.std())


def lives_midlives_stats(p: PersistenceDiagram):
    """(mean of d - b, mean of (b + d) / 2)."""
    _require_nonempty(p)
    return float(p.lifetimes.mean()), float((p.births + p.deaths).mean() / 2.0)


def persistence_entropy(p: PersistenceDiagram) -> float:
    """Shannon entropy (base 2) of the lifetime-weighted point distribution."""
    _require_nonempty(p)
    life = p.lifetimes
    total = life.sum()
    if total <= 0:
        raise ZeroTotalLifeError("all lifetimes are zero")
    q = life[life > 0] / total
    return float(-(q * np.log2(q)).sum())


def pooling_vector(p: PersistenceDiagram, n: int = 10) -> np.ndarray:
    """Top-n lifetimes descending, zero-padded."""
    out = np.zeros(n)
    life = np.sort(p.lifetimes)[::-1][:n]
    out[: life.size] = life
    return out


def point_to_complex(points: np.ndarray) -> np.ndarray:
    """Diagram point (b, d) -> complex root.

    Uses the direct map b + i*d. Other polynomial vectorizations in the
    literature apply a different point transformation first; reports record
    which map produced the coefficients.
    """
    return points[:, 0] + 1j * points[:, 1]


def complex_polynomial_coeffs(p: PersistenceDiagram, n: int = 10) -> np.ndarray:
    """First ``n`` non-leading coefficients of the monic polynomial whose
    roots are the mapped diagram points, interleaved (real, imag)."""
    out = np.zeros(2 * n)
    if len(p) == 0:
        return out
    roots = point_to_complex(p.points)
    coeffs = np.zeros(len(roots) + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    for k, r in enumerate(roots):
        # multiply running polynomial by (x - r)
        coeffs[1 : k + 2] -= r * coeffs[: k + 1].copy()
    lead = coeffs[1 : n + 1]
    out[0 : 2 * lead.size : 2] = lead.real
    out[1 : 2 * lead.size : 2] = lead.imag
    return out


def lifetime_density(p: PersistenceDiagram, grid) -> np.ndarray:
    """Gaussian KDE of the lifetime sample on ``grid`` (Scott's rule).

    Degenerate samples (zero spread) fall back to a narrow fixed kernel.
    """
    _require_nonempty(p)
    grid = np.asarray(grid, dtype=np.float64)
    life = p.lifetimes
    std = life.std()
    if std > 0:
        bw = std * life.size ** (-1.0 / 5.0)
    else:
        bw = 1e-3 * max(abs(float(life[0])), 1.0)
    z = (grid[:, None] - life[None, :]) / bw
    dens = np.exp(-0.5 * z**2).sum(axis=1) / (life.size * bw * np.sqrt(2 * np.pi))
    return dens


def _single_dimension_vector(p: PersistenceDiagram, combination_id: int) -> np.ndarray:
    if combination_id == 1:
        return pooling_vector(p)
    if combination_id == 2:
        return np.asarray(lives_midlives_stats(p))
    if combination_id == 3:
        base = np.asarray(lives_midlives_stats(p))
        return np.concatenate([base, base**2])
    if combination_id == 4:
        ab, _, ad, _ = births_deaths_stats(p)
        return np.asarray([ab, ad])
    if combination_id == 5:
        ab, _, ad, _ = births_deaths_stats(p)
        base = np.asarray([ab, ad])
        return np.concatenate([base, base**2])
    if combination_id == 6:
        _require_nonempty(p)
        b = np.maximum(p.births, LOG_TRANSFORM_CLAMP)
        d = np.maximum(p.deaths, LOG_TRANSFORM_CLAMP)
        fb = 1.0 / b + np.log(b)
        fd = 1.0 / d + np.log(d)
        return np.asarray([fb.mean(), fd.mean()])
    if combination_id == 7:
        return np.concatenate(
            [_single_dimension_vector(p, 3), _single_dimension_vector(p, 5)]
        )
    if combination_id == 8:
        return np.asarray([persistence_entropy(p)])
    if combination_id == 9:
        return np.asarray(births_deaths_stats(p))
    if combination_id == 10:
        base = np.asarray(births_deaths_stats(p))
        return np.concatenate([base, base**2])
    if combination_id == 11:
        return complex_polynomial_coeffs(p)
    raise ValueError(f"unknown combination {combination_id}")


def build_combination(
    d0: PersistenceDiagram | None,
    d1: PersistenceDiagram | None,
    combination_id: int,
    dimension_mode: str,
) -> SummaryVector:
    """Assemble one summary combination for the requested dimension mode."""
    if dimension_mode == H0:
        values = _single_dimension_vector(d0, combination_id)
    elif dimension_mode == H1:
        values = _single_dimension_vector(d1, combination_id)
    elif dimension_mode == H0_AND_H1:
        values = np.concatenate(
            [
                _single_dimension_vector(d0, combination_id),
                _single_dimension_vector(d1, combination_id),
            ]
        )
    else:
        raise ValueError(f"unknown dimension mode {dimension_mode!r}")
    return SummaryVector(
        combination_id=combination_id, dimension_mode=dimension_mode, values=values
    )
