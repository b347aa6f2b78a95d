"""Correlation-distance graphs over nodes and importance-weighted sampling.

Edge weight between two nodes is 1 - |Pearson correlation| of their
activation vectors. The optional correction d' = sqrt(1 - (1 - d)^2) makes
the weights satisfy the triangle inequality while inducing the same
filtration order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .activation_io import ActivationMatrix
from .errors import (
    AlreadyCorrectedError,
    InconsistentScoresError,
    IndexOutOfRangeError,
    SizeTooLargeError,
    TooFewInputsError,
    ZeroVarianceRowError,
)

RAW_D = "raw_d"
CORRECTED_D_PRIME = "corrected_d_prime"


@dataclass(frozen=True)
class FunctionalGraph:
    """Symmetric dissimilarity matrix over sampled nodes, entries in [0, 1]."""

    dissimilarity: np.ndarray
    node_ids: tuple[str, ...]
    metric_mode: str = RAW_D

    def __post_init__(self):
        d = np.asarray(self.dissimilarity, dtype=np.float64)
        object.__setattr__(self, "dissimilarity", d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("dissimilarity must be square")
        if d.shape[0] != len(self.node_ids):
            raise ValueError("node_ids must match matrix axes")
        if d.size:
            if np.abs(d - d.T).max() > 1e-12:
                raise ValueError("dissimilarity not symmetric within 1e-12")
            if np.abs(np.diag(d)).max() > 0:
                raise ValueError("diagonal must be exactly zero")
            if d.min() < 0 or d.max() > 1:
                raise ValueError("entries must lie in [0, 1]")
        if self.metric_mode not in (RAW_D, CORRECTED_D_PRIME):
            raise ValueError(f"unknown metric_mode {self.metric_mode!r}")
        d.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.dissimilarity.shape[0]


@dataclass(frozen=True)
class ImportanceDistribution:
    """Per-node sampling probabilities derived from importance scores."""

    probabilities: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        s = np.asarray(self.scores, dtype=np.int64)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "scores", s)
        if p.shape != s.shape or p.ndim != 1:
            raise ValueError("probabilities and scores must be 1-D and aligned")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        if p.size and p.min() <= 0:
            raise ValueError("every node needs strictly positive probability")
        p.setflags(write=False)
        s.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.probabilities.shape[0]


def correlation_distance_matrix(m: ActivationMatrix) -> FunctionalGraph:
    """Entry (i, j) = 1 - |Pearson corr| of activation rows i and j."""
    x = m.values
    if x.shape[1] < 2:
        raise TooFewInputsError("correlation needs at least 2 input columns")
    xc = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", xc, xc))
    if (norms**2 <= 0).any():
        bad = int(np.argmin(norms))
        raise ZeroVarianceRowError(f"row {bad} has zero variance")
    # Normalizing rows first keeps corr = 1 exact for proportional rows.
    u = xc / norms[:, None]
    corr = u @ u.T
    d = 1.0 - np.abs(np.clip(corr, -1.0, 1.0))
    d = 0.5 * (d + d.T)
    np.clip(d, 0.0, 1.0, out=d)
    # |corr| within a few ulps of 1 is rounding noise from the dot products
    d[d < 1e-14] = 0.0
    np.fill_diagonal(d, 0.0)
    return FunctionalGraph(dissimilarity=d, node_ids=m.node_ids, metric_mode=RAW_D)


def apply_metric_correction(g: FunctionalGraph) -> FunctionalGraph:
    """Entrywise d' = sqrt(1 - (1 - d)^2)."""
    if g.metric_mode != RAW_D:
        raise AlreadyCorrectedError("graph already uses corrected weights")
    d = g.dissimilarity
    dp = np.sqrt(np.clip(1.0 - (1.0 - d) ** 2, 0.0, 1.0))
    np.fill_diagonal(dp, 0.0)
    return FunctionalGraph(
        dissimilarity=dp, node_ids=g.node_ids, metric_mode=CORRECTED_D_PRIME
    )


def importance_scores(m: ActivationMatrix) -> np.ndarray:
    """Per input column, the node with maximal |activation| gets +1.

    Ties break to the lowest node index (numpy argmax convention).
    """
    winners = np.argmax(np.abs(m.values), axis=0)
    return np.bincount(winners, minlength=m.n_nodes).astype(np.int64)


def importance_distribution(scores, n_inputs: int) -> ImportanceDistribution:
    """Inflate importance scores into a strictly positive distribution.

    P(v) = I_v / (n + 1) when I_v > 0, else 1 / ((n + 1) * #zeros). When no
    node has zero score the leftover mass 1 / (n + 1) is redistributed
    proportionally so probabilities always sum to 1.
    """
    scores = np.asarray(scores, dtype=np.int64)
    if n_inputs < 1 or scores.sum() != n_inputs:
        raise InconsistentScoresError(
            f"scores sum to {scores.sum()}, expected {n_inputs}"
        )
    n = float(n_inputs)
    p = scores / (n + 1.0)
    zeros = scores == 0
    n_zero = int(zeros.sum())
    if n_zero > 0:
        p[zeros] = 1.0 / ((n + 1.0) * n_zero)
    else:
        p = scores / n
    p = p / p.sum()
    return ImportanceDistribution(probabilities=p, scores=scores)


def sample_nodes(dist: ImportanceDistribution, size: int, seed: int) -> np.ndarray:
    """Draw ``size`` distinct node indices, inclusion driven by P.

    Sequential draw-and-remove with renormalization (numpy Generator.choice
    without replacement, PCG64 stream).
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    if size > dist.n_nodes:
        raise SizeTooLargeError(f"size {size} > {dist.n_nodes} nodes")
    rng = np.random.default_rng(seed)
    return rng.choice(dist.n_nodes, size=size, replace=False, p=dist.probabilities)


def subgraph(g: FunctionalGraph, nodes) -> FunctionalGraph:
    """Principal submatrix on the given node indices, order preserved."""
    idx = np.asarray(nodes, dtype=np.int64)
    if idx.size == 0:
        raise IndexOutOfRangeError("empty node selection")
    if idx.min() < 0 or idx.max() >= g.n_vertices:
        raise IndexOutOfRangeError(f"indices outside [0, {g.n_vertices})")
    if np.unique(idx).size != idx.size:
        raise IndexOutOfRangeError("repeated node index")
    return FunctionalGraph(
        dissimilarity=np.ascontiguousarray(g.dissimilarity[np.ix_(idx, idx)]),
        node_ids=tuple(g.node_ids[i] for i in idx),
        metric_mode=g.metric_mode,
    )


def export_lower_triangle_csv(g: FunctionalGraph, path) -> None:
    """Lower-triangular CSV as accepted by common persistence tools."""
    with open(Path(path), "w") as f:
        d = g.dissimilarity
        for i in range(1, g.n_vertices):
            f.write(",".join(format(d[i, j], ".17g") for j in range(i)))
            f.write("\n")
