"""Checks that an embedding space reflects the properties users care about.

An embedding is only worth trusting for evaluation if nearby points share
labels (k-NN alignment), embedding distances track property differences
(rank alignment), and its dominant directions look sane (projection).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .embed_metrics import DegenerateInputWarning


def knn_feature_alignment(embeddings: np.ndarray, labels, k: int = 5) -> float:
    """Mean fraction of each point's k nearest neighbors sharing its label.

    Neighbor ties are broken by index (stable sort). Near 1 means the
    embedding separates the classes; for balanced random labels over c
    classes the expected value is 1/c.
    """
    x = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    labels = [str(v) for v in labels]
    n = x.shape[0]
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} embedding rows")
    if k < 1 or k >= n:
        raise ValueError(f"k must be in [1, {n - 1}] for {n} points, got {k}")
    d = cdist(x, x)
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    lab = np.asarray(labels, dtype=object)
    matches = lab[order] == lab[:, None]
    return float(matches.mean())


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1, ties replaced by the mean rank of the tied block."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("rank correlation needs two equal-length 1-D arrays")
    if len(a) < 2:
        raise ValueError("rank correlation needs at least 2 observations")
    ra, rb = _average_ranks(a), _average_ranks(b)
    ra = ra - ra.mean()
    rb = rb - rb.mean()
    denom = np.sqrt((ra * ra).sum() * (rb * rb).sum())
    if denom == 0.0:
        raise ValueError("rank correlation is undefined when one side is constant")
    return float((ra * rb).sum() / denom)


@dataclass
class SpearmanAlignmentParams:
    """Pair subsampling for the rank-alignment check.

    max_pairs: cap on the number of pairwise comparisons; None compares all
        n(n-1)/2 pairs. Subsampling is seeded and only kicks in when the
        full pair count exceeds the cap.
    seed: subsampling seed.
    """

    max_pairs: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_pairs is not None and self.max_pairs < 2:
            raise ValueError(f"max_pairs must be at least 2, got {self.max_pairs}")


def spearman_alignment(
    embeddings: np.ndarray,
    property_values: np.ndarray,
    params: SpearmanAlignmentParams | None = None,
) -> float:
    """Rank correlation between embedding distances and property differences.

    For every pair of sequences, the embedding distance (Euclidean) is
    compared against the property difference (absolute difference for a
    scalar property, Euclidean for a vector one). 1 means embedding
    geometry orders pairs exactly as the property does.
    """
    params = params or SpearmanAlignmentParams()
    x = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    p = np.asarray(property_values, dtype=np.float64)
    if p.ndim == 1:
        p = p[:, None]
    n = x.shape[0]
    if p.shape[0] != n:
        raise ValueError(f"{p.shape[0]} property rows for {n} embedding rows")
    if n < 3:
        raise ValueError(f"rank alignment needs at least 3 points, got {n}")
    if np.allclose(p, p[0]):
        raise ValueError("property column is constant; rank alignment is undefined")
    d_emb = pdist(x)
    d_prop = pdist(p)
    total = len(d_emb)
    if params.max_pairs is not None and total > params.max_pairs:
        idx = np.random.default_rng(params.seed).choice(total, size=params.max_pairs, replace=False)
        d_emb, d_prop = d_emb[idx], d_prop[idx]
    return spearman_rho(d_emb, d_prop)


@dataclass
class PcaProjection:
    """Low-dimensional view of an embedding cloud.

    coordinates: (n, out_dim) projected points.
    explained: fraction of total variance each output axis captures.
    """

    coordinates: np.ndarray
    explained: np.ndarray


def pca_project(embeddings: np.ndarray, out_dim: int = 2) -> PcaProjection:
    """Project onto the top principal components of the centered cloud.

    The sign of each component is fixed so its largest-magnitude loading is
    positive, making coordinates reproducible across runs. If the cloud has
    lower rank than out_dim, the trailing axes are zero and a warning is
    raised.
    """
    if out_dim not in (2, 3):
        raise ValueError(f"out_dim must be 2 or 3, got {out_dim}")
    x = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    n, d = x.shape
    if n < 2:
        raise ValueError(f"projection needs at least 2 points, got {n}")
    centered = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    var = s * s
    total_var = var.sum()
    rank = int((s > 1e-12 * max(s.max(initial=0.0), 1e-300)).sum())
    coords = np.zeros((n, out_dim))
    explained = np.zeros(out_dim)
    usable = min(out_dim, len(s))
    for j in range(usable):
        axis = vt[j]
        if axis[np.argmax(np.abs(axis))] < 0:
            axis = -axis
            # flipping the loading flips the scores too
            coords[:, j] = -(u[:, j] * s[j])
        else:
            coords[:, j] = u[:, j] * s[j]
        explained[j] = var[j] / total_var if total_var > 0 else 0.0
    if rank < out_dim:
        warnings.warn(
            f"embedding cloud has rank {rank}; axes beyond it are zero",
            DegenerateInputWarning,
            stacklevel=2,
        )
        coords[:, rank:] = 0.0
        explained[rank:] = 0.0
    return PcaProjection(coordinates=coords, explained=explained)
