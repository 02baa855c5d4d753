"""Metrics over measured or predicted per-sequence properties.

Covers summary statistics against targets (identity, threshold, hit-rate),
multi-objective spread (hypervolume, convex hull volume), typicality against
a reference property distribution (conformity), and distributional
divergence (KL for continuous and categorical properties).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.stats import gaussian_kde

from .embed_metrics import DegenerateInputWarning


# ---------------------------------------------------------------------------
# target statistics


def identity_stat(values: np.ndarray) -> tuple[float, float]:
    """Mean and population variance (1/n denominator) of a property column."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("identity statistic needs a non-empty 1-D property column")
    return float(values.mean()), float(values.var(ddof=0))


def threshold_fraction(values: np.ndarray, tau: float, side: str = "above") -> float:
    """Fraction of values strictly beyond tau ('above' means > tau, 'below' < tau)."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("threshold fraction needs a non-empty 1-D property column")
    if side == "above":
        return float((values > tau).mean())
    if side == "below":
        return float((values < tau).mean())
    raise ValueError(f"side must be 'above' or 'below', got '{side}'")


def hit_rate(values: np.ndarray) -> float:
    """Mean of a binary success column; any value outside {0, 1} raises."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("hit rate needs a non-empty 1-D column")
    ok = np.isin(values, (0.0, 1.0))
    if not ok.all():
        bad = int(np.argmin(ok))
        raise ValueError(f"hit rate expects 0/1 values; row {bad} holds {values[bad]}")
    return float(values.mean())


# ---------------------------------------------------------------------------
# multi-objective spread


@dataclass
class HypervolumeParams:
    """Multi-objective volume settings.

    reference_point: worst-case corner (maximization convention); every
        point must be strictly greater in each coordinate. Defaults to the
        origin.
    mode: "pareto-indicator" measures the dominated region; "convex-hull"
        measures the hull volume of the cloud instead.
    """

    reference_point: Sequence[float] | None = None
    mode: str = "pareto-indicator"

    def __post_init__(self) -> None:
        if self.mode not in ("pareto-indicator", "convex-hull"):
            raise ValueError(f"mode must be 'pareto-indicator' or 'convex-hull', got '{self.mode}'")


def _box_union_volume(points: np.ndarray) -> float:
    """Volume of the union of boxes [0, p] for rows p > 0.

    Sweeps the last coordinate over its distinct values, descending: the
    slab between consecutive levels has as cross-section the union of the
    boxes of every point at least that tall, computed recursively one
    dimension down. Exact in any dimension; worst-case cost grows like
    n^(d-1), fine for the 2-4 objectives this is meant for.
    """
    if points.shape[0] == 0:
        return 0.0
    if points.shape[1] == 1:
        return float(points.max())
    z = points[:, -1]
    levels = np.unique(z)[::-1]
    floors = np.append(levels[1:], 0.0)
    total = 0.0
    for top, floor in zip(levels, floors):
        cross = _box_union_volume(points[z >= top, :-1])
        total += (top - floor) * cross
    return total


def hypervolume_indicator(points: np.ndarray, params: HypervolumeParams | None = None) -> float:
    """Dominated hypervolume of a point set under maximization.

    Measures the volume of the region between the reference point and the
    set's Pareto front: the union over points p of the boxes
    [reference, p], counting only points strictly better than the reference
    in every objective. Adding a dominated point never changes the value.
    """
    params = params or HypervolumeParams()
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("hypervolume needs a non-empty 2-D point array")
    k = points.shape[1]
    if k < 2:
        raise ValueError(f"hypervolume needs at least 2 objectives, got {k}")
    ref = np.zeros(k) if params.reference_point is None else np.asarray(params.reference_point, dtype=np.float64)
    if ref.shape != (k,):
        raise ValueError(f"reference point has {ref.size} coordinates for {k} objectives")
    shifted = points - ref
    bad = ~(shifted > 0).all(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(
            f"point {i} {tuple(points[i])} does not strictly dominate the reference point {tuple(ref)}"
        )
    return _box_union_volume(_pareto_front(shifted))


def _pareto_front(points: np.ndarray) -> np.ndarray:
    """Drop rows some other row weakly dominates, so the sweep sees exactly
    the front and adding a dominated point cannot perturb the arithmetic."""
    keep = []
    for i, p in enumerate(points):
        beaten = False
        for j, q in enumerate(points):
            if i == j:
                continue
            if (q >= p).all() and ((q > p).any() or j < i):
                beaten = True
                break
        if not beaten:
            keep.append(i)
    return points[keep]


def property_volume(points: np.ndarray, params: HypervolumeParams | None = None) -> float:
    """Dispatch between the dominated-region indicator and the hull volume."""
    params = params or HypervolumeParams()
    if params.mode == "pareto-indicator":
        return hypervolume_indicator(points, params)
    return convex_hull_volume(points)


def convex_hull_volume(points: np.ndarray) -> float:
    """Volume (area in 2-D) of the convex hull of a property point cloud.

    Supports 2 and 3 objectives. Degenerate clouds (collinear, coplanar,
    or fewer than k+1 points) have zero volume; a warning notes it.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    k = points.shape[1]
    if k not in (2, 3):
        raise ValueError(f"convex hull volume supports 2 or 3 objectives, got {k}")
    if points.shape[0] < k + 1:
        warnings.warn(
            f"{points.shape[0]} points cannot span a {k}-dimensional hull; volume is 0",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        warnings.warn(
            "points are affinely degenerate; hull volume is 0",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return 0.0


# ---------------------------------------------------------------------------
# conformity


@dataclass
class ConformityParams:
    """Conformity protocol settings.

    conformity_measure: factory taking the training rows and returning a
        scoring function (higher = more typical). None fits a Gaussian KDE
        and scores by log-density.
    folds: 1 trains on the full reference and scores everything once; K > 1
        repeats on K seeded train/calibration splits and averages.
    seed: split seed.
    train_fraction: share of the reference used for training per split.
    """

    conformity_measure: Callable[[np.ndarray], Callable[[np.ndarray], np.ndarray]] | None = None
    folds: int = 1
    seed: int = 0
    train_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.folds < 1:
            raise ValueError(f"folds must be at least 1, got {self.folds}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def _kde_log_density_factory(train: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    kde = gaussian_kde(train.T)
    return lambda pts: np.log(np.maximum(kde(np.atleast_2d(pts).T), 1e-300))


def _pair_fraction(gen_scores: np.ndarray, cal_scores: np.ndarray) -> float:
    """Mean over generated points of the fraction of calibration scores
    they meet or exceed; ties count in favor of the generated point."""
    return float((gen_scores[:, None] >= cal_scores[None, :]).mean())


def conformity_score(
    gen_values: np.ndarray,
    ref_values: np.ndarray,
    params: ConformityParams | None = None,
) -> float:
    """How typical generated property values are of the reference distribution.

    Each generated point's conformity score is compared against the scores of
    calibration reference points; the result is the average exceed-fraction,
    near 1/2 when the two distributions match, near 0 when generated points
    fall in low-density regions of the reference.
    """
    params = params or ConformityParams()
    gen = np.asarray(gen_values, dtype=np.float64)
    ref = np.asarray(ref_values, dtype=np.float64)
    if gen.ndim == 1:
        gen = gen[:, None]
    if ref.ndim == 1:
        ref = ref[:, None]
    if gen.shape[0] == 0 or ref.shape[0] == 0:
        raise ValueError("conformity needs non-empty generated and reference values")
    if gen.shape[1] != ref.shape[1]:
        raise ValueError(
            f"generated and reference property widths differ: {gen.shape[1]} vs {ref.shape[1]}"
        )
    factory = params.conformity_measure or _kde_log_density_factory
    if params.folds == 1:
        scorer = factory(ref)
        return _pair_fraction(np.asarray(scorer(gen), dtype=np.float64),
                              np.asarray(scorer(ref), dtype=np.float64))
    rng = np.random.default_rng(params.seed)
    n = ref.shape[0]
    n_train = int(round(n * params.train_fraction))
    if n_train < 1 or n_train >= n:
        raise ValueError(
            f"train_fraction {params.train_fraction} leaves an empty split for {n} reference rows"
        )
    vals = []
    for _ in range(params.folds):
        order = rng.permutation(n)
        train, cal = ref[order[:n_train]], ref[order[n_train:]]
        scorer = factory(train)
        vals.append(_pair_fraction(np.asarray(scorer(gen), dtype=np.float64),
                                   np.asarray(scorer(cal), dtype=np.float64)))
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# KL divergence


@dataclass
class KdeParams:
    """Continuous KL estimation settings.

    bandwidth: KDE bandwidth rule or scalar factor (passed through to the
        Gaussian KDE).
    mc_samples: Monte Carlo draws from the generated-side density.
    seed: sampling seed.
    density_floor: densities are clamped below by this before taking logs.
    """

    bandwidth: str | float = "scott"
    mc_samples: int = 10000
    seed: int = 0
    density_floor: float = 1e-12

    def __post_init__(self) -> None:
        if self.mc_samples < 1:
            raise ValueError(f"mc_samples must be positive, got {self.mc_samples}")
        if self.density_floor <= 0:
            raise ValueError("density_floor must be positive")


def kl_divergence_continuous(
    gen_values: np.ndarray,
    ref_values: np.ndarray,
    params: KdeParams | None = None,
) -> float:
    """KL(generated || reference) for real-valued properties.

    Both sides get a Gaussian KDE; the divergence is a Monte Carlo average
    of the log-density ratio under samples drawn from the generated-side
    KDE. Estimates carry O(1/sqrt(mc_samples)) noise.
    """
    params = params or KdeParams()

    def as_kde_input(values) -> np.ndarray:
        arr = np.asarray(values, dtype=np.float64)
        # gaussian_kde wants (d, n); property columns arrive as (n,) or (n, d)
        return arr[None, :] if arr.ndim == 1 else arr.T

    gen = as_kde_input(gen_values)
    ref = as_kde_input(ref_values)
    if gen.shape[1] < 2 or ref.shape[1] < 2:
        raise ValueError("KDE needs at least 2 points per side")
    kde_g = gaussian_kde(gen, bw_method=params.bandwidth)
    kde_r = gaussian_kde(ref, bw_method=params.bandwidth)
    samples = kde_g.resample(params.mc_samples, seed=params.seed)
    pg = np.maximum(kde_g(samples), params.density_floor)
    pr = np.maximum(kde_r(samples), params.density_floor)
    return float(np.mean(np.log(pg) - np.log(pr)))


def kl_divergence_categorical(
    gen_labels: Sequence[str],
    ref_labels: Sequence[str],
    smoothing: float = 1e-9,
) -> float:
    """KL(generated || reference) over a shared label support.

    Frequencies get additive smoothing over the union support, so labels
    seen on only one side stay finite and exactly matching frequency tables
    give exactly 0.
    """
    gen_labels = list(gen_labels)
    ref_labels = list(ref_labels)
    if not gen_labels or not ref_labels:
        raise ValueError("categorical KL needs non-empty label lists")
    support = sorted(set(gen_labels) | set(ref_labels))
    s = len(support)

    def smoothed(labels: list[str]) -> np.ndarray:
        n = len(labels)
        freq = np.array([labels.count(c) / n for c in support])
        return (freq + smoothing) / (1.0 + smoothing * s)

    p, q = smoothed(gen_labels), smoothed(ref_labels)
    return float(np.sum(p * np.log(p / q)))
