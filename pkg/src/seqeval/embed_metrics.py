"""Metrics over fixed-dimension embeddings.

Distributional distances (Fréchet, MMD), manifold coverage (improved
precision/recall, authenticity), and spectral diversity (Vendi score, with
a random-features approximation for large sets).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist


class DegenerateInputWarning(UserWarning):
    """Input is legal but too small or too flat for the estimate to be reliable."""


# ---------------------------------------------------------------------------
# kernels


@dataclass
class KernelSpec:
    """Positive-definite kernel on embedding space.

    kind: "gaussian-rbf" is exp(-||x-y||^2 / (2 sigma^2)); "rational-quadratic"
        is (1 + ||x-y||^2 / (2 alpha sigma^2))^(-alpha).
    sigma: bandwidth, or "median-heuristic" to use the median pairwise
        distance of the pooled inputs.
    alpha: rational-quadratic shape parameter (ignored for the RBF).
    """

    kind: str = "gaussian-rbf"
    sigma: float | str = "median-heuristic"
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian-rbf", "rational-quadratic"):
            raise ValueError(f"unknown kernel kind '{self.kind}'")
        if self.sigma != "median-heuristic":
            self.sigma = float(self.sigma)
            if self.sigma <= 0:
                raise ValueError(f"kernel bandwidth must be positive, got {self.sigma}")
        if self.alpha <= 0:
            raise ValueError(f"rational-quadratic alpha must be positive, got {self.alpha}")


def median_heuristic_bandwidth(*arrays: np.ndarray) -> float:
    pooled = np.vstack([np.atleast_2d(a) for a in arrays])
    if pooled.shape[0] < 2:
        raise ValueError("median heuristic needs at least 2 pooled points")
    med = float(np.median(pdist(pooled)))
    if med == 0.0:
        raise ValueError(
            "median pairwise distance is 0 (all points coincide); "
            "pass an explicit sigma instead of the median heuristic"
        )
    return med


def resolve_bandwidth(spec: KernelSpec, *arrays: np.ndarray) -> float:
    if spec.sigma == "median-heuristic":
        return median_heuristic_bandwidth(*arrays)
    return float(spec.sigma)


def kernel_matrix(x: np.ndarray, y: np.ndarray, spec: KernelSpec, sigma: float | None = None) -> np.ndarray:
    """Kernel Gram block k(x_i, y_j)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if sigma is None:
        sigma = resolve_bandwidth(spec, x, y)
    sq = cdist(x, y, metric="sqeuclidean")
    if spec.kind == "gaussian-rbf":
        return np.exp(-sq / (2.0 * sigma * sigma))
    return (1.0 + sq / (2.0 * spec.alpha * sigma * sigma)) ** (-spec.alpha)


# ---------------------------------------------------------------------------
# Fréchet distance


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix via its eigensystem.

    Tiny negative eigenvalues from round-off are clamped to zero; genuinely
    negative spectra (beyond a scale-relative floor) raise.
    """
    m = np.asarray(m, dtype=np.float64)
    scale = 1.0 + float(np.abs(m).max(initial=0.0))
    if np.abs(m - m.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix square root requires a symmetric input")
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    if w.min(initial=0.0) < -1e-8 * scale:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min()})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


@dataclass
class GaussianSummary:
    """Mean vector and covariance matrix fitted to a point cloud."""

    mean: np.ndarray
    covariance: np.ndarray
    n: int = 0
    estimator: str = "sample"


def gaussian_summary(x: np.ndarray) -> GaussianSummary:
    """Sample mean and unbiased (n-1 denominator) covariance of the rows."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n, d = x.shape
    if n < 2:
        raise ValueError(f"need at least 2 points to fit a covariance, got {n}")
    if n < d:
        warnings.warn(
            f"covariance from {n} points in {d} dimensions is rank-deficient; "
            "the distance estimate will be unstable",
            DegenerateInputWarning,
            stacklevel=2,
        )
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    return GaussianSummary(mean=x.mean(axis=0), covariance=cov, n=n, estimator="sample")


def frechet_distance(g: GaussianSummary, r: GaussianSummary) -> float:
    """Squared Fréchet distance between two Gaussian summaries.

    ||mu_g - mu_r||^2 + Tr(S_g + S_r - 2 (S_g^1/2 S_r S_g^1/2)^1/2), using
    the symmetric inner form so the product fed to the square root is PSD
    by construction; its trace equals that of the raw (S_g S_r)^1/2.
    Round-off can leave the result a hair below zero; it is clamped at 0.
    """
    delta = g.mean - r.mean
    sg_half = matrix_sqrt_psd(g.covariance)
    inner = matrix_sqrt_psd(sg_half @ r.covariance @ sg_half)
    value = float(
        delta @ delta + np.trace(g.covariance) + np.trace(r.covariance) - 2.0 * np.trace(inner)
    )
    return max(value, 0.0)


def fbd(xg: np.ndarray, xr: np.ndarray) -> float:
    """Fréchet distance between Gaussians fitted to two embedding clouds."""
    xg = np.atleast_2d(np.asarray(xg, dtype=np.float64))
    xr = np.atleast_2d(np.asarray(xr, dtype=np.float64))
    if xg.shape[1] != xr.shape[1]:
        raise ValueError(f"embedding dimensions differ: {xg.shape[1]} vs {xr.shape[1]}")
    return frechet_distance(gaussian_summary(xg), gaussian_summary(xr))


# ---------------------------------------------------------------------------
# MMD


def mmd(xg: np.ndarray, xr: np.ndarray, kernel: KernelSpec | None = None) -> float:
    """Unbiased squared maximum mean discrepancy between two samples.

    U-statistic estimator: within-sample terms exclude the diagonal, the
    cross term is a full mean. Unbiasedness means small negative values are
    possible and are returned as-is.

    Args:
        xg: generated embeddings, shape (n, d) with n >= 2.
        xr: reference embeddings, shape (m, d) with m >= 2.
        kernel: kernel settings; defaults to a median-heuristic Gaussian RBF
            with the bandwidth taken over the pooled points.
    """
    kernel = kernel or KernelSpec()
    xg = np.atleast_2d(np.asarray(xg, dtype=np.float64))
    xr = np.atleast_2d(np.asarray(xr, dtype=np.float64))
    n, m = xg.shape[0], xr.shape[0]
    if n < 2 or m < 2:
        raise ValueError(f"unbiased MMD needs at least 2 points per side, got {n} and {m}")
    sigma = resolve_bandwidth(kernel, xg, xr)
    kgg = kernel_matrix(xg, xg, kernel, sigma)
    krr = kernel_matrix(xr, xr, kernel, sigma)
    kgr = kernel_matrix(xg, xr, kernel, sigma)
    term_g = (kgg.sum() - np.trace(kgg)) / (n * (n - 1))
    term_r = (krr.sum() - np.trace(krr)) / (m * (m - 1))
    return float(term_g + term_r - 2.0 * kgr.mean())


# ---------------------------------------------------------------------------
# precision / recall / authenticity


@dataclass
class NeighborhoodParams:
    """k-NN ball settings for the manifold coverage estimates."""

    k: int = 3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")


def _knn_radii(x: np.ndarray, k: int) -> np.ndarray:
    """Distance from each row to its k-th nearest other row.

    Ties are broken by index (stable sort), so the radius is reproducible
    for duplicated points.
    """
    n = x.shape[0]
    if k < 1 or k >= n:
        raise ValueError(f"k must be in [1, {n - 1}] for {n} points, got {k}")
    d = cdist(x, x)
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    return d[np.arange(n), order[:, k - 1]]


def improved_precision(xg: np.ndarray, xr: np.ndarray, k: int = 3) -> float:
    """Fraction of generated points inside the reference k-NN manifold.

    The reference manifold is the union of closed balls centered at each
    reference point with radius the distance to its k-th nearest other
    reference point.
    """
    xg = np.atleast_2d(np.asarray(xg, dtype=np.float64))
    xr = np.atleast_2d(np.asarray(xr, dtype=np.float64))
    radii = _knn_radii(xr, k)
    d = cdist(xg, xr)
    covered = (d <= radii[None, :]).any(axis=1)
    return float(covered.mean())


def improved_recall(xg: np.ndarray, xr: np.ndarray, k: int = 3) -> float:
    """Fraction of reference points inside the generated k-NN manifold.

    Exactly precision with the roles swapped, so recall(g, r) equals
    precision(r, g) by construction.
    """
    return improved_precision(xr, xg, k)


def authenticity(xg: np.ndarray, xr: np.ndarray) -> float:
    """Fraction of generated points that are not closer to their nearest
    reference point than that reference point is to its own nearest
    reference neighbor.

    A generated point strictly inside its nearest reference point's own
    nearest-neighbor ball counts as a likely copy; everything else counts
    as authentic.
    """
    xg = np.atleast_2d(np.asarray(xg, dtype=np.float64))
    xr = np.atleast_2d(np.asarray(xr, dtype=np.float64))
    if xr.shape[0] < 2:
        raise ValueError("authenticity needs at least 2 reference points")
    d_rr = cdist(xr, xr)
    np.fill_diagonal(d_rr, np.inf)
    nn_rr = d_rr.min(axis=1)
    d_gr = cdist(xg, xr)
    nearest = np.argmin(d_gr, axis=1)  # argmin takes the first index on ties
    copied = d_gr[np.arange(xg.shape[0]), nearest] < nn_rr[nearest]
    return float(1.0 - copied.mean())


# ---------------------------------------------------------------------------
# Vendi score


def _entropy_from_spectrum(lam: np.ndarray, alpha: float) -> float:
    """Exponentiated Renyi-alpha entropy of a probability spectrum."""
    lam = lam[lam > 0]
    if alpha == 1.0:
        return float(np.exp(-np.sum(lam * np.log(lam))))
    return float(np.exp(np.log(np.sum(lam**alpha)) / (1.0 - alpha)))


def vendi_exact(x: np.ndarray, kernel: KernelSpec | None = None, alpha: float = 1.0) -> float:
    """Effective number of distinct points under a similarity kernel.

    Eigenvalues of the trace-normalized Gram matrix form a probability
    distribution; the score is the exponential of its Renyi-alpha entropy
    (Shannon at alpha=1). Ranges from 1 (all identical) to n (mutually
    dissimilar).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    kernel = kernel or KernelSpec()
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    if n < 1:
        raise ValueError("vendi score needs at least one point")
    # resolve the bandwidth over x once; x appears on both sides of the Gram
    gram = kernel_matrix(x, x, kernel, resolve_bandwidth(kernel, x))
    if not np.isfinite(gram).all():
        raise ValueError("kernel matrix contains non-finite values")
    lam = np.linalg.eigvalsh(gram / n)
    lam = np.clip(lam, 0.0, None)
    floor = 1e-10 * lam.max(initial=0.0)
    lam = np.where(lam < floor, 0.0, lam)
    lam = lam / lam.sum()
    return _entropy_from_spectrum(lam, alpha)


@dataclass
class FkeaParams:
    """Random-features approximation settings for the Vendi score.

    num_features: number m of random frequencies; the feature map has
        dimension 2m and the proxy Gram matrix is 2m x 2m, so cost no longer
        grows cubically with the number of points.
    renyi_alpha: entropy order (1 recovers the Shannon form).
    seed: frequency sampling seed.
    sigma: Gaussian kernel bandwidth being approximated.
    """

    num_features: int = 1000
    renyi_alpha: float = 1.0
    seed: int = 0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.num_features < 1:
            raise ValueError(f"num_features must be positive, got {self.num_features}")
        if self.renyi_alpha <= 0:
            raise ValueError(f"renyi_alpha must be positive, got {self.renyi_alpha}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def rff_features(x: np.ndarray, params: FkeaParams) -> np.ndarray:
    """Random Fourier feature map whose inner products approximate the RBF kernel.

    Frequencies are drawn from N(0, sigma^-2 I); each point maps to
    sqrt(1/m) [cos<w_1,x>, ..., cos<w_m,x>, sin<w_1,x>, ..., sin<w_m,x>],
    so each feature vector has unit norm exactly.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    rng = np.random.default_rng(params.seed)
    omega = rng.normal(scale=1.0 / params.sigma, size=(params.num_features, x.shape[1]))
    proj = x @ omega.T
    return np.hstack([np.cos(proj), np.sin(proj)]) * np.sqrt(1.0 / params.num_features)


def vendi_fkea(x: np.ndarray, params: FkeaParams | None = None) -> float:
    """Vendi score from the spectrum of the random-features covariance.

    phi^T phi / n shares its nonzero eigenvalues with the exact normalized
    Gram matrix of the approximated kernel, so the entropy is computed on a
    2m x 2m matrix regardless of sample size.
    """
    params = params or FkeaParams()
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    if n < 1:
        raise ValueError("vendi score needs at least one point")
    feats = rff_features(x, params)
    cov = feats.T @ feats / n  # trace is exactly 1
    lam = np.clip(np.linalg.eigvalsh(cov), 0.0, None)
    floor = 1e-10 * lam.max(initial=0.0)
    lam = np.where(lam < floor, 0.0, lam)
    lam = lam / lam.sum()
    return _entropy_from_spectrum(lam, params.renyi_alpha)
