"""Covariance estimation.

The empirical estimator uses the biased 1/n normalization, equal to the
pairwise double sum (1/(2 n^2)) sum_{ij} (X_i - X_j)(X_i - X_j)^T.  The
robust estimator handles the unknown mean by minimizing over a shift:
either direction-wise (inf over xi of the directional scale of the
shifted projections) or matrix-wise, by estimating the Gram matrix of
the extended variable (X, -1) and reducing it by a Schur complement,
which realizes the inf over the last coordinate for an exact quadratic
form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from ._linalg import rank_psd, symmetrize
from .direction import Projections, SolverConfig, adaptive_lambda, solve_S
from .gram import GramEstimate, robust_gram_iterative, robust_gram_net


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    method: str  # "empirical" | "robust"
    mean_proxy: Optional[np.ndarray] = None  # diagnostic: estimated shift per coordinate

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def _as_sample(sample: np.ndarray) -> np.ndarray:
    X = np.asarray(sample, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("sample must be a non-empty n x d matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("sample must be finite")
    return X


def empirical_covariance(sample: np.ndarray) -> CovarianceEstimate:
    """(1/n) sum_i (X_i - mean)(X_i - mean)^T, identical to the pairwise
    double-sum form with the biased n^2 normalization."""
    X = _as_sample(sample)
    mean = X.mean(axis=0)
    C = X - mean
    return CovarianceEstimate(symmetrize(C.T @ C / X.shape[0]), "empirical", mean_proxy=mean.copy())


def _scale_at_shift(p: np.ndarray, xi: float, eps: float, cfg: SolverConfig, lam: float | None) -> float:
    proj = Projections(p - xi)
    if float(np.mean(proj.values**2)) == 0.0:
        return 0.0
    lam_use = lam if lam is not None else adaptive_lambda(proj, eps)
    return solve_S(proj, lam_use, cfg).value


def robust_covariance_direction(
    sample: np.ndarray,
    theta: np.ndarray,
    eps: float = 0.05,
    cfg: SolverConfig = SolverConfig(),
    lam: float | None = None,
    grid: int = 128,
) -> float:
    """inf over xi of the robust scale of the shifted projections
    <theta, X_i> - xi.

    The objective is not guaranteed unimodal, so a coarse grid over an
    interval padded by one range on each side locates the best cell and
    a bounded scalar minimization refines inside it.
    """
    X = _as_sample(sample)
    theta = np.asarray(theta, dtype=float)
    p = X @ theta
    lo, hi = float(p.min()), float(p.max())
    span = hi - lo
    if span == 0.0:
        return 0.0  # all projections equal; optimal shift is the common value
    xs = np.linspace(lo - span, hi + span, grid)
    vals = [_scale_at_shift(p, x, eps, cfg, lam) for x in xs]
    k = int(np.argmin(vals))
    a = xs[max(0, k - 1)]
    b = xs[min(grid - 1, k + 1)]
    res = minimize_scalar(
        lambda x: _scale_at_shift(p, x, eps, cfg, lam),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-10 * max(1.0, span)},
    )
    return float(min(res.fun, min(vals)))


def robust_covariance(
    sample: np.ndarray,
    eps: float = 0.05,
    backend: str = "iterative",
    iters: int = 5,
    rho: float | None = None,
    delta: float | None = None,
    kappa: float | None = None,
    seed: int = 0,
) -> CovarianceEstimate:
    """Covariance via the extended variable (X, -1).

    Rows are centered at the empirical mean first (the minimization over
    the shift makes this mathematically neutral, and it keeps the
    estimate exactly translation invariant), then the chosen Gram
    backend runs on the extended rows and the covariance block is read
    off through the Schur complement A - b b^T / c of the extended
    estimate [[A, b], [b^T, c]].
    """
    X = _as_sample(sample)
    n, d = X.shape
    if n < 2:
        raise ValueError("robust covariance needs n >= 2")
    mean = X.mean(axis=0)
    ext = np.column_stack([X - mean, -np.ones(n)])
    if backend == "iterative":
        g: GramEstimate = robust_gram_iterative(ext, eps=eps, iters=iters)
    elif backend == "net":
        g = robust_gram_net(ext, eps=eps, delta=delta, rho=rho, kappa=kappa, seed=seed)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    A = g.matrix[:d, :d]
    b = g.matrix[:d, d]
    c = g.matrix[d, d]
    if c <= 0.0:
        raise ValueError(f"degenerate extended estimate: unit-coordinate energy {c:.4g} <= 0")
    sigma = symmetrize(A - np.outer(b, b) / c)
    # -b/c is the shift minimizing the extended quadratic form along each
    # canonical direction; add back the centering.
    return CovarianceEstimate(sigma, "robust", mean_proxy=mean - b / c)


def schur_complement(ext: np.ndarray) -> np.ndarray:
    """A - b b^T / c for ext = [[A, b], [b^T, c]]; the inf over the last
    coordinate of the extended quadratic form."""
    ext = np.asarray(ext, dtype=float)
    d = ext.shape[0] - 1
    c = ext[d, d]
    if c <= 0.0:
        raise ValueError("last diagonal entry must be positive")
    return symmetrize(ext[:d, :d] - np.outer(ext[:d, d], ext[:d, d]) / c)
