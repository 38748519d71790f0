"""Least squares with random design.

Ordinary least squares goes through the pseudo-inverse of the empirical
Gram matrix (minimum-norm solution on rank-deficient designs).  The
robust fit estimates the Gram matrix of the stacked variable (X, -Y)
and reads the coefficients off its blocks: theta = -A^+ b for the
estimate [[A, b], [b^T, c]].  Certificate quantities follow the
quadratic-form reduction: an estimator with two-sided ratio accuracy
delta has excess risk at most delta^2 / ((1-delta)(1-delta^2)) times
its own risk value at the fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._linalg import pinv_psd, rank_psd, symmetrize
from .gram import robust_gram_iterative, robust_gram_net


@dataclass(frozen=True)
class LabeledSample:
    """Design matrix X (n x d) with responses Y (n)."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ValueError("X must be n x d with matching Y of length n")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("sample must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def extended_rows(self) -> np.ndarray:
        """Stacked rows (X_i, -Y_i) whose Gram matrix encodes the risk."""
        return np.column_stack([self.X, -self.Y])


@dataclass(frozen=True)
class RegressionFit:
    theta: np.ndarray
    method: str  # "ols" | "robust"
    rank_used: int
    extended_gram: Optional[np.ndarray] = None


def ols(sample: LabeledSample) -> RegressionFit:
    """Minimum-norm empirical risk minimizer via the pseudo-inverse of
    the empirical Gram matrix."""
    n = sample.n
    G = sample.X.T @ sample.X / n
    rhs = sample.X.T @ sample.Y / n
    theta = pinv_psd(G) @ rhs
    return RegressionFit(theta=theta, method="ols", rank_used=rank_psd(G))


def robust_ls(
    sample: LabeledSample,
    eps: float = 0.05,
    backend: str = "iterative",
    iters: int = 5,
    rho: float | None = None,
    delta: float | None = None,
    kappa: float | None = None,
    extended_gram: np.ndarray | None = None,
    seed: int = 0,
) -> RegressionFit:
    """Robust coefficients from an extended Gram estimate.

    The (d+1) x (d+1) estimate of E[(X, -Y)(X, -Y)^T] is computed by the
    requested backend (or taken from ``extended_gram``, the synthetic
    hook used by tests), and theta = -(top-left block)^+ (top-right
    column).
    """
    d = sample.d
    if extended_gram is not None:
        ext = symmetrize(np.asarray(extended_gram, dtype=float))
        if ext.shape != (d + 1, d + 1):
            raise ValueError("extended_gram must be (d+1) x (d+1)")
    else:
        rows = sample.extended_rows()
        if backend == "iterative":
            ext = robust_gram_iterative(rows, eps=eps, iters=iters).matrix
        elif backend == "net":
            ext = robust_gram_net(rows, eps=eps, delta=delta, rho=rho, kappa=kappa, seed=seed).matrix
        else:
            raise ValueError(f"unknown backend {backend!r}")
    A = ext[:d, :d]
    theta = -pinv_psd(A) @ ext[:d, d]
    return RegressionFit(theta=theta, method="robust", rank_used=rank_psd(A), extended_gram=ext)


def risk(theta: np.ndarray, G_ext: np.ndarray) -> float:
    """Quadratic risk of theta against an extended second-moment matrix
    of (X, -Y): the value of the extended form at (theta, 1)."""
    theta = np.asarray(theta, dtype=float)
    G_ext = np.asarray(G_ext, dtype=float)
    d = theta.shape[0]
    if G_ext.shape != (d + 1, d + 1):
        raise ValueError("G_ext must be (d+1) x (d+1)")
    if not np.allclose(G_ext, G_ext.T, atol=1e-10 * max(1.0, float(np.abs(G_ext).max()))):
        raise ValueError("G_ext must be symmetric")
    v = np.append(theta, 1.0)
    return float(v @ G_ext @ v)


def empirical_extended_gram(sample: LabeledSample) -> np.ndarray:
    """(1/n) sum_i (X_i, -Y_i)(X_i, -Y_i)^T."""
    rows = sample.extended_rows()
    return symmetrize(rows.T @ rows / sample.n)


def excess_bound_factor(delta: float) -> float:
    """delta^2 / ((1 - delta)(1 - delta^2)); +inf at delta >= 1."""
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    if delta >= 1.0:
        return math.inf
    return delta**2 / ((1.0 - delta) * (1.0 - delta**2))


def confidence_region_factor(delta: float) -> float:
    """delta^2 / (1 - delta)^2; +inf at delta >= 1."""
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    if delta >= 1.0:
        return math.inf
    return delta**2 / (1.0 - delta) ** 2


@dataclass(frozen=True)
class RiskCertificate:
    excess_bound: float
    confidence_region_radius: float
    infinite: bool


def prop_certificate(fit: RegressionFit, delta: float) -> RiskCertificate:
    """Observable excess-risk and confidence-region certificate.

    Requires a two-sided ratio accuracy delta of the fit's extended
    quadratic form; both numbers scale its value at (theta, 1).
    delta >= 1 flags an infinite certificate instead of raising.
    """
    if fit.extended_gram is None:
        raise ValueError("certificate requires a fit carrying an extended Gram estimate")
    value = risk(fit.theta, fit.extended_gram)
    if delta >= 1.0:
        return RiskCertificate(math.inf, math.inf, True)
    return RiskCertificate(
        excess_bound=excess_bound_factor(delta) * value,
        confidence_region_radius=confidence_region_factor(delta) * value,
        infinite=False,
    )
