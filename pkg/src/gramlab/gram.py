"""Gram matrix estimators.

Three routes: the plain empirical average of outer products, an
iterative scheme that re-estimates the quadratic form by polarization in
the eigenbasis of the current estimate, and a certified construction
that measures the robust directional energy on a sphere net of the
sample span and solves a box-constrained dual quadratic program for the
minimum-Frobenius matrix consistent with those measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._linalg import REL_RANK_TOL, eig_cutoff, rank_psd, span_basis, symmetrize
from . import _kernels
from .bounds import BoundsInput, core_bounds
from .direction import Projections, SolverConfig, adaptive_lambda, solve_S


class NetQPError(RuntimeError):
    """Dual coordinate ascent failed to converge; carries a stagnation
    estimate and the worst primal constraint violation."""

    def __init__(self, message: str, gap_estimate: float, violation: float):
        super().__init__(message)
        self.gap_estimate = gap_estimate
        self.violation = violation


@dataclass(frozen=True)
class GramEstimate:
    """Symmetric matrix estimate with method tag and diagnostics."""

    matrix: np.ndarray
    method: str  # "empirical" | "robust_iter" | "robust_net"
    rank: int
    iterations_or_net_size: int
    constraint_violation: Optional[float] = None

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SphereNet:
    """Unit directions covering the sample span's unit sphere.

    Deterministic constructions guarantee the covering radius for span
    dimension <= 3; higher dimensions fall back to seeded random
    directions with an empirical covering estimate and no guarantee.
    """

    directions: np.ndarray  # m x d, unit rows inside the span
    rho: float
    covering_estimate: float

    def __len__(self) -> int:
        return self.directions.shape[0]


def _as_sample(sample: np.ndarray) -> np.ndarray:
    X = np.asarray(sample, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("sample must be a non-empty n x d matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("sample must be finite")
    return X


def empirical_gram(sample: np.ndarray) -> GramEstimate:
    """(1/n) sum_i X_i X_i^T."""
    X = _as_sample(sample)
    G = symmetrize(X.T @ X / X.shape[0])
    return GramEstimate(G, "empirical", rank_psd(G), 0)


def robust_scale(values: np.ndarray, eps: float = 0.05, cfg: SolverConfig = SolverConfig()) -> float:
    """Robust second-moment estimate of one projection vector: the
    criterion root at the adaptive scale."""
    p = Projections(values)
    if float(np.mean(p.values * p.values)) == 0.0:
        return 0.0
    lam = adaptive_lambda(p, eps)
    return solve_S(p, lam, cfg).value


def mean_square_scale(values: np.ndarray) -> float:
    """Plain mean of squares; test hook that makes one polarization pass
    reproduce the empirical Gram exactly."""
    arr = np.asarray(values, dtype=float)
    return float(np.mean(arr * arr))


def polarize_matrix(Z: np.ndarray, scale: Callable[[np.ndarray], float]) -> np.ndarray:
    """Quadratic-form reconstruction from coordinate projections:
    M_ij = (S(z_i + z_j) - S(z_i - z_j)) / 4, with M_ii = S(z_i) directly
    (the i = j polarization case reduces to it by homogeneity)."""
    d = Z.shape[1]
    M = np.zeros((d, d))
    for i in range(d):
        M[i, i] = scale(Z[:, i])
        for j in range(i + 1, d):
            plus = scale(Z[:, i] + Z[:, j])
            minus = scale(Z[:, i] - Z[:, j])
            M[i, j] = M[j, i] = 0.25 * (plus - minus)
    return M


def robust_gram_iterative(
    sample: np.ndarray,
    eps: float = 0.05,
    iters: int = 5,
    scale: Callable[[np.ndarray], float] | None = None,
    positive: bool = False,
) -> GramEstimate:
    """Eigenbasis polarization estimator.

    Starts from the empirical Gram; each pass eigendecomposes the
    current estimate, rebuilds the quadratic form by polarization of the
    robust directional scale in that basis, and rotates back.  A fixed
    number of passes, no convergence guarantee claimed.
    """
    X = _as_sample(sample)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if X.shape[0] < 2:
        raise ValueError("robust estimation needs n >= 2")
    if scale is None:
        scale = lambda v: robust_scale(v, eps)  # noqa: E731
    G = X.T @ X / X.shape[0]
    for _ in range(iters):
        _, V = np.linalg.eigh(symmetrize(G))
        if not np.all(np.isfinite(V)):
            raise FloatingPointError("eigendecomposition produced non-finite entries")
        Z = X @ V
        M = polarize_matrix(Z, scale)
        G = V @ M @ V.T
    G = symmetrize(G)
    est = GramEstimate(G, "robust_iter", rank_psd(G), iters)
    return positive_part(est) if positive else est


def _circle_net(count: int) -> np.ndarray:
    angles = 2.0 * math.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count)
    z = 1.0 - (2.0 * k + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(golden * k), r * np.sin(golden * k), z])


def _random_unit(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _covering_estimate(points: np.ndarray, probes: np.ndarray) -> float:
    """Max over probes of the distance to the nearest net point."""
    worst = 0.0
    step = 512
    for i in range(0, probes.shape[0], step):
        block = probes[i : i + step]
        d2 = np.maximum(0.0, 2.0 - 2.0 * block @ points.T)
        worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
    return worst


def build_sphere_net(
    sample: np.ndarray,
    rho: float,
    seed: int = 0,
    max_directions: int = 20000,
    probes: int = 4000,
) -> SphereNet:
    """Covering net of the unit sphere of the sample row span.

    Span dimension 1 gives the antipodal pair, dimension 2 an evenly
    spaced circle grid, dimension 3 a Fibonacci lattice grown until a
    probe check confirms the covering radius.  Above dimension 3 the net
    is seeded random directions (plus antipodes) reported with an
    empirical covering estimate only.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    X = _as_sample(sample)
    B = span_basis(X)
    r = B.shape[1]
    if r == 0:
        raise ValueError("sample span has dimension 0")
    rng = np.random.default_rng(seed)
    if r == 1:
        local = np.array([[1.0], [-1.0]])
        estimate = 0.0
    elif r == 2:
        count = max(3, math.ceil(2.0 * math.pi / (2.0 * math.asin(min(1.0, rho / 2.0)))))
        local = _circle_net(count)
        estimate = _covering_estimate(local, _random_unit(rng, probes, 2))
    elif r == 3:
        count = min(max_directions, max(32, math.ceil(10.0 / rho**2)))
        while True:
            local = _fibonacci_sphere(count)
            estimate = _covering_estimate(local, _random_unit(rng, probes, 3))
            if estimate <= 0.98 * rho or count >= max_directions:
                break
            count = min(max_directions, math.ceil(count * 1.6))
        if estimate > rho:
            raise ValueError("could not reach the requested covering radius within max_directions")
    else:
        count = min(max_directions, max(128, 4 * r * r))
        half = _random_unit(rng, count // 2, r)
        local = np.vstack([half, -half])
        estimate = _covering_estimate(local, _random_unit(rng, probes, r))
    dirs = local @ B.T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return SphereNet(directions=dirs, rho=rho, covering_estimate=estimate)


def corollary_radius(delta: float, nhat_min: float, nhat_basis_sum: float) -> float:
    """Net radius small enough for the certified ratio bound:
    delta^2 * min directional estimate / (2 * sum of basis estimates)."""
    if nhat_basis_sum <= 0.0:
        raise ValueError("basis estimate sum must be positive")
    return delta**2 * nhat_min / (2.0 * nhat_basis_sum)


def solve_net_qp(
    directions: np.ndarray,
    nhat: Sequence[float],
    delta: float,
    tol: float = 1e-12,
    max_sweeps: int = 100000,
):
    """Box-constrained dual of the minimum-Frobenius feasibility program.

    Maximizes -z^T K z / 2 + sum_j [max(z_j,0) B-_j - max(-z_j,0) B+_j]
    over z (the positive/negative parts are the dual variables of the
    upper/lower quadratic-form constraints), with K_ij = <theta_i,
    theta_j>^2, by cyclic coordinate ascent with exact clamped 1-D
    updates.  Returns (matrix, z, worst constraint violation, sweeps).
    """
    D = np.asarray(directions, dtype=float)
    nhat = np.asarray(nhat, dtype=float)
    if nhat.shape[0] != D.shape[0]:
        raise ValueError("one energy value per net direction required")
    if np.any(nhat < 0.0):
        raise ValueError("energies must be non-negative")
    if not (0.0 < delta < 0.5):
        raise ValueError("delta must lie in (0, 1/2)")
    lo = (1.0 - delta) * nhat
    hi = (1.0 + delta) * nhat
    K = (D @ D.T) ** 2
    m = D.shape[0]
    z = np.zeros(m)
    Kz = np.zeros(m)
    scale = max(1.0, float(nhat.max(initial=0.0)))

    def progress() -> tuple[float, float]:
        # primal violation of the implied matrix and the duality gap
        # z^T K z - sum_j z_j (active bound)_j; both vanish at optimality
        v = float(max(0.0, np.max(lo - Kz, initial=0.0), np.max(Kz - hi, initial=0.0)))
        obj = float(z @ Kz)
        gap = obj - float(np.sum(np.where(z > 0.0, z * lo, z * hi)))
        return v, max(0.0, gap)

    sweeps = 0
    converged = False
    max_move = 0.0
    for sweeps in range(1, max_sweeps + 1):
        max_move = float(_kernels.qp_sweep(K, lo, hi, z, Kz))
        if sweeps % 64 == 0:
            Kz = K @ z  # shed the drift of the incremental updates
        if max_move < tol * scale:
            converged = True
            break
        # the dual optimum can be a whole face when K is rank deficient
        # (more directions than matrix degrees of freedom), where the
        # coordinate moves never die out; accept a primal certificate
        if sweeps % 16 == 0:
            v, gap = progress()
            if v <= 1e-9 * scale and gap <= 1e-8 * max(scale**2, float(z @ Kz)):
                converged = True
                break
    H = symmetrize(D.T @ (z[:, None] * D))
    qd = np.einsum("ij,ij->i", D @ H, D)
    violation = float(max(0.0, np.max(lo - qd, initial=0.0), np.max(qd - hi, initial=0.0)))
    if not converged and violation > 1e-6 * scale:
        v, gap = progress()
        raise NetQPError(
            f"coordinate ascent stagnated after {max_sweeps} sweeps",
            gap_estimate=gap,
            violation=violation,
        )
    return H, z, violation, sweeps


def robust_gram_net(
    sample: np.ndarray,
    eps: float = 0.05,
    delta: float | None = None,
    net: SphereNet | None = None,
    rho: float | None = None,
    kappa: float | None = None,
    nhat: Sequence[float] | None = None,
    cfg: SolverConfig = SolverConfig(),
    seed: int = 0,
) -> GramEstimate:
    """Certified net estimator.

    Measures the robust directional energy on every net direction (or
    takes precomputed values) and returns the minimum-Frobenius
    symmetric matrix whose quadratic form matches all measurements
    within a factor 1 +- delta.  delta defaults to the certificate
    delta_hat when kappa is supplied.
    """
    X = _as_sample(sample)
    if net is None:
        if rho is None:
            raise ValueError("provide either a net or a covering radius rho")
        net = build_sphere_net(X, rho, seed=seed)
    if delta is None:
        if kappa is None:
            raise ValueError("provide delta explicitly or kappa to derive it")
        rep = core_bounds(BoundsInput(kappa=kappa, d=X.shape[1], n=X.shape[0], eps=eps))
        delta = rep.delta_hat
    if not (0.0 < delta < 0.5):
        raise ValueError(f"delta = {delta:.4g} outside (0, 1/2); the net construction needs a tighter certificate")
    if nhat is None:
        nhat = [solve_S(Projections(X @ th), adaptive_lambda(Projections(X @ th), eps), cfg).value for th in net.directions]
    H, _, violation, _ = solve_net_qp(net.directions, nhat, delta)
    return GramEstimate(H, "robust_net", rank_psd(H), len(net), constraint_violation=violation)


def positive_part(g: GramEstimate | np.ndarray) -> GramEstimate:
    """Clip negative eigenvalues to zero."""
    if isinstance(g, GramEstimate):
        M, method, its, viol = g.matrix, g.method, g.iterations_or_net_size, g.constraint_violation
    else:
        M, method, its, viol = np.asarray(g, dtype=float), "empirical", 0, None
    w, V = np.linalg.eigh(symmetrize(M))
    P = symmetrize((V * np.maximum(w, 0.0)) @ V.T)
    return GramEstimate(P, method, rank_psd(P), its, viol)


def eigenvalue_report(estimate: GramEstimate | np.ndarray, reference: GramEstimate | np.ndarray) -> float:
    """Worst relative eigenvalue deviation sup_i |l^_i / l_i - 1| over the
    descending-sorted spectra, with 0/0 = 1 (deviation 0) and z/0 =
    +inf.  Eigenvalues below the relative rank cutoff count as zero."""
    A = estimate.matrix if isinstance(estimate, GramEstimate) else np.asarray(estimate, dtype=float)
    B = reference.matrix if isinstance(reference, GramEstimate) else np.asarray(reference, dtype=float)
    if A.shape != B.shape:
        raise ValueError("matrices must share a dimension")
    wa = np.sort(np.linalg.eigvalsh(symmetrize(A)))[::-1]
    wb = np.sort(np.linalg.eigvalsh(symmetrize(B)))[::-1]
    cut_a = eig_cutoff(wa)
    cut_b = eig_cutoff(wb)
    worst = 0.0
    for la, lb in zip(wa, wb):
        za = abs(la) <= cut_a
        zb = abs(lb) <= cut_b
        if za and zb:
            continue
        if zb:
            return math.inf
        worst = max(worst, abs(la / lb - 1.0))
    return worst
