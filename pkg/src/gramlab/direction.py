"""Directional robust energy estimator.

For a direction theta the estimator returns the scale rho at which the
truncated criterion sum_i psi(lam (rho^{-1} <theta, X_i>^2 - 1)) crosses
zero.  The root is found on the u = 1/rho scale by a safeguarded hybrid
of bisection and Newton steps that keeps bisection's global 2^{-k}
bracket guarantee while converging locally at Newton speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .influence import psi

_TINY_ELL = 1e-14
_MAX_DOUBLINGS = 60


class SolverError(RuntimeError):
    """Root search failed; carries the last bracketing interval."""

    def __init__(self, message: str, bracket=None):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class Projections:
    """One-dimensional projections <theta, X_i> of the sample rows."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=float).ravel())
        if arr.size < 1:
            raise ValueError("need at least one projection")
        if not np.all(np.isfinite(arr)):
            raise ValueError("projections must be finite")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10  # on the u = 1/rho scale
    max_iter: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class DirectionalEstimate:
    """Estimated energy plus solver diagnostics.

    value is 0 exactly when the criterion never becomes positive
    (alpha_infinite), which happens in particular when every projection
    vanishes.  bracket0/bracket are the initial and final enclosing
    intervals on the u = 1/value scale.
    """

    value: float
    alpha_infinite: bool
    iterations: int
    residual: float
    doublings: int = 0
    bracket0: tuple[float, float] | None = None
    bracket: tuple[float, float] | None = None


def r_lambda(p: Projections, lam: float, u: float) -> float:
    """Empirical criterion at squared rescaling u = alpha^2:
    (1/(n lam)) sum_i psi(lam (u p_i^2 - 1))."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if u < 0.0:
        raise ValueError("u must be non-negative")
    return float(_kernels.criterion(p.values * p.values, lam, float(u)))


def limit_criterion(p: Projections, lam: float) -> float:
    """Limit of the criterion as u -> infinity:
    [#nonzero log 2 - #zero psi(lam)] / (n lam)."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    nonzero = int(np.count_nonzero(p.values))
    zero = p.n - nonzero
    return (nonzero * _kernels.LOG2 - zero * psi(lam)) / (p.n * lam)


def solve_S(p: Projections, lam: float, cfg: SolverConfig = SolverConfig()) -> DirectionalEstimate:
    """Solve for the scale at which the truncated criterion crosses zero.

    Works on u = alpha^2 = 1/rho.  Candidates per iteration are the
    midpoint plus the Newton images of both bracket ends; the bracket
    therefore shrinks at least as fast as bisection and locally as fast
    as Newton.  Returns rho = 1/u*.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    p2 = p.values * p.values
    n = p.n

    ell = limit_criterion(p, lam)
    if ell <= 0.0:
        return DirectionalEstimate(
            value=0.0, alpha_infinite=True, iterations=0, residual=abs(ell)
        )

    cache: dict[float, float] = {}
    slope_cache: dict[float, float] = {}

    def r(u: float) -> float:
        v = cache.get(u)
        if v is None:
            v = float(_kernels.criterion(p2, lam, u))
            cache[u] = v
        return v

    def slope(u: float) -> float:
        v = slope_cache.get(u)
        if v is None:
            rv, v = _kernels.criterion_and_slope(p2, lam, u)
            cache[u] = float(rv)
            slope_cache[u] = float(v)
        return v

    cache[0.0] = -psi(lam) / lam  # analytic value at u = 0

    mean_sq = float(np.mean(p2))
    min_nonzero = float(np.min(p2[p2 > 0.0]))
    start = [0.0, 1.0 / mean_sq, (1.0 + 1.0 / lam) / min_nonzero]

    a = 0.0
    b = math.inf
    for u in start:
        if r(u) <= 0.0:
            a = max(a, u)
        else:
            b = min(b, u)

    # With exact arithmetic the largest starting point has a positive
    # criterion whenever ell > 0; under roundoff it can fail, so grow the
    # bracket geometrically until the sign changes.
    doublings = 0
    if not math.isfinite(b):
        u = max(start) * 2.0
        while doublings < _MAX_DOUBLINGS:
            doublings += 1
            if r(u) > 0.0:
                b = u
                break
            a = max(a, u)
            u *= 2.0
        if not math.isfinite(b):
            raise SolverError(
                "criterion stayed non-positive after bracket doubling", bracket=(a, u)
            )

    bracket0 = (a, b)

    def converged() -> bool:
        # Either the bracket is tight, or a Newton step from one bracket end
        # would move it by less than the tolerance (the root is monotone
        # and simple, so |r/r'| bounds the distance to it).
        if b - a <= cfg.rel_tol * max(b, 1e-300):
            return True
        for end in (a, b):
            if end > 0.0:
                s = slope(end)
                if s > 1e-300 and abs(r(end)) / s <= cfg.rel_tol * end:
                    return True
        return False

    iterations = 0
    for _ in range(cfg.max_iter):
        if converged():
            break
        iterations += 1
        candidates = [0.5 * (a + b)]
        for end in (a, b):
            s = slope(end)
            if s > 1e-300:
                nu = end - r(end) / s
                if math.isfinite(nu) and nu >= 0.0:
                    candidates.append(nu)
        for u in candidates:
            if a < u < b:
                if r(u) <= 0.0:
                    a = u
                else:
                    b = u
    else:
        raise SolverError("max_iter exceeded", bracket=(a, b))

    u_star = a if r(0.5 * (a + b)) > 0.0 else b
    if u_star <= 0.0:
        u_star = b
    return DirectionalEstimate(
        value=1.0 / u_star,
        alpha_infinite=False,
        iterations=iterations,
        residual=abs(r(u_star)),
        doublings=doublings,
        bracket0=bracket0,
        bracket=(a, b),
    )


def bisection_oracle(
    p: Projections, lam: float, steps: int = 200
) -> DirectionalEstimate:
    """Pure divide-and-conquer reference solver (no Newton steps).

    Uses the same starting bracket as :func:`solve_S` and halves it a
    fixed number of times.  Serves as the independent cross-check for
    the hybrid scheme.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    p2 = p.values * p.values
    ell = limit_criterion(p, lam)
    if ell <= 0.0:
        return DirectionalEstimate(0.0, True, 0, abs(ell))

    def r(u: float) -> float:
        return float(_kernels.criterion(p2, lam, u))

    mean_sq = float(np.mean(p2))
    min_nonzero = float(np.min(p2[p2 > 0.0]))
    start = [0.0, 1.0 / mean_sq, (1.0 + 1.0 / lam) / min_nonzero]
    a = 0.0
    b = math.inf
    for u in start:
        if u == 0.0 or r(u) <= 0.0:
            a = max(a, u)
        else:
            b = min(b, u)
    doublings = 0
    if not math.isfinite(b):
        u = max(start) * 2.0
        while doublings < _MAX_DOUBLINGS:
            doublings += 1
            if r(u) > 0.0:
                b = u
                break
            a = max(a, u)
            u *= 2.0
        if not math.isfinite(b):
            raise SolverError("criterion stayed non-positive", bracket=(a, u))
    for _ in range(steps):
        mid = 0.5 * (a + b)
        if r(mid) <= 0.0:
            a = mid
        else:
            b = mid
    u_star = b if r(0.5 * (a + b)) <= 0.0 else a
    if u_star <= 0.0:
        u_star = b
    return DirectionalEstimate(1.0 / u_star, False, steps, abs(r(u_star)), doublings)


def adaptive_lambda(p: Projections, eps: float = 0.05) -> float:
    """Data-driven criterion scale

    lam = m sqrt(t (1 - t) / v) with t = (2/n) log(1/eps), m and v the
    mean and variance of the squared projections.  Falls back to
    1 / (2 m) when v = 0, which keeps the criterion in the linear zone
    of psi so the estimator reduces to the (constant) empirical mean.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if p.n < 2:
        raise ValueError("need at least two projections")
    p2 = p.values * p.values
    m = float(np.mean(p2))
    if m == 0.0:
        return 1.0  # all projections vanish; any scale yields estimate 0
    v = float(np.mean((p2 - m) ** 2))
    if v == 0.0:
        return 1.0 / (2.0 * m)  # degenerate spread: needs no confidence input
    t = (2.0 / p.n) * math.log(1.0 / eps)
    if t >= 1.0:
        raise ValueError("sample too small for confidence level (2/n log(1/eps) >= 1)")
    return m * math.sqrt(t * (1.0 - t) / v)


def estimate_direction(
    sample: np.ndarray,
    theta: np.ndarray,
    eps: float = 0.05,
    cfg: SolverConfig = SolverConfig(),
    lam: float | None = None,
) -> DirectionalEstimate:
    """Robust energy estimate in direction theta.

    Projects the rows onto theta and solves the truncated criterion,
    with the adaptive scale unless lam is prescribed.  Homogeneous of
    degree 2 in theta.
    """
    sample = np.asarray(sample, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if sample.ndim != 2:
        raise ValueError("sample must be an n x d matrix")
    if theta.shape != (sample.shape[1],):
        raise ValueError("theta dimension does not match the sample")
    p = Projections(sample @ theta)
    if lam is None:
        p2 = p.values * p.values
        if float(np.mean(p2)) == 0.0:
            return DirectionalEstimate(0.0, True, 0, 0.0)
        lam = adaptive_lambda(p, eps)
    return solve_S(p, lam, cfg)
