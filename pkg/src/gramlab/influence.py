"""Bounded influence kernels used by the directional M-estimator.

``psi`` is the odd, non-decreasing, log-capped influence function whose
truncation replaces the raw squared projections in the estimation
criterion.  ``g`` measures its gap to the identity and ``chi`` is the
smooth quadratic-capped majorant used only by verification tests.
All named constants are evaluated from their closed forms at import
time so no precision is lost to hard-coded decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class InfluenceConstants:
    """Closed-form numerical constants attached to the kernel family.

    ``c`` drives the 0.73 coefficient of the certificate formulas via
    (2 + 3c) / (4 (2 + c)).  ``x1, y1, p1`` locate the junction where the
    quadratic cap of ``chi`` takes over from ``psi``; ``chi_sup`` is the
    supremum of ``chi``.
    """

    c: float
    x1: float
    y1: float
    p1: float
    chi_sup: float


def _compute_constants() -> InfluenceConstants:
    sqrt2 = math.sqrt(2.0)
    c = 15.0 / (8.0 * LOG2 * (sqrt2 - 1.0)) * math.exp((1.0 + 2.0 * sqrt2) / 2.0)
    x1 = 1.0 - math.sqrt(4.0 * sqrt2 - 5.0)
    y1 = -math.log(2.0 * (sqrt2 - 1.0))
    p1 = math.sqrt(4.0 * sqrt2 - 5.0) / (2.0 * (sqrt2 - 1.0))
    return InfluenceConstants(c=c, x1=x1, y1=y1, p1=p1, chi_sup=y1 + 2.0 * p1 * p1)


CONSTANTS = _compute_constants()

# (2 + 3c) / (4 (2 + c)), the dimension coefficient inside the certificate
# logs; bounded above by 0.73, which is the value the closed-form bounds use.
DIM_COEFF = (2.0 + 3.0 * CONSTANTS.c) / (4.0 * (2.0 + CONSTANTS.c))
# sqrt(2 + c) rounded up to 6.81 is the coefficient of the sqrt(2*kappa*d/n)
# term of mu.
MU_COEFF = math.sqrt(2.0 + CONSTANTS.c)


def _check_finite(x: np.ndarray | float, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def psi(x):
    """Clipped log influence function.

    log(2) for x >= 1, -log(1 - x + x^2/2) on [0, 1], odd extension below
    zero.  Both branches agree at x = 1.  Accepts scalars or arrays.
    """
    arr = _check_finite(x, "x")
    ax = np.abs(arr)
    # 1 - a + a^2/2 >= 1/2, so log1p is always in its domain.
    inner = -np.log1p(0.5 * ax * ax - ax)
    out = np.where(ax >= 1.0, LOG2, inner)
    out = np.copysign(out, arr)
    # copysign(0.0, -0.0) keeps the sign bit; normalize psi(+-0) to +0.0
    out = out + 0.0
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def psi_prime(x):
    """Derivative of ``psi``: (1 - |x|) / (1 - |x| + x^2/2) inside [-1, 1],
    zero outside; even."""
    arr = _check_finite(x, "x")
    ax = np.abs(arr)
    denom = 1.0 - ax + 0.5 * ax * ax
    out = np.where(ax >= 1.0, 0.0, (1.0 - ax) / denom)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def g(z):
    """Gap z - psi(z) between the identity and the clipped kernel.

    Odd, and bounded by max(z, 0)^(p+1) / (p+1) for every p in [0, 2].
    """
    arr = _check_finite(z, "z")
    out = arr - psi(arr)
    if np.isscalar(z) or arr.ndim == 0:
        return float(out)
    return out


def chi(x):
    """Quadratic-capped majorant of ``psi``.

    Coincides with psi below x1, continues with the concave parabola
    y1 + p1 (x - x1) - (x - x1)^2 / 8 up to x1 + 4 p1, then stays at its
    supremum y1 + 2 p1^2.  Used by tests to assert the majorant chain
    psi <= chi <= log(1 + x + x^2/2).
    """
    arr = _check_finite(x, "x")
    k = CONSTANTS
    t = arr - k.x1
    quad = k.y1 + k.p1 * t - t * t / 8.0
    out = np.where(arr <= k.x1, psi(arr), np.where(arr <= k.x1 + 4.0 * k.p1, quad, k.chi_sup))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out
