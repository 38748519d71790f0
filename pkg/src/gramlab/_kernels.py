"""Compiled inner loops of the directional criterion.

The root solver evaluates the criterion thousands of times per matrix
estimate, so the per-evaluation loop over the squared projections is
jitted.  Formulas mirror ``influence.psi`` / ``influence.psi_prime``
exactly (same branches, same log1p form).
"""

from __future__ import annotations

import math

from numba import njit

LOG2 = math.log(2.0)


@njit(cache=True)
def criterion(p2, lam, u):
    """(1/(n lam)) sum_i psi(lam (u p2_i - 1))."""
    n = p2.shape[0]
    s = 0.0
    for i in range(n):
        z = lam * (u * p2[i] - 1.0)
        az = abs(z)
        if az >= 1.0:
            v = LOG2
        else:
            v = -math.log1p(0.5 * az * az - az)
        s += v if z >= 0.0 else -v
    return s / (n * lam)


@njit(cache=True)
def qp_sweep(K, lo, hi, z, Kz):
    """One cyclic pass of exact coordinate maximization for the net dual.

    Mutates z and Kz in place; returns the largest coordinate move.
    """
    m = z.shape[0]
    max_move = 0.0
    for j in range(m):
        s = Kz[j] - K[j, j] * z[j]
        if s < lo[j]:
            t = (lo[j] - s) / K[j, j]
        elif s > hi[j]:
            t = (hi[j] - s) / K[j, j]
        else:
            t = 0.0
        dz = t - z[j]
        if dz != 0.0:
            for i in range(m):
                Kz[i] += dz * K[i, j]
            z[j] = t
            if abs(dz) > max_move:
                max_move = abs(dz)
    return max_move


@njit(cache=True)
def criterion_and_slope(p2, lam, u):
    """Criterion value and its u-derivative (1/n) sum_i p2_i psi'(lam (u p2_i - 1))."""
    n = p2.shape[0]
    s = 0.0
    d = 0.0
    for i in range(n):
        z = lam * (u * p2[i] - 1.0)
        az = abs(z)
        if az >= 1.0:
            v = LOG2
        else:
            v = -math.log1p(0.5 * az * az - az)
            d += p2[i] * (1.0 - az) / (1.0 - az + 0.5 * az * az)
        s += v if z >= 0.0 else -v
    return s / (n * lam), d / n
