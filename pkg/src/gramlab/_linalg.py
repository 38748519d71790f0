"""Shared symmetric-matrix helpers with one rank convention.

Eigenvalues below REL_RANK_TOL times the largest magnitude count as
zero everywhere (pseudo-inverse, ranks, span bases), so estimators and
downstream regression agree on what "zero" means.
"""

from __future__ import annotations

import numpy as np

REL_RANK_TOL = 1e-10


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def eig_cutoff(w: np.ndarray) -> float:
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return REL_RANK_TOL * scale


def rank_psd(M: np.ndarray) -> int:
    w = np.linalg.eigvalsh(symmetrize(np.asarray(M, dtype=float)))
    return int(np.sum(np.abs(w) > eig_cutoff(w)))


def pinv_psd(M: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of a symmetric matrix via eigendecomposition."""
    w, V = np.linalg.eigh(symmetrize(np.asarray(M, dtype=float)))
    cut = eig_cutoff(w)
    inv = np.where(np.abs(w) > cut, 1.0 / np.where(w == 0.0, 1.0, w), 0.0)
    return (V * inv) @ V.T


def pinv_sqrt_psd(M: np.ndarray) -> np.ndarray:
    """M^{-1/2} on the image of M, zero on its kernel."""
    w, V = np.linalg.eigh(symmetrize(np.asarray(M, dtype=float)))
    cut = eig_cutoff(w)
    inv_root = np.where(w > cut, 1.0 / np.sqrt(np.where(w <= 0.0, 1.0, w)), 0.0)
    return (V * inv_root) @ V.T


def span_basis(rows: np.ndarray) -> np.ndarray:
    """Orthonormal basis (d x r) of the row space of an n x d matrix."""
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        return np.zeros((rows.shape[1] if rows.ndim == 2 else 0, 0))
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > REL_RANK_TOL * max(smax, 1e-300)))
    return vt[:r].T
