"""Closed-form certificate quantities for the robust directional estimator.

Everything in this module is a deterministic formula: the scale lambda,
the deviation bound mu and its ratio form delta_hat, the sample-size
threshold n_min, the second-order terms gamma_-, gamma_hat_+ and the two
gamma_tilde_+ variants, the truncated-mean constant C_q, the kurtosis
shift/split inequalities and the exact first-order rate constant C.
Moments are always caller-supplied; nothing here touches data except
``exact_rate_constant``, which averages an observable over a sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._linalg import pinv_sqrt_psd

# Numeric coefficients of the published formulas.  DIM_COEFF of the
# influence module evaluates to ~0.7284 and MU_COEFF to ~6.804; the
# certificate formulas use their rounded-up two-decimal forms.
DCOEFF = 0.73
MCOEFF = 6.81


@dataclass(frozen=True)
class BoundsInput:
    """Problem description for the certificate formulas.

    kappa is the directional kurtosis bound (must exceed 1), d the
    ambient dimension, n the sample size and eps the confidence
    parameter in (0, 1/2).
    """

    kappa: float
    d: int
    n: int
    eps: float

    def __post_init__(self):
        if not (self.kappa > 1.0):
            raise ValueError("kappa must be > 1 (formulas divide by kappa - 1)")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0.0 < self.eps < 0.5):
            raise ValueError("eps must lie in (0, 1/2)")

    @property
    def log_term(self) -> float:
        """log(1/eps) + 0.73 d, the combined confidence/dimension weight."""
        return math.log(1.0 / self.eps) + DCOEFF * self.d


@dataclass(frozen=True)
class BoundsReport:
    """Certificate quantities for one (kappa, d, n, eps) configuration.

    delta_hat = mu / (1 - 2 mu) is +inf when mu >= 1/2.  feasible means
    n exceeds the sample-size threshold and mu < 1/2; delta_hat >= 1 is
    possible on feasible configurations and is reported as-is.
    """

    lam: float
    mu: float
    delta_hat: float
    gamma_minus: float
    n_min: float
    feasible: bool

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "delta_hat": self.delta_hat,
            "gamma_minus": self.gamma_minus,
            "n_min": self.n_min,
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class MomentInputs:
    """Caller-supplied moment data for the second-order terms.

    Design moments are moments of ||G^{-1/2} X||^2: moment_2p2 is the
    (p+1)-th, moment_4p4 the (2p+2)-th and moment_2qp1 the q(p+1)-th
    moment of that squared norm.  alpha1/eta1 (and alpha2/eta2 for the
    regression variant) are exponential-moment parameters.  Unknown
    entries stay None and the variants that need them are skipped.
    """

    p: float = 2.0
    q: float = 2.0
    alpha1: Optional[float] = None
    eta1: Optional[float] = None
    alpha2: Optional[float] = None
    eta2: Optional[float] = None
    moment_2p2: Optional[float] = None
    moment_4p4: Optional[float] = None
    moment_2qp1: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.p <= 2.0):
            raise ValueError("p must lie in (0, 2]")
        if not (1.0 <= self.q <= 2.0):
            raise ValueError("q must lie in [1, 2]")
        for name in ("moment_2p2", "moment_4p4", "moment_2qp1"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v < 0.0):
                raise ValueError(f"{name} must be a finite non-negative real")


@dataclass(frozen=True)
class GammaPlusReport:
    """The three alternative second-order upper terms.

    gamma_hat_plus comes from the exponential-moment radius bound,
    gamma_tilde_plus_p24 from the Bienayme-Chebyshev term in 1/sqrt(n eps)
    and gamma_tilde_plus_lem25 from the truncated-mean bound with
    C_q / (eps^{1/q} n^{1-1/q}).  Entries are None when their moment
    inputs were not supplied.
    """

    gamma_hat_plus: Optional[float]
    gamma_tilde_plus_p24: Optional[float]
    gamma_tilde_plus_lem25: Optional[float]


def core_bounds(inp: BoundsInput) -> BoundsReport:
    """Scale, deviation bound and feasibility threshold.

    lambda = sqrt(2 [log(1/eps) + 0.73 d] / ((kappa-1) n)),
    mu = sqrt(2 (kappa-1) [log(1/eps) + 0.73 d] / n) + 6.81 sqrt(2 kappa d / n),
    gamma_- = 2 [log(1/eps) + 0.73 d] / (3 (kappa-1) n), and n_min is the
    squared bracket [20 sqrt(kappa d) + (5/2 + 1/(2(kappa-1)))
    sqrt(2 (kappa-1) [log(1/eps) + 0.73 d])]^2.
    """
    kappa, d, n = inp.kappa, inp.d, inp.n
    L = inp.log_term
    lam = math.sqrt(2.0 * L / ((kappa - 1.0) * n))
    mu = math.sqrt(2.0 * (kappa - 1.0) * L / n) + MCOEFF * math.sqrt(2.0 * kappa * d / n)
    delta_hat = mu / (1.0 - 2.0 * mu) if mu < 0.5 else math.inf
    gamma_minus = 2.0 * L / (3.0 * (kappa - 1.0) * n)
    n_min = (
        20.0 * math.sqrt(kappa * d)
        + (2.5 + 0.5 / (kappa - 1.0)) * math.sqrt(2.0 * (kappa - 1.0) * L)
    ) ** 2
    feasible = (n > n_min) and (mu < 0.5)
    return BoundsReport(
        lam=lam,
        mu=mu,
        delta_hat=delta_hat,
        gamma_minus=gamma_minus,
        n_min=n_min,
        feasible=feasible,
    )


def covariance_bounds(kappa: float, d: int, n: int, eps: float) -> BoundsReport:
    """Certificate for centered estimation: kappa + 2 sqrt(kappa) replaces
    kappa - 1 and d + 1 replaces d, i.e. the core formulas at the shifted
    kurtosis (sqrt(kappa) + 1)^2 in dimension d + 1."""
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    return core_bounds(BoundsInput(kappa=kurtosis_shift(kappa), d=d + 1, n=n, eps=eps))


def regression_bounds(kappa1: float, kappa2: float, d: int, n: int, eps: float) -> BoundsReport:
    """Certificate for the extended regression variable (X, -Y): the core
    formulas with kappa replaced by (sqrt(kappa1) + sqrt(kappa2))^2 and d
    by d + 1.  Infeasible combinations come back flagged, not raised."""
    return core_bounds(BoundsInput(kappa=kurtosis_split(kappa1, kappa2), d=d + 1, n=n, eps=eps))


def gamma_hat_plus(inp: BoundsInput, m: MomentInputs, delta_hat: float) -> float:
    """Exponential-moment second-order term:

    2 [log(1/eps) + 0.73 d] [d^p + 2 log(n/eps)/alpha + eta]^{2/p}
    (1 + delta_hat)^2 / (3 (kappa-1) n), using the d^p relaxation of the
    2p-th design moment.
    """
    if m.alpha1 is None or m.eta1 is None:
        raise ValueError("gamma_hat_plus needs alpha1 and eta1")
    if not (0.0 < m.p <= 1.0):
        raise ValueError("the exponential-moment variant needs p in (0, 1]")
    radius = inp.d**m.p + 2.0 / m.alpha1 * math.log(inp.n / inp.eps) + m.eta1
    return (
        2.0
        * inp.log_term
        * radius ** (2.0 / m.p)
        * (1.0 + delta_hat) ** 2
        / (3.0 * (inp.kappa - 1.0) * inp.n)
    )


def gamma_tilde_plus_p24(inp: BoundsInput, m: MomentInputs, delta_hat: float) -> float:
    """Polynomial-moment second-order term with the 1/sqrt(n eps) tail:

    (1/(p+1)) (2 [log(1/eps) + 0.73 d] / ((kappa-1) n))^{p/2}
    (1 + delta_hat)^{p+1} [M_{2p+2} + sqrt(M_{4p+4} / (n eps))].
    """
    if m.moment_2p2 is None or m.moment_4p4 is None:
        raise ValueError("gamma_tilde_plus_p24 needs moment_2p2 and moment_4p4")
    lam_sq = 2.0 * inp.log_term / ((inp.kappa - 1.0) * inp.n)
    return (
        lam_sq ** (m.p / 2.0)
        / (m.p + 1.0)
        * (1.0 + delta_hat) ** (m.p + 1.0)
        * (m.moment_2p2 + math.sqrt(m.moment_4p4 / (inp.n * inp.eps)))
    )


def gamma_tilde_plus_lem25(inp: BoundsInput, m: MomentInputs, delta_hat: float) -> float:
    """Polynomial-moment second-order term with the truncated-mean tail:

    like :func:`gamma_tilde_plus_p24` but the tail term is
    C_q M_{q(p+1)}^{1/q} / (eps^{1/q} n^{1 - 1/q}).
    """
    if m.moment_2p2 is None or m.moment_2qp1 is None:
        raise ValueError("gamma_tilde_plus_lem25 needs moment_2p2 and moment_2qp1")
    lam_sq = 2.0 * inp.log_term / ((inp.kappa - 1.0) * inp.n)
    tail = (
        cq_constant(m.q)
        * m.moment_2qp1 ** (1.0 / m.q)
        / (inp.eps ** (1.0 / m.q) * inp.n ** (1.0 - 1.0 / m.q))
    )
    return (
        lam_sq ** (m.p / 2.0)
        / (m.p + 1.0)
        * (1.0 + delta_hat) ** (m.p + 1.0)
        * (m.moment_2p2 + tail)
    )


def gamma_plus_variants(inp: BoundsInput, m: MomentInputs, delta_hat: float) -> GammaPlusReport:
    """All second-order variants whose moment inputs are available."""
    ghat = None
    if m.alpha1 is not None and m.eta1 is not None and 0.0 < m.p <= 1.0:
        ghat = gamma_hat_plus(inp, m, delta_hat)
    g24 = None
    if m.moment_2p2 is not None and m.moment_4p4 is not None:
        g24 = gamma_tilde_plus_p24(inp, m, delta_hat)
    g25 = None
    if m.moment_2p2 is not None and m.moment_2qp1 is not None:
        g25 = gamma_tilde_plus_lem25(inp, m, delta_hat)
    if ghat is None and g24 is None and g25 is None:
        raise ValueError("no gamma_+ variant computable from the supplied moments")
    return GammaPlusReport(
        gamma_hat_plus=ghat,
        gamma_tilde_plus_p24=g24,
        gamma_tilde_plus_lem25=g25,
    )


_Q_EDGE = 1e-9
_Q_SLACK = 1e-6


def cq_constant(q: float) -> float:
    """Constant of the truncated-mean bound:

    C_q = q^{q-1} / (2 (q-1)^{q-1} (1 - q/2)^{(2-q)/q}), with the limits
    C_1 = C_2 = 1 at the endpoints.  Bounded by 1.4 on [1, 2].
    """
    if not (1.0 - _Q_SLACK <= q <= 2.0 + _Q_SLACK):
        raise ValueError("q must lie in [1, 2]")
    q = min(max(q, 1.0), 2.0)
    if q - 1.0 < _Q_EDGE or 2.0 - q < _Q_EDGE:
        return 1.0
    return q ** (q - 1.0) / (2.0 * (q - 1.0) ** (q - 1.0) * (1.0 - q / 2.0) ** ((2.0 - q) / q))


def truncated_mean_bound(EW: float, EWq: float, q: float, n: int, eps: float) -> float:
    """High-probability upper bound for the mean of n iid non-negative W:

    E(W) + C_q E(W^q)^{1/q} / (eps^{1/q} n^{1 - 1/q}), valid with
    probability at least 1 - 2 eps.
    """
    if EW < 0.0 or EWq < 0.0:
        raise ValueError("moments must be non-negative")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    cq = cq_constant(q)
    if EWq > 0.0 and q >= 1.0 and EWq < EW**q * (1.0 - 1e-12):
        import warnings

        warnings.warn("E(W^q) < E(W)^q violates Jensen; inputs look inconsistent")
    return EW + cq * EWq ** (1.0 / q) / (eps ** (1.0 / q) * n ** (1.0 - 1.0 / q))


def kurtosis_shift(kappa: float) -> float:
    """Kurtosis usable after centering: (sqrt(kappa) + 1)^2."""
    if kappa < 0.0:
        raise ValueError("kappa must be non-negative")
    return (math.sqrt(kappa) + 1.0) ** 2


def kurtosis_split(kappa1: float, kappa2: float) -> float:
    """Kurtosis usable for the joint (design, noise) variable:
    (sqrt(kappa1) + sqrt(kappa2))^2."""
    if kappa1 < 0.0 or kappa2 < 0.0:
        raise ValueError("kurtosis coefficients must be non-negative")
    return (math.sqrt(kappa1) + math.sqrt(kappa2)) ** 2


def gaussian_eta(d: int, alpha: float) -> float:
    """Exponential-moment offset valid for Gaussian designs:
    eta = -(d / alpha) [log(1 - alpha) + alpha], non-negative on (0, 1)."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return -(d / alpha) * (math.log(1.0 - alpha) + alpha)


def extended_design_moment(
    noise_moment_2k: float, noise_second: float, design_moment_2k: float, k: float
) -> float:
    """Minkowski combination bounding the k-th moment of the squared
    extended norm ||Gext^{-1/2} (X, -Y)||^2:

    (noise_2k^{1/k} / noise_2 + design_2k^{1/k})^k.
    """
    if noise_second <= 0.0:
        raise ValueError("noise second moment must be positive")
    return (
        noise_moment_2k ** (1.0 / k) / noise_second + design_moment_2k ** (1.0 / k)
    ) ** k


def exact_rate_constant(X: np.ndarray, Y: np.ndarray, theta_star: np.ndarray, G: np.ndarray) -> float:
    """Empirical first-order rate constant

    C = mean_i (Y_i - <theta*, X_i>)^2 ||G^{-1/2} X_i||^2,

    with the pseudo square root of G taken on its image.  Equals
    sigma^2 d for full-rank G and noise independent of the design.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    root = pinv_sqrt_psd(np.asarray(G, dtype=float))
    resid = Y - X @ theta_star
    whitened = X @ root
    return float(np.mean(resid**2 * np.einsum("ij,ij->i", whitened, whitened)))
