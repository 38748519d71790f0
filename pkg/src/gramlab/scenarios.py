"""Seeded data generators with their analytic population quantities.

Each generator draws one trial's sample from a deterministic per-trial
substream and each scenario carries, where closed forms exist, the
population Gram matrix, the optimal coefficients, the kurtosis
coefficients of design and noise, the best risk and the first-order
rate constant C.  The analytic record also produces the extended
second-moment matrix of (X, -Y), so excess risks can be evaluated
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._rng import rng_for
from .regression import LabeledSample


@dataclass(frozen=True)
class AnalyticRecord:
    """Closed-form population quantities of a scenario."""

    G: np.ndarray
    theta_star: np.ndarray
    risk_star: float
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    C: Optional[float] = None

    def extended_gram(self) -> np.ndarray:
        """Second-moment matrix of (X, -Y) when E[noise X] = 0:
        [[G, -G theta*], [-theta*^T G, theta*^T G theta* + R*]]."""
        d = self.G.shape[0]
        ext = np.zeros((d + 1, d + 1))
        ext[:d, :d] = self.G
        b = -self.G @ self.theta_star
        ext[:d, d] = b
        ext[d, :d] = b
        ext[d, d] = self.theta_star @ self.G @ self.theta_star + self.risk_star
        return ext

    def excess_risk(self, theta: np.ndarray) -> float:
        """R(theta) - R(theta*) = (theta - theta*)^T G (theta - theta*)."""
        diff = np.asarray(theta, dtype=float) - self.theta_star
        return float(diff @ self.G @ diff)


@dataclass(frozen=True)
class Scenario:
    """Named generator plus parameters and optional analytic record."""

    name: str
    params: dict = field(default_factory=dict)
    analytic: Optional[AnalyticRecord] = None
    _gen: Callable[[int, int, int], LabeledSample] = None  # (n, seed, trial)

    def generate(self, n: int, seed: int, trial: int = 0) -> LabeledSample:
        return self._gen(n, seed, trial)


def mixture_noise() -> Scenario:
    """Affine response with two-component Gaussian mixture noise.

    X = (W, 1) with W ~ N(0, 10^2); noise 0.9 N(0,1) + 0.1 N(0, 30^2);
    Y = W + noise + 1, so theta* = (1, 1).
    """
    sigma_x, sig1, sig2, w2 = 10.0, 1.0, 30.0, 0.1
    noise_var = (1.0 - w2) * sig1**2 + w2 * sig2**2  # 90.9
    record = AnalyticRecord(
        G=np.diag([sigma_x**2, 1.0]),
        theta_star=np.array([1.0, 1.0]),
        risk_star=noise_var,
        kappa1=3.0,
        kappa2=((1.0 - w2) * 3.0 * sig1**4 + w2 * 3.0 * sig2**4) / noise_var**2,
        C=noise_var * 2.0,  # independent noise, d = 2
    )

    def gen(n: int, seed: int, trial: int) -> LabeledSample:
        rng = rng_for(seed, trial)
        w = sigma_x * rng.standard_normal(n)
        wide = rng.random(n) < w2
        noise = np.where(wide, sig2, sig1) * rng.standard_normal(n)
        X = np.column_stack([w, np.ones(n)])
        return LabeledSample(X=X, Y=w + noise + 1.0)

    return Scenario("mixture_noise", {}, record, gen)


def gaussian_iid(d: int = 3, sigma: float = 1.0, theta_star: np.ndarray | None = None) -> Scenario:
    """Standard Gaussian design with independent Gaussian noise."""
    ts = np.ones(d) if theta_star is None else np.asarray(theta_star, dtype=float)
    record = AnalyticRecord(
        G=np.eye(d),
        theta_star=ts,
        risk_star=sigma**2,
        kappa1=3.0,
        kappa2=3.0 if sigma > 0.0 else 0.0,
        C=sigma**2 * d,
    )

    def gen(n: int, seed: int, trial: int) -> LabeledSample:
        rng = rng_for(seed, trial)
        X = rng.standard_normal((n, d))
        Y = X @ ts + sigma * rng.standard_normal(n)
        return LabeledSample(X=X, Y=Y)

    return Scenario("gaussian_iid", {"d": d, "sigma": sigma}, record, gen)


def censored_gaussian(p: float = 0.5, d: int = 5, sigma: float = 1.0) -> Scenario:
    """Design and response both multiplied by one Bernoulli(p) mask.

    Censoring divides both kurtosis coefficients by p while leaving the
    rate constant C = sigma^2 d unchanged.
    """
    if not (0.0 < p <= 1.0):
        raise ValueError("p must lie in (0, 1]")
    ts = np.ones(d)
    record = AnalyticRecord(
        G=p * np.eye(d),
        theta_star=ts,
        risk_star=p * sigma**2,
        kappa1=3.0 / p,
        kappa2=3.0 / p,
        C=sigma**2 * d,
    )

    def gen(n: int, seed: int, trial: int) -> LabeledSample:
        rng = rng_for(seed, trial)
        Xt = rng.standard_normal((n, d))
        Yt = Xt @ ts + sigma * rng.standard_normal(n)
        keep = (rng.random(n) < p).astype(float)
        return LabeledSample(X=Xt * keep[:, None], Y=Yt * keep)

    return Scenario("censored_gaussian", {"p": p, "d": d, "sigma": sigma}, record, gen)


def _rho_draw(rng: np.random.Generator, n: int, spec: dict) -> np.ndarray:
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return np.ones(n)
    if kind == "two_point":
        u, v = spec["sq_values"]
        q = spec["prob"]
        mean_sq = q * u + (1.0 - q) * v
        if abs(mean_sq - 1.0) > 1e-9:
            raise ValueError("two-point rho must have unit second moment")
        sq = np.where(rng.random(n) < q, u, v)
        return np.sqrt(sq)
    raise ValueError(f"unknown rho distribution {kind!r}")


def rho_fourth_moment(spec: dict) -> float:
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return 1.0
    u, v = spec["sq_values"]
    q = spec["prob"]
    return q * u**2 + (1.0 - q) * v**2


def two_point_rho(m4: float) -> dict:
    """Two-point radial factor with unit second moment and fourth moment
    m4 >= 1: rho^2 = m4 with probability 1/m4, else 0."""
    if m4 < 1.0:
        raise ValueError("fourth moment must be >= 1 by Jensen")
    if m4 == 1.0:
        return {"kind": "constant"}
    return {"kind": "two_point", "sq_values": (m4, 0.0), "prob": 1.0 / m4}


def scaled_gaussian_rademacher(
    d: int = 4, rho_dist: dict | None = None, theta_star: np.ndarray | None = None
) -> Scenario:
    """Radially scaled Gaussian design with sign noise proportional to
    the whitened norm.

    X = rho W for W ~ N(0, I) and E rho^2 = 1; Y = <theta*, X> +
    eta ||G^{-1/2} X|| with eta a Rademacher sign.  Then kappa1 = 3 E
    rho^4, kappa2 = (1 + 2/d) E rho^4 and C = (1 + 2/d)/(4 + 2/d)
    (kappa1 + kappa2) R* d, which outruns d R* / n for heavy rho^4.
    """
    spec = {"kind": "constant"} if rho_dist is None else rho_dist
    m4 = rho_fourth_moment(spec)
    ts = np.ones(d) if theta_star is None else np.asarray(theta_star, dtype=float)
    kappa1 = 3.0 * m4
    kappa2 = (1.0 + 2.0 / d) * m4
    risk_star = float(d)  # E ||G^{-1/2} X||^2 = d
    record = AnalyticRecord(
        G=np.eye(d),
        theta_star=ts,
        risk_star=risk_star,
        kappa1=kappa1,
        kappa2=kappa2,
        C=(1.0 + 2.0 / d) / (4.0 + 2.0 / d) * (kappa1 + kappa2) * risk_star * d,
    )

    def gen(n: int, seed: int, trial: int) -> LabeledSample:
        rng = rng_for(seed, trial)
        W = rng.standard_normal((n, d))
        rho = _rho_draw(rng, n, spec)
        X = rho[:, None] * W
        eta = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        Y = X @ ts + eta * np.linalg.norm(X, axis=1)  # G = I, so the whitened norm is ||X||
        return LabeledSample(X=X, Y=Y)

    return Scenario("scaled_gaussian_rademacher", {"d": d, "rho": spec}, record, gen)


def two_radius_sphere(d: int = 4, a: float = 10.0, b: float = 1.0, theta_star: np.ndarray | None = None) -> Scenario:
    """Uniform sphere direction with a two-valued radius and noise
    inversely proportional to it.

    X = rho U, rho in {a, b} equiprobable, Y = <theta*, X> + eta / rho.
    Here G = (a^2+b^2)/(2d) I, C = 2d/(a^2+b^2), R* = (a^-2 + b^-2)/2,
    so C/(d R*) = 4 / (2 + a^2/b^2 + b^2/a^2) can sit far below 1.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("radii must be positive")
    ts = np.ones(d) if theta_star is None else np.asarray(theta_star, dtype=float)
    mean_sq = (a**2 + b**2) / 2.0
    mean_quad = (a**4 + b**4) / 2.0
    inv_sq = (a**-2 + b**-2) / 2.0
    inv_quad = (a**-4 + b**-4) / 2.0
    record = AnalyticRecord(
        G=(mean_sq / d) * np.eye(d),
        theta_star=ts,
        risk_star=inv_sq,
        kappa1=3.0 * d * mean_quad / ((d + 2.0) * mean_sq**2),
        kappa2=inv_quad / inv_sq**2,
        C=2.0 * d / (a**2 + b**2),
    )

    def gen(n: int, seed: int, trial: int) -> LabeledSample:
        rng = rng_for(seed, trial)
        g = rng.standard_normal((n, d))
        U = g / np.linalg.norm(g, axis=1, keepdims=True)
        rho = np.where(rng.random(n) < 0.5, a, b)
        eta = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        X = rho[:, None] * U
        return LabeledSample(X=X, Y=X @ ts + eta / rho)

    return Scenario("two_radius_sphere", {"d": d, "a": a, "b": b}, record, gen)


def histogram_sample(n: int, d: int, seed: int, trial: int = 0) -> np.ndarray:
    """Design-only draw of the uniform histogram basis: each row is the
    one-hot indicator of the bin containing a uniform variate."""
    rng = rng_for(seed, trial)
    idx = np.minimum((rng.random(n) * d).astype(int), d - 1)
    X = np.zeros((n, d))
    X[np.arange(n), idx] = 1.0
    return X


def histogram_design(d: int = 8) -> Scenario:
    """One-hot rows from a uniform draw over d equal bins; a design whose
    directional kurtosis grows like d (kappa1 = d)."""
    record = AnalyticRecord(
        G=np.eye(d) / d,
        theta_star=np.zeros(d),
        risk_star=0.0,
        kappa1=float(d),
        kappa2=0.0,
        C=0.0,
    )

    def gen(n: int, seed: int, trial: int) -> LabeledSample:
        X = histogram_sample(n, d, seed, trial)
        return LabeledSample(X=X, Y=np.zeros(n))

    return Scenario("histogram_design", {"d": d}, record, gen)


_FACTORIES: dict[str, Callable[..., Scenario]] = {
    "mixture_noise": mixture_noise,
    "gaussian_iid": gaussian_iid,
    "censored_gaussian": censored_gaussian,
    "scaled_gaussian_rademacher": scaled_gaussian_rademacher,
    "two_radius_sphere": two_radius_sphere,
    "histogram_design": histogram_design,
}


def scenario_names() -> list[str]:
    return sorted(_FACTORIES)


def make_scenario(name: str, **params) -> Scenario:
    """Scenario by name; accepts hyphens or underscores."""
    key = name.replace("-", "_")
    if key not in _FACTORIES:
        raise KeyError(f"unknown scenario {name!r}; choose from {scenario_names()}")
    return _FACTORIES[key](**params)


def scenario_from_config(config: dict) -> Scenario:
    """Build from {"name": ..., "params": {...}}."""
    if "name" not in config:
        raise ValueError('scenario config needs a "name" entry')
    return make_scenario(config["name"], **config.get("params", {}))
