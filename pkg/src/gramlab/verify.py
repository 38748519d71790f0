"""Built-in verification suites.

Each suite re-runs one of the package's headline empirical claims at its
published parameters and tolerance and reports pass/fail per check.
The same functions back both the ``gramlab verify`` subcommand and the
acceptance test module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import rng_for
from .direction import Projections, SolverConfig, bisection_oracle, solve_S
from .harness import ExperimentSpec, coverage_experiment, rate_experiment, run_experiment
from .scenarios import gaussian_iid, mixture_noise, two_radius_sphere


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def solver_suite(instances: int = 1000, seed: int = 20240, quick: bool = False) -> list[CheckResult]:
    """Hybrid solver vs a 200-step pure-bisection reference on random
    instances: values agree to 1e-8 relative and the hybrid uses strictly
    fewer iterations at least 90% of the time."""
    if quick:
        instances = 100
    rng = rng_for(seed)
    worst_rel = 0.0
    fewer = 0
    for _ in range(instances):
        n = int(rng.integers(5, 201))
        lam = float(10.0 ** rng.uniform(-3.0, 0.0))
        p = Projections(rng.standard_normal(n))
        hybrid = solve_S(p, lam)
        reference = bisection_oracle(p, lam, steps=200)
        rel = abs(hybrid.value - reference.value) / abs(reference.value)
        worst_rel = max(worst_rel, rel)
        if hybrid.iterations < reference.iterations:
            fewer += 1
    share = fewer / instances
    return [
        CheckResult(
            "solver agreement",
            worst_rel <= 1e-8,
            f"worst relative difference {worst_rel:.2e} (allowed 1e-08) over {instances} instances",
        ),
        CheckResult(
            "solver iteration advantage",
            share >= 0.9,
            f"hybrid used fewer iterations in {share:.1%} of instances (needed >= 90%)",
        ),
    ]


def coverage_suite(trials: int = 1000, quick: bool = False) -> list[CheckResult]:
    """Certificate coverage at kappa=3, d=2, eps=0.01, n=5000 with a
    500-direction grid: violation rate must not exceed 2 eps."""
    if quick:
        trials = 50
    eps = 0.01
    spec = ExperimentSpec(
        scenario=gaussian_iid(d=2, sigma=1.0), trials=trials, n=5000, eps=eps, seed=1
    )
    report = coverage_experiment(spec, direction_grid=500)
    return [
        CheckResult(
            "coverage",
            report.violation_rate <= 2.0 * eps,
            f"violation rate {report.violation_rate:.4f} (allowed {2 * eps}), "
            f"worst ratio deviation {report.worst_ratio:.4f} vs threshold {report.threshold:.4f}, "
            f"{trials} trials",
        )
    ]


def rate_gaussian_check(quick: bool = False) -> CheckResult:
    """Gaussian design with independent noise: n * mean(min{excess, M})
    over sigma^2 d must land in [0.85, 1.15]."""
    trials = 200 if quick else 2000
    g = rate_experiment(
        ExperimentSpec(
            scenario=gaussian_iid(d=3, sigma=1.0),
            trials=trials,
            n=1000,
            seed=7,
            truncation=1e3,
        )
    )
    return CheckResult(
        "exact rate, independent noise",
        0.85 <= g.ratio <= 1.15,
        f"n*mean(min(excess,M))/(sigma^2 d) = {g.ratio:.4f} in [0.85, 1.15], {trials} trials",
    )


def rate_sphere_check(quick: bool = False) -> CheckResult:
    """Two-radius sphere with radius ratio 10: the normalized rate must
    land in [0.8, 1.2] although C sits far below d R*."""
    trials = 200 if quick else 2000
    sphere = two_radius_sphere(d=4, a=10.0, b=1.0)
    t = rate_experiment(
        ExperimentSpec(scenario=sphere, trials=trials, n=2000, seed=7, truncation=1e3)
    )
    rec = sphere.analytic
    mismatch = rec.C / (4 * rec.risk_star)
    return CheckResult(
        "rate mismatch, two-radius sphere",
        0.8 <= t.ratio <= 1.2,
        f"n*mean(min(excess,M))/C = {t.ratio:.4f} in [0.8, 1.2] with C = {t.C_analytic:.4f}, "
        f"C/(d R*) = {mismatch:.4f}",
    )


def rate_suite(quick: bool = False) -> list[CheckResult]:
    """Truncated-mean convergence rate against the analytic constant C."""
    return [rate_gaussian_check(quick), rate_sphere_check(quick)]


def simulation_suite(quick: bool = False) -> list[CheckResult]:
    """Headline heavy-noise replication over seeds 1..5: the plain least
    squares mean excess must land in [1.2, 2.4], and the robust fit must
    improve on it (mean <= 1.4, >= 20% better on at least 4 seeds)."""
    seeds = (1,) if quick else (1, 2, 3, 4, 5)
    trials = 100 if quick else 500
    results = []
    for seed in seeds:
        spec = ExperimentSpec(scenario=mixture_noise(), trials=trials, n=100, seed=seed)
        summary = run_experiment(spec).summary["estimators"]
        results.append((seed, summary["ols"]["mean"], summary["robust"]["mean"]))
    ols_ok = all(1.2 <= o <= 2.4 for _, o, _ in results)
    robust_ok = all(r < o and r <= 1.4 for _, o, r in results)
    improved = sum(1 for _, o, r in results if (o - r) / o >= 0.2)
    need = math.ceil(0.8 * len(seeds))
    detail = "; ".join(f"seed {s}: ols {o:.3f}, robust {r:.3f}" for s, o, r in results)
    return [
        CheckResult("simulation replication, plain LS band", ols_ok, detail),
        CheckResult(
            "simulation replication, robust improvement",
            robust_ok and improved >= need,
            f">=20% improvement on {improved}/{len(seeds)} seeds (needed {need}); " + detail,
        ),
    ]


SUITES = {
    "solver": solver_suite,
    "coverage": coverage_suite,
    "rate": rate_suite,
}


def run_suite(name: str, quick: bool = False) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](quick=quick)
