"""Monte Carlo experiment engine.

Runs repeated generate -> estimate -> evaluate trials on per-trial
substreams, aggregates excess risks into means, truncated means and a
full percentile grid, measures coverage of the directional certificate,
and normalizes truncated mean excess risk by the first-order rate
constant.  Aggregation is ordered by trial index, so the optional
process-level parallelism (capped by GRAMLAB_THREADS) cannot change any
result.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._rng_lanes import LANE_GRID, LANE_PLUGIN, lane_rng
from .bounds import BoundsInput, core_bounds
from .direction import Projections, SolverConfig, solve_S
from .regression import LabeledSample, ols, robust_ls
from .scenarios import AnalyticRecord, Scenario, make_scenario

ESTIMATORS = ("ols", "robust")


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: Scenario
    trials: int
    n: int
    estimators: tuple[str, ...] = ESTIMATORS
    eps: float = 0.05
    seed: int = 1
    truncation: Optional[float] = None  # M in mean(min{excess, M})

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    excess: dict[str, Optional[float]]
    errors: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    records: list[TrialRecord]
    summary: dict
    runtime: float
    metadata: dict = field(default_factory=dict)


def _fit_theta(name: str, sample: LabeledSample, eps: float) -> np.ndarray:
    if name == "ols":
        return ols(sample).theta
    if name == "robust":
        return robust_ls(sample, eps=eps).theta
    raise ValueError(f"unknown estimator {name!r}")


def _run_trial(scenario_name: str, params: dict, n: int, seed: int, trial: int,
               estimators: tuple[str, ...], eps: float) -> dict:
    scenario = make_scenario(scenario_name, **params)
    sample = scenario.generate(n, seed, trial)
    thetas: dict[str, list[float] | None] = {}
    errors: dict[str, str] = {}
    for name in estimators:
        try:
            thetas[name] = [float(v) for v in _fit_theta(name, sample, eps)]
        except Exception as exc:  # failures recorded, never abort the experiment
            thetas[name] = None
            errors[name] = f"{type(exc).__name__}: {exc}"
    return {"trial": trial, "thetas": thetas, "errors": errors}


def _plugin_record(scenario: Scenario, seed: int, size: int = 1_000_000) -> AnalyticRecord:
    """One-time empirical stand-in for a missing analytic record."""
    sample = scenario.generate(size, seed, trial=0x706C7567)
    G = sample.X.T @ sample.X / size
    theta_star = ols(sample).theta
    resid = sample.Y - sample.X @ theta_star
    return AnalyticRecord(G=G, theta_star=theta_star, risk_star=float(np.mean(resid**2)))


def max_workers() -> int:
    raw = os.environ.get("GRAMLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Deterministic multi-trial excess-risk experiment."""
    start = time.perf_counter()
    scenario = spec.scenario
    metadata = {"excess_evaluation": "analytic"}
    record = scenario.analytic
    if record is None:
        record = _plugin_record(scenario, spec.seed)
        metadata["excess_evaluation"] = "plugin_1e6"

    args = [
        (scenario.name, scenario.params, spec.n, spec.seed, t, spec.estimators, spec.eps)
        for t in range(spec.trials)
    ]
    workers = max_workers()
    if workers > 1 and spec.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run_trial, *zip(*args), chunksize=max(1, spec.trials // (4 * workers))))
    else:
        raw = [_run_trial(*a) for a in args]
    raw.sort(key=lambda r: r["trial"])

    records = []
    for r in raw:
        excess = {}
        for name in spec.estimators:
            theta = r["thetas"][name]
            excess[name] = None if theta is None else record.excess_risk(np.asarray(theta))
        records.append(TrialRecord(trial=r["trial"], excess=excess, errors=r["errors"]))

    summary = summarize(records, spec.estimators, spec.truncation)
    return ExperimentResult(
        spec=spec,
        records=records,
        summary=summary,
        runtime=time.perf_counter() - start,
        metadata=metadata,
    )


def _type1_quantiles(values: np.ndarray, percentiles: Sequence[int]) -> list[float]:
    """Lower (inverted-cdf) quantiles matching a step-function plot."""
    v = np.sort(values)
    n = v.size
    out = []
    for p in percentiles:
        idx = 0 if p == 0 else math.ceil(p / 100.0 * n) - 1
        out.append(float(v[min(idx, n - 1)]))
    return out


def summarize(records: list[TrialRecord], estimators: Sequence[str],
              truncation: Optional[float]) -> dict:
    summary: dict = {"trials": len(records), "estimators": {}}
    percentiles = list(range(101))
    for name in estimators:
        vals = np.array([r.excess[name] for r in records if r.excess[name] is not None])
        entry: dict = {"count": int(vals.size), "missing": len(records) - int(vals.size)}
        if vals.size:
            entry["mean"] = float(vals.mean())
            entry["median"] = _type1_quantiles(vals, [50])[0]
            if truncation is not None:
                entry["truncated_mean"] = float(np.minimum(vals, truncation).mean())
            entry["quantiles"] = _type1_quantiles(vals, percentiles)
        summary["estimators"][name] = entry
    return summary


def quantile_table(result: ExperimentResult) -> tuple[list[str], np.ndarray]:
    """101-row (percentile, value per estimator) table from the records."""
    if not result.records:
        raise ValueError("no records to tabulate")
    names = [n for n in result.spec.estimators]
    cols = [np.arange(101, dtype=float)]
    header = ["percentile"] + names
    for name in names:
        vals = np.array([r.excess[name] for r in result.records if r.excess[name] is not None])
        if vals.size == 0:
            cols.append(np.full(101, np.nan))
        else:
            cols.append(np.array(_type1_quantiles(vals, list(range(101)))))
    return header, np.column_stack(cols)


@dataclass(frozen=True)
class CoverageReport:
    violation_rate: float
    worst_ratio: float
    threshold: float
    trials: int


def coverage_experiment(
    spec: ExperimentSpec,
    direction_grid: int = 500,
    nhat_fn: Callable[[np.ndarray, np.ndarray], float] | None = None,
    solver_cfg: SolverConfig = SolverConfig(rel_tol=1e-8),
) -> CoverageReport:
    """Empirical frequency of certificate violations.

    Per trial, draws a fresh sample and a grid of random unit
    directions, computes the directional estimate at the certificate's
    prescribed scale, and flags the trial when the worst ratio deviation
    sup |N(theta)/N^(theta) - 1| exceeds mu/(1 - 2 mu).  nhat_fn
    substitutes an oracle for the estimator (testing hook).
    """
    scenario = spec.scenario
    record = scenario.analytic
    if record is None or record.kappa1 is None:
        raise ValueError("coverage needs a scenario with analytic G and kappa1")
    d = record.G.shape[0]
    rep = core_bounds(BoundsInput(kappa=record.kappa1, d=d, n=spec.n, eps=spec.eps))
    if not rep.feasible:
        raise ValueError(
            f"infeasible configuration: n = {spec.n} <= n_min = {rep.n_min:.1f} or mu = {rep.mu:.3f} >= 1/2; "
            "the certificate does not apply"
        )
    threshold = rep.delta_hat
    G = record.G

    violations = 0
    worst = 0.0
    for trial in range(spec.trials):
        sample = scenario.generate(spec.n, spec.seed, trial)
        X = sample.X
        rng = lane_rng(spec.seed, trial, LANE_GRID)
        dirs = rng.standard_normal((direction_grid, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        P = X @ dirs.T
        sup_dev = 0.0
        for j in range(direction_grid):
            theta = dirs[j]
            true_energy = float(theta @ G @ theta)
            if nhat_fn is not None:
                nhat = float(nhat_fn(X, theta))
            else:
                nhat = solve_S(Projections(P[:, j]), rep.lam, solver_cfg).value
            if nhat == 0.0:
                dev = 0.0 if true_energy == 0.0 else math.inf
            else:
                dev = abs(true_energy / nhat - 1.0)
            if dev > sup_dev:
                sup_dev = dev
        if sup_dev > threshold + 1e-12:
            violations += 1
        if sup_dev > worst:
            worst = sup_dev
    return CoverageReport(
        violation_rate=violations / spec.trials,
        worst_ratio=worst,
        threshold=threshold,
        trials=spec.trials,
    )


@dataclass(frozen=True)
class RateReport:
    normalized_rate: float  # n * mean(min{excess, M})
    C_analytic: float
    ratio: float  # normalized_rate / C


def rate_experiment(spec: ExperimentSpec) -> RateReport:
    """Truncated mean excess risk of the empirical risk minimizer,
    normalized by the scenario's first-order constant C."""
    record = spec.scenario.analytic
    if record is None or record.C is None or record.C <= 0.0:
        raise ValueError("rate experiment needs a scenario with a positive analytic C")
    M = spec.truncation if spec.truncation is not None else 1e3
    base = ExperimentSpec(
        scenario=spec.scenario,
        trials=spec.trials,
        n=spec.n,
        estimators=("ols",),
        eps=spec.eps,
        seed=spec.seed,
        truncation=M,
    )
    result = run_experiment(base)
    tmean = result.summary["estimators"]["ols"]["truncated_mean"]
    normalized = spec.n * tmean
    return RateReport(normalized_rate=normalized, C_analytic=record.C, ratio=normalized / record.C)
