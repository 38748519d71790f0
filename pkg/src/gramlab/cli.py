"""Command-line front end.

Subcommands: ``bounds`` (certificate JSON on stdout), ``estimate-gram``
and ``estimate-cov`` (CSV sample in, matrix JSON/CSV out), ``regress``
(CSV with the response in the last column, fit JSON out), ``simulate``
(records CSV, summary JSON, quantile table and figures into a
directory) and ``verify`` (named check suites, non-zero exit on
failure).

Exit codes: 0 success, 1 verification failure, 2 infeasible
configuration, 64 usage error, 65 malformed input data.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click
import numpy as np

from . import __version__
from .bounds import BoundsInput, core_bounds
from .covariance import empirical_covariance, robust_covariance
from .gram import empirical_gram, robust_gram_iterative, robust_gram_net
from .harness import ESTIMATORS, ExperimentSpec, quantile_table, run_experiment
from .io import (
    DataFormatError,
    read_sample_csv,
    write_json,
    write_matrix_csv,
    write_matrix_json,
    write_records_csv,
    write_table_csv,
)
from .regression import LabeledSample, ols, robust_ls
from .scenarios import make_scenario, scenario_from_config, scenario_names
from .verify import SUITES, run_suite

EXIT_INFEASIBLE = 2
EXIT_USAGE = 64
EXIT_DATA = 65


def _json_ready(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


@click.group()
@click.version_option(version=__version__, prog_name="gramlab")
def cli():
    """Robust Gram/covariance estimation, robust least squares, and the
    Monte Carlo harness verifying their non-asymptotic certificates."""


@cli.command("bounds")
@click.option("--kappa", type=float, required=True, help="directional kurtosis bound (> 1)")
@click.option("--d", "dim", type=int, required=True, help="ambient dimension")
@click.option("--n", type=int, required=True, help="sample size")
@click.option("--eps", type=float, required=True, help="confidence parameter in (0, 1/2)")
def cmd_bounds(kappa: float, dim: int, n: int, eps: float):
    """Print the certificate quantities as flat JSON; exit 2 when the
    configuration is infeasible (the report is still printed)."""
    try:
        report = core_bounds(BoundsInput(kappa=kappa, d=dim, n=n, eps=eps))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    payload = {"schema": 1}
    payload.update({k: _json_ready(v) for k, v in report.as_dict().items()})
    click.echo(json.dumps(payload))
    if not report.feasible:
        sys.exit(EXIT_INFEASIBLE)


def _load_sample(path: str) -> np.ndarray:
    try:
        return read_sample_csv(path)
    except DataFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)


def _write_matrix(out: str, matrix: np.ndarray, fmt: str, **extra) -> None:
    if fmt == "csv":
        write_matrix_csv(out, matrix)
    else:
        write_matrix_json(out, matrix, **extra)


@cli.command("estimate-gram")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--method", type=click.Choice(["empirical", "robust-iter", "robust-net"]), default="empirical")
@click.option("--eps", type=float, default=0.05, show_default=True)
@click.option("--iters", type=int, default=5, show_default=True, help="passes of the iterative method")
@click.option("--rho", type=float, default=None, help="net covering radius (robust-net)")
@click.option("--delta", type=float, default=None, help="ratio slack in (0, 1/2) (robust-net)")
@click.option("--kappa", type=float, default=None, help="kurtosis bound to derive delta (robust-net)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def cmd_estimate_gram(input_path, out_path, method, eps, iters, rho, delta, kappa, seed, fmt):
    """Estimate the Gram matrix of a CSV sample (header row required)."""
    X = _load_sample(input_path)
    try:
        if method == "empirical":
            est = empirical_gram(X)
        elif method == "robust-iter":
            est = robust_gram_iterative(X, eps=eps, iters=iters)
        else:
            if rho is None:
                raise click.UsageError("--method robust-net requires --rho")
            est = robust_gram_net(X, eps=eps, delta=delta, rho=rho, kappa=kappa, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    extra = {"method": est.method, "rank": est.rank}
    if est.constraint_violation is not None:
        extra["constraint_violation"] = est.constraint_violation
    _write_matrix(out_path, est.matrix, fmt, **extra)
    click.echo(f"wrote {est.method} Gram estimate ({est.d}x{est.d}, rank {est.rank}) to {out_path}")


@cli.command("estimate-cov")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--method", type=click.Choice(["empirical", "robust"]), default="empirical")
@click.option("--backend", type=click.Choice(["iterative", "net"]), default="iterative", show_default=True)
@click.option("--eps", type=float, default=0.05, show_default=True)
@click.option("--iters", type=int, default=5, show_default=True)
@click.option("--rho", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--kappa", type=float, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def cmd_estimate_cov(input_path, out_path, method, backend, eps, iters, rho, delta, kappa, seed, fmt):
    """Estimate the covariance matrix of a CSV sample."""
    X = _load_sample(input_path)
    try:
        if method == "empirical":
            est = empirical_covariance(X)
        else:
            est = robust_covariance(
                X, eps=eps, backend=backend, iters=iters, rho=rho, delta=delta, kappa=kappa, seed=seed
            )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _write_matrix(out_path, est.matrix, fmt, method=est.method)
    click.echo(f"wrote {est.method} covariance estimate ({est.d}x{est.d}) to {out_path}")


@cli.command("regress")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV whose last column is the response")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--method", type=click.Choice(["ols", "robust"]), default="ols")
@click.option("--backend", type=click.Choice(["iterative", "net"]), default="iterative", show_default=True)
@click.option("--eps", type=float, default=0.05, show_default=True)
@click.option("--iters", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_regress(input_path, out_path, method, backend, eps, iters, seed):
    """Fit linear coefficients by plain or robust least squares."""
    data = _load_sample(input_path)
    if data.shape[1] < 2:
        click.echo("error: need at least one design column plus the response", err=True)
        sys.exit(EXIT_DATA)
    sample = LabeledSample(X=data[:, :-1], Y=data[:, -1])
    try:
        if method == "ols":
            fit = ols(sample)
        else:
            fit = robust_ls(sample, eps=eps, backend=backend, iters=iters, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    payload = {
        "schema": 1,
        "theta": [float(v) for v in fit.theta],
        "method": fit.method,
        "rank_used": fit.rank_used,
    }
    write_json(out_path, payload)
    click.echo(f"wrote {fit.method} fit (d={sample.d}, rank {fit.rank_used}) to {out_path}")


@cli.command("simulate")
@click.option("--scenario", "scenario_name", type=str, default=None,
              help=f"one of {', '.join(scenario_names())}")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help='JSON {"name": ..., "params": {...}} overriding --scenario')
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--trials", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--eps", type=float, default=0.05, show_default=True)
@click.option("--estimators", type=str, default="ols,robust", show_default=True)
@click.option("--truncation", type=float, default=None, help="M for mean(min{excess, M})")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def cmd_simulate(scenario_name, config_path, n, trials, seed, eps, estimators, truncation, out_dir, figures):
    """Run a Monte Carlo experiment; writes records.csv, summary.json,
    quantiles.csv and (optionally) figures into the output directory."""
    if trials < 1:
        raise click.UsageError("--trials must be >= 1")
    if n < 1:
        raise click.UsageError("--n must be >= 1")
    if config_path is not None:
        with open(config_path) as fh:
            try:
                scenario = scenario_from_config(json.load(fh))
            except (KeyError, ValueError, TypeError) as exc:
                raise click.UsageError(f"bad scenario config: {exc}")
    elif scenario_name is not None:
        try:
            scenario = make_scenario(scenario_name)
        except KeyError as exc:
            raise click.UsageError(str(exc.args[0]))
    else:
        raise click.UsageError("provide --scenario or --config")
    wanted = tuple(s.strip() for s in estimators.split(",") if s.strip())
    bad = set(wanted) - set(ESTIMATORS)
    if bad:
        raise click.UsageError(f"unknown estimators {sorted(bad)}; choose from {ESTIMATORS}")
    spec = ExperimentSpec(
        scenario=scenario, trials=trials, n=n, estimators=wanted, eps=eps, seed=seed,
        truncation=truncation,
    )
    result = run_experiment(spec)
    os.makedirs(out_dir, exist_ok=True)
    write_records_csv(os.path.join(out_dir, "records.csv"), result.records, wanted)
    header, table = quantile_table(result)
    write_table_csv(os.path.join(out_dir, "quantiles.csv"), header, table)
    summary_payload = {
        "schema": 1,
        "scenario": scenario.name,
        "params": scenario.params,
        "n": n,
        "trials": trials,
        "seed": seed,
        "eps": eps,
        "runtime_seconds": result.runtime,
        "metadata": result.metadata,
        "summary": result.summary,
    }
    write_json(os.path.join(out_dir, "summary.json"), summary_payload)
    if figures:
        from . import report

        report.render_quantile_figure(result, os.path.join(out_dir, "quantiles.png"))
        report.render_sample_figure(
            scenario.generate(n, seed, 0), os.path.join(out_dir, "sample.png")
        )
    means = {
        name: entry.get("mean")
        for name, entry in result.summary["estimators"].items()
    }
    click.echo(f"wrote {trials} trials to {out_dir}; mean excess: " +
               ", ".join(f"{k}={v:.4g}" for k, v in means.items() if v is not None))


@cli.command("verify")
@click.option("--suite", type=click.Choice(sorted(SUITES)), required=True)
@click.option("--quick", is_flag=True, default=False,
              help="smaller trial counts for a fast smoke run")
def cmd_verify(suite, quick):
    """Run a verification suite; exits 1 if any check fails."""
    results = run_suite(suite, quick=quick)
    failed = False
    for res in results:
        click.echo(res.line())
        failed = failed or not res.passed
    sys.exit(1 if failed else 0)


def main(argv: list[str] | None = None) -> int:
    """Entry point mapping click usage errors to exit code 64."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else 0 if code is None else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
