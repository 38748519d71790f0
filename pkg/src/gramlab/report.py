"""Figure rendering for experiment outputs.

Renders the excess-risk quantile curves and a scatter of one trial's
sample next to the delimited files the CLI writes.  Kept separate from
the harness so headless runs never import matplotlib.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .harness import ExperimentResult, quantile_table  # noqa: E402
from .regression import LabeledSample  # noqa: E402


def render_quantile_figure(result: ExperimentResult, path: str) -> None:
    """Step plot of the excess-risk quantile function per estimator."""
    header, table = quantile_table(result)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k, name in enumerate(header[1:], start=1):
        ax.step(table[:, 0], table[:, k], where="post", label=name)
    ax.set_xlabel("percentile")
    ax.set_ylabel("excess risk")
    ax.set_title(f"excess risk quantiles: {result.spec.scenario.name}, n={result.spec.n}")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_sample_figure(sample: LabeledSample, path: str) -> None:
    """Scatter of the first design coordinate against the response."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(sample.X[:, 0], sample.Y, s=12, alpha=0.7)
    ax.set_xlabel("first design coordinate")
    ax.set_ylabel("response")
    ax.set_title(f"one sample, n={sample.n}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
