"""Matplotlib renderings of comparison reports, saved next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ComparisonTable, CurveData


def render_comparison(table: ComparisonTable, path: str | Path) -> Path:
    """Grouped bar chart: measured accuracy vs the sources' prior accuracy."""
    reports = table.reports
    x = np.arange(len(reports))
    ours = [100.0 * r.test_accuracy for r in reports]
    priors = [r.prior_accuracy if r.prior_accuracy is not None else np.nan for r in reports]

    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(reports)), 4.0))
    ax.bar(x - 0.2, ours, width=0.4, label="this run", color="#2c7fb8")
    if not all(np.isnan(p) for p in priors):
        ax.bar(x + 0.2, priors, width=0.4, label="prior", color="#bdbdbd")
    ax.set_xticks(x)
    ax.set_xticklabels([r.set_id for r in reports], rotation=30, ha="right")
    ax.set_ylabel("test accuracy (%)")
    ax.set_ylim(0, 100)
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_curve(curve: CurveData, path: str | Path) -> Path:
    """Accuracy as a function of electrode count."""
    ns = [p[0] for p in curve.points]
    accs = [100.0 * p[2] for p in curve.points]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ns, accs, marker="o", color="#2c7fb8")
    for n, set_id, acc in curve.points:
        ax.annotate(set_id, (n, 100.0 * acc), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    ax.set_xlabel("number of electrodes")
    ax.set_ylabel("test accuracy (%)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_history(table: ComparisonTable, path: str | Path) -> Path:
    """Per-epoch training accuracy and loss, one line per set."""
    fig, (ax_acc, ax_loss) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for r in table.reports:
        epochs = np.arange(1, len(r.train_history.losses) + 1)
        ax_acc.plot(epochs, [100.0 * a for a in r.train_history.accuracies], label=r.set_id)
        ax_loss.plot(epochs, r.train_history.losses, label=r.set_id)
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("training accuracy (%)")
    ax_acc.grid(alpha=0.3)
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("training loss")
    ax_loss.grid(alpha=0.3)
    ax_loss.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
