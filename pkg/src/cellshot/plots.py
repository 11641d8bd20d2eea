"""Figure rendering for the report paths (written next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLES = {
    "ls": dict(color="#555555", marker="o", ls="--"),
    "s": dict(color="#1f77b4", marker="s", ls="-"),
    "mm": dict(color="#2ca02c", marker="^", ls="-"),
    "shooting-bi": dict(color="#d62728", marker="D", ls="-"),
    "shooting-skh": dict(color="#ff7f0e", marker="v", ls="-"),
}


def _style(name):
    return _STYLES.get(name, dict(marker="o", ls="-"))


def save_table_figure(report, path):
    """n*MSE against the contamination fraction, one panel per scheme."""
    eps = [float(c.split("=", 1)[1]) for c in report.columns]
    n_panels = len(report.schemes)
    fig, axes = plt.subplots(1, n_panels, figsize=(4.2 * n_panels, 3.4),
                             squeeze=False, sharey=True)
    for ax, scheme in zip(axes[0], report.schemes):
        for est in report.estimators:
            vals = report.values[scheme][est]
            ax.plot(eps, vals, label=est, **_style(est))
        ax.set_title(scheme)
        ax.set_xlabel("contamination fraction")
        ax.set_yscale("log")
        ax.grid(True, which="both", alpha=0.3)
    axes[0][0].set_ylabel("n * MSE")
    axes[0][-1].legend(fontsize=8)
    fig.suptitle(report.table)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_and_figure(report, path):
    """Average norm distance per estimator as a bar chart."""
    scheme = report.schemes[0]
    names = list(report.estimators)
    vals = [report.values[scheme][n][0] for n in names]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    colors = [_style(n).get("color", "#777777") for n in names]
    ax.bar(range(len(names)), vals, color=colors)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("AND")
    ax.set_title(f"{scheme} data")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_weight_figure(weights, column_names, path, threshold=0.5):
    """Cell-weight heat map; dark cells fall below the flagging threshold."""
    W = np.asarray(weights, dtype=np.float64)
    fig, ax = plt.subplots(
        figsize=(max(4.0, 0.35 * W.shape[1] + 1.5),
                 max(3.0, 0.05 * W.shape[0] + 1.5)))
    im = ax.imshow(W, aspect="auto", cmap="cividis", vmin=0.0, vmax=1.0,
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, label="cell weight")
    ax.set_xticks(range(W.shape[1]))
    ax.set_xticklabels(column_names, rotation=90, fontsize=7)
    ax.set_ylabel("observation")
    ax.set_title(f"cells below {threshold:g} are flagged")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
