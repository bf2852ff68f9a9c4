"""Figures written next to simulation tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_rates(table, path, alpha=None):
    """Grouped bar chart of rejection rates with +-2 standard-error bars.

    One group of bars per scenario, one bar per method.  A dashed line
    marks the nominal level.
    """
    methods = table.methods
    rows = [r for r in table.rows if not r.error]
    n = len(rows)
    width = 0.8 / max(len(methods), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * n + 2), 4.0))
    x = np.arange(n)
    for j, m in enumerate(methods):
        rates = np.array([r.rates[m].rate if m in r.rates else np.nan for r in rows])
        err = np.array([2 * r.rates[m].se if m in r.rates else 0.0 for r in rows])
        ax.bar(x + (j - (len(methods) - 1) / 2) * width, rates, width, yerr=err,
               capsize=2, label=m)
    if alpha is None and rows:
        alpha = rows[0].scenario.alpha_level
    if alpha is not None:
        ax.axhline(alpha, color="k", lw=0.8, ls="--")
    ax.set_xticks(x)
    ax.set_xticklabels([r.scenario.label() for r in rows], rotation=30, ha="right", fontsize=7)
    ax.set_ylim(0, 1.02)
    ax.set_ylabel("rejection rate")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
