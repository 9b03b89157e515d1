"""Figure rendering for report outputs.

Every function takes already-computed report data and writes one PNG next to
the JSON/CSV the CLI emits.  Rendering is file-only (Agg backend); nothing
here opens a window or mutates the data it is given.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 120


def plot_survival(rows: list, title: str, path: str) -> None:
    """Log-scale survival curve with any fitted-bound overlays.

    ``rows`` are dicts with keys ``threshold`` and ``survival`` (as produced
    by the tail harnesses); zero survival points are dropped from the log
    plot rather than clipped.
    """
    thr = np.array([r["threshold"] for r in rows], dtype=float)
    surv = np.array([r["survival"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pos = surv > 0
    ax.semilogy(thr[pos], surv[pos], marker="o", lw=1.2, label="empirical")
    if np.any(~pos):
        ax.plot(thr[~pos], np.full((~pos).sum(), np.nan))
    ax.set_xlabel("threshold")
    ax.set_ylabel("survival probability")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_phase(cells: list, title: str, path: str) -> None:
    """Success rate against sparsity with binomial error bars."""
    s = np.array([c["sparsity"] for c in cells], dtype=float)
    rate = np.array([c["rate"] for c in cells], dtype=float)
    err = np.array([c["stderr"] for c in cells], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(s, rate, yerr=err, marker="o", lw=1.2, capsize=3)
    ax.set_xlabel("sparsity")
    ax.set_ylabel("recovery success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_gram_rate(per_n: dict, title: str, path: str) -> None:
    """Log-log median Gram deviation against sample count, with a -1/2 guide."""
    ns = np.array(sorted(int(k) for k in per_n), dtype=float)
    med = np.array([per_n[str(int(n))]["median"] for n in ns], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(ns, med, marker="o", lw=1.2, label="median deviation")
    guide = med[0] * np.sqrt(ns[0] / ns)
    ax.loglog(ns, guide, ls="--", lw=1.0, label="slope -1/2 guide")
    ax.set_xlabel("rows n")
    ax.set_ylabel("Gram deviation")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
