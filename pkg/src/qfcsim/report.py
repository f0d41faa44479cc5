"""Figure rendering for the CLI report path.

Every function writes one PNG next to the delimited output it illustrates.
Rendering is optional (CLI --plot) so the data files stay the deterministic
product of record.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_spectrum",
    "plot_modes",
    "plot_sweep",
    "plot_overlap",
    "plot_counts",
    "plot_trace",
]

_DPI = 130


def plot_spectrum(lambdas_sq: np.ndarray, path: str):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    n = np.arange(len(lambdas_sq))
    ax.bar(n, lambdas_sq, color="#2c6fbb", width=0.6)
    ax.set_xlabel("mode index n")
    ax.set_ylabel(r"conversion efficiency $\lambda_n^2$")
    ax.set_ylim(0, 1.0)
    ax.set_xticks(n)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_modes(t_ps: np.ndarray, dec, path: str, max_modes: int = 4):
    kept = min(max_modes, dec.truncation_count)
    fig, axes = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    for n in range(kept):
        lam_sq = dec.lambdas[n] ** 2
        axes[0].plot(t_ps, np.abs(dec.input_modes[n].samples), label=f"n={n} ($\\lambda^2$={lam_sq:.3f})")
        axes[1].plot(t_ps, np.abs(dec.output_modes[n].samples))
    axes[0].set_ylabel(r"$|\psi_n(t)|$ (input)")
    axes[1].set_ylabel(r"$|\phi_n(t)|$ (output)")
    axes[1].set_xlabel("t (ps)")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_sweep(param_name: str, values: np.ndarray, effs: np.ndarray, path: str):
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for n in range(effs.shape[1]):
        ax.plot(values, effs[:, n], marker="o", ms=3, label=f"$\\lambda_{n}^2$")
    ax.set_xlabel(param_name)
    ax.set_ylabel("conversion efficiency")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_overlap(t_ps: np.ndarray, psi_a: np.ndarray, psi_b: np.ndarray, overlap_sq: float, path: str):
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(t_ps, np.abs(psi_a), label="fundamental mode a")
    ax.plot(t_ps, np.abs(psi_b), label="fundamental mode b")
    ax.set_xlabel("t (ps)")
    ax.set_ylabel(r"$|\psi_0(t)|$")
    ax.set_title(f"$|\\langle\\psi_0^a,\\psi_0^b\\rangle|^2$ = {overlap_sq:.3g}", fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_counts(counts, path: str, exact: dict | None = None):
    """Histogram of per-stage counts; counts is a (shots, K) array."""
    counts = np.asarray(counts)
    k = counts.shape[1]
    fig, axes = plt.subplots(1, k, figsize=(3.0 * k, 3.2), squeeze=False)
    for s in range(k):
        ax = axes[0][s]
        col = counts[:, s]
        hi = int(col.max()) + 1
        ax.hist(col, bins=np.arange(hi + 2) - 0.5, density=True, color="#2c6fbb", alpha=0.8)
        if exact:
            marg = {}
            for tup, p in exact.items():
                marg[tup[s]] = marg.get(tup[s], 0.0) + p
            xs = sorted(marg)
            ax.plot(xs, [marg[x] for x in xs], "k_", ms=16, label="exact")
            ax.legend(fontsize=8)
        ax.set_xlabel(f"stage {s + 1} counts")
    axes[0][0].set_ylabel("frequency")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_trace(trace, path: str):
    values = np.array([v for _, v in trace])
    best = np.maximum.accumulate(values)
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    ax.plot(values, ".", ms=4, alpha=0.5, label="evaluation")
    ax.plot(best, "-", color="#c23b22", label="best so far")
    ax.set_xlabel("evaluation index")
    ax.set_ylabel("objective")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
