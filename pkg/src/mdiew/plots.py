"""Figure rendering for the CLI report paths.

Every command that writes delimited output also renders a PNG next to it.
Uses the Agg backend so rendering works headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=140, bbox_inches="tight")
    plt.close(fig)


def scheme_comparison_figure(comparison, path) -> None:
    """Mean significance versus shot count, one curve per scheme."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 3.8))
    g = np.array(comparison.g_grid, dtype=float)
    styles = {"all": "o-", "single": "s--"}
    for scheme in ("all", "single"):
        agg = comparison.aggregates[scheme]
        ax1.plot(g, agg["mean_log_p"], styles[scheme], label=f"{scheme}-outcome")
        ax2.errorbar(g, agg["mean_value"], yerr=agg["empirical_sigma"], fmt=styles[scheme],
                     capsize=3, label=f"{scheme}-outcome")
    for scheme, exact in comparison.exact.items():
        ax2.axhline(exact, color="gray", lw=0.8, ls=":")
    ax1.set_xscale("log")
    ax1.set_xlabel("shots")
    ax1.set_ylabel("mean log p-value")
    ax1.legend()
    ax1.set_title("detection significance")
    ax2.set_xscale("log")
    ax2.set_xlabel("shots")
    ax2.set_ylabel("witness value estimate")
    ax2.legend()
    ax2.set_title(f"{comparison.witness_label} on {comparison.state_label}")
    _save(fig, path)


def estimate_histogram(values, exact, title, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.8))
    ax.hist(values, bins=30, color="#4878cf", alpha=0.85)
    ax.axvline(exact, color="crimson", lw=1.5, label=f"exact = {exact:.6g}")
    ax.axvline(0.0, color="black", lw=0.8, ls=":")
    ax.set_xlabel("witness value estimate")
    ax.set_ylabel("trials")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def depth_scan_figure(rows, thresholds, path) -> None:
    """Witness value versus noise parameter, one curve per alpha."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    alphas = sorted({row["alpha"] for row in rows})
    for alpha in alphas:
        pts = sorted((r["p"], r["value"]) for r in rows if r["alpha"] == alpha)
        ax.plot([p for p, _ in pts], [v for _, v in pts], "o-", ms=3, label=f"alpha = {alpha:.4g}")
    for label, p_star in thresholds.items():
        ax.axvline(p_star, color="gray", lw=0.8, ls="--")
        ax.annotate(label, (p_star, ax.get_ylim()[1]), fontsize=7, rotation=90,
                    va="top", ha="right")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("target-state weight p")
    ax.set_ylabel("witness value")
    ax.set_title("depth detection scan")
    ax.legend()
    _save(fig, path)


def harness_figure(reports, path) -> None:
    """Histogram of sampled witness values for each nonnegativity battery."""
    fig, axes = plt.subplots(1, len(reports), figsize=(3.4 * len(reports), 3.2), squeeze=False)
    for ax, rep in zip(axes[0], reports):
        ax.hist(rep.values, bins=25, color="#55a868")
        ax.axvline(0.0, color="black", lw=0.8)
        ax.set_title(f"{rep.witness_label}\n{rep.class_label}", fontsize=8)
        ax.set_xlabel("witness value")
    axes[0][0].set_ylabel("trials")
    fig.suptitle("sampled nonnegativity under untrusted devices", fontsize=10)
    _save(fig, path)


def check_deltas_figure(rows, path) -> None:
    """Reproduction-check deviations on a log scale."""
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    names = [r["name"] for r in rows]
    deltas = [max(r["max_delta"], 1e-18) for r in rows]
    colors = ["#55a868" if r["passed"] else "#c44e52" for r in rows]
    ax.barh(range(len(rows)), deltas, color=colors)
    ax.set_yticks(range(len(rows)), names, fontsize=7)
    ax.set_xscale("log")
    ax.axvline(1e-9, color="gray", ls="--", lw=0.8, label="tolerance")
    ax.set_xlabel("max |computed - expected|")
    ax.set_title("reference-value reproduction")
    ax.legend()
    _save(fig, path)
