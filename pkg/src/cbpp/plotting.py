"""Figures for benchmark reports, written next to the CSV files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}
_COLORS = {"ca": "#1f77b4", "ml": "#ff7f0e"}


def plot_report(report, out_dir) -> list[Path]:
    """Write ``summary.png`` (solved-to-optimality and mean time per class)
    and, when both models ran, ``time_scatter.png``."""
    out = Path(out_dir)
    paths = [_plot_summary(report.summary(), out / "summary.png")]
    models = sorted({r.model for r in report.rows})
    if {"ca", "ml"} <= set(models):
        paths.append(_plot_scatter(report.rows, out / "time_scatter.png"))
    return paths


def _plot_summary(summary: list[dict], path: Path) -> Path:
    classes = sorted({s["class"] for s in summary})
    models = sorted({s["model"] for s in summary})
    lookup = {(s["class"], s["model"]): s for s in summary}
    x = np.arange(len(classes))
    width = 0.8 / max(len(models), 1)
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(max(6.0, 0.45 * len(classes) + 2), 5.5), sharex=True)
        for k, m in enumerate(models):
            opt = [lookup[(c, m)]["opt"] if (c, m) in lookup else 0 for c in classes]
            tms = [lookup[(c, m)]["mean_time_ms"] if (c, m) in lookup else np.nan for c in classes]
            off = x + (k - (len(models) - 1) / 2) * width
            ax1.bar(off, opt, width, label=m.upper(), color=_COLORS.get(m))
            ax2.bar(off, np.maximum(np.asarray(tms, dtype=float), 1.0), width, color=_COLORS.get(m))
        ax1.set_ylabel("solved to optimality")
        ax1.legend(frameon=False)
        ax2.set_ylabel("mean time [ms]")
        ax2.set_yscale("log")
        ax2.set_xticks(x)
        ax2.set_xticklabels(classes, rotation=60, ha="right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def _plot_scatter(rows, path: Path) -> Path:
    times: dict[str, dict[str, int]] = {}
    for r in rows:
        times.setdefault(r.instance, {})[r.model] = max(r.time_ms, 1)
    pairs = np.array([(t["ca"], t["ml"]) for t in times.values() if "ca" in t and "ml" in t], dtype=float)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 4.0))
        if len(pairs):
            ax.scatter(pairs[:, 0], pairs[:, 1], s=12, alpha=0.7, color="#444444")
            hi = pairs.max() * 1.5
            ax.plot([1, hi], [1, hi], lw=0.8, color="#999999")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("CA time [ms]")
        ax.set_ylabel("ML time [ms]")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
