"""Report figures written next to the CSV/JSON outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def recall_curves(curves: dict, path, title: str = "Recall at K"):
    """``curves`` maps a legend label to recall values for K = 0..k_max."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        for label, values in curves.items():
            values = np.asarray(values)
            ax.plot(np.arange(values.size), values, marker="o", ms=2.5, label=label)
        ax.set_xlabel("K (ranked proposals inspected)")
        ax.set_ylabel("recall")
        ax.set_ylim(0.0, 1.02)
        ax.set_title(title)
        ax.legend(frameon=False)
        return _save(fig, path)


def completion_bars(psnr_by_completer: dict, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(3.6, 2.8))
        names = list(psnr_by_completer)
        ax.bar(names, [psnr_by_completer[n] for n in names], color="0.55")
        ax.set_ylabel("masked-region PSNR (dB)")
        ax.set_title("Part completion")
        return _save(fig, path)


def reassembly_scatter(compositional, unstructured, path):
    comp = np.asarray(compositional, dtype=float)
    flat = np.asarray(unstructured, dtype=float)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(3.4, 3.4))
        ax.scatter(flat, comp, s=12, color="k")
        lo = float(min(comp.min(), flat.min())) - 1.0 if comp.size else 0.0
        hi = float(max(comp.max(), flat.max())) + 1.0 if comp.size else 1.0
        ax.plot([lo, hi], [lo, hi], color="0.6", lw=0.8, ls="--")
        ax.set_xlim(lo, hi)
        ax.set_ylim(lo, hi)
        ax.set_xlabel("unstructured PSNR (dB)")
        ax.set_ylabel("compositional PSNR (dB)")
        return _save(fig, path)
