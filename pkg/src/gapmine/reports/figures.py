"""Matplotlib figures rendered next to the delimited reports.

Plain bar charts only; the delimited data stays the canonical output
and these renderings are a convenience for run inspection.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from ..evaluation.cues import CATEGORIES  # noqa: E402

_BAR_KW = {"edgecolor": "black", "linewidth": 0.5}


def _save(fig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def metrics_figure(per_model: dict[str, dict], path: str | Path) -> None:
    """Grouped P/R/F1 bars per model for one context setting."""
    models = sorted(per_model)
    if not models:
        return
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(models)), 3.2))
    width = 0.25
    for offset, metric in enumerate(("precision", "recall", "f1")):
        xs = [i + (offset - 1) * width for i in range(len(models))]
        ax.bar(xs, [per_model[m][metric] for m in models], width,
               label=metric.upper() if metric == "f1" else metric.capitalize(),
               **_BAR_KW)
    ax.set_xticks(range(len(models)))
    ax.set_xticklabels(models, rotation=20, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(fontsize=8)
    _save(fig, path)


def accuracy_figure(per_model: dict[str, float], path: str | Path) -> None:
    models = sorted(per_model, key=lambda m: (m != "all_models", m))
    if not models:
        return
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(models)), 3.2))
    ax.bar(range(len(models)), [100 * per_model[m] for m in models], 0.6, **_BAR_KW)
    ax.set_xticks(range(len(models)))
    ax.set_xticklabels(models, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    _save(fig, path)


def calibration_figure(per_model: dict[str, dict], path: str | Path) -> None:
    """Correct matches split by originating bucket."""
    models = sorted(per_model)
    if not models:
        return
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(models)), 3.2))
    more = [per_model[m]["correct_more"] for m in models]
    least = [per_model[m]["correct_least"] for m in models]
    xs = range(len(models))
    ax.bar(xs, more, 0.6, label="more_probable", **_BAR_KW)
    ax.bar(xs, least, 0.6, bottom=more, label="least_probable", **_BAR_KW)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(models, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("correct units")
    ax.legend(fontsize=8)
    _save(fig, path)


def unique_shared_figure(per_model: dict[str, tuple[int, int]],
                         path: str | Path) -> None:
    models = sorted(per_model)
    if not models:
        return
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(models)), 3.2))
    unique = [per_model[m][0] for m in models]
    shared = [per_model[m][1] for m in models]
    xs = range(len(models))
    ax.bar(xs, unique, 0.6, label="unique", **_BAR_KW)
    ax.bar(xs, shared, 0.6, bottom=unique, label="shared", **_BAR_KW)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(models, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("clusters")
    ax.legend(fontsize=8)
    _save(fig, path)


def regions_figure(regions: dict[str, int], path: str | Path) -> None:
    keys = sorted(regions, key=lambda k: (k.count("&"), k))
    if not keys:
        return
    fig, ax = plt.subplots(figsize=(max(5, 0.5 * len(keys)), 3.4))
    ax.bar(range(len(keys)), [regions[k] for k in keys], 0.7, **_BAR_KW)
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("clusters")
    _save(fig, path)


def category_profile_figure(normalized: dict[str, dict[str, float]],
                            path: str | Path) -> None:
    """Grouped bars per category axis (one bar per model)."""
    models = sorted(normalized)
    if not models:
        return
    fig, ax = plt.subplots(figsize=(7, 3.4))
    width = 0.8 / max(1, len(models))
    for offset, model in enumerate(models):
        xs = [i + offset * width for i in range(len(CATEGORIES))]
        ax.bar(xs, [normalized[model][c] for c in CATEGORIES], width,
               label=model, **_BAR_KW)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(CATEGORIES))])
    ax.set_xticklabels(CATEGORIES, rotation=15, ha="right", fontsize=7)
    ax.set_ylabel("normalized count")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    _save(fig, path)
