"""Figure rendering for the CLI report paths (Agg backend, files only)."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
}


def _save(fig, path) -> None:
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def save_sweep_figure(rows: Sequence[Mapping[str, object]], path) -> None:
    """Realized switch rate against the requested translation probability."""
    ps = [float(row["p"]) for row in rows]
    rates = [float(row["switch_rate"]) for row in rows]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot([0, 1], [0, 1], linestyle=":", color="gray", label="requested")
        ax.plot(ps, rates, marker="o", color="tab:blue", label="realized")
        ax.set_xlabel("translation probability")
        ax.set_ylabel("switched token fraction")
        ax.set_xlim(0, 1.02)
        ax.set_ylim(0, 1.02)
        ax.legend(frameon=False)
        _save(fig, path)


def save_bucket_figure(bucket_mrr: Mapping[str, float], bucket_count: Mapping[str, int], k: int, path) -> None:
    """Per-overlap-bucket MRR bars with query counts."""
    names = list(bucket_mrr)
    values = [bucket_mrr[name] for name in names]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        bars = ax.bar(names, values, color="tab:blue", width=0.6)
        for bar, name in zip(bars, names):
            ax.annotate(
                f"n={bucket_count[name]}",
                (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                ha="center",
                va="bottom",
                fontsize=8,
            )
        ax.set_xlabel("query/relevant-document token overlap")
        ax.set_ylabel(f"MRR@{k}")
        _save(fig, path)


def save_rr_figure(
    per_query: Mapping[str, float], k: int, path, baseline: Mapping[str, float] | None = None
) -> None:
    """Histogram of per-query reciprocal ranks, optionally against a baseline."""
    bins = [0.0] + [1.0 / r for r in range(k, 0, -1)] + [1.001]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.hist(
            list(per_query.values()), bins=bins, alpha=0.7, label="run", color="tab:blue"
        )
        if baseline is not None:
            ax.hist(
                list(baseline.values()),
                bins=bins,
                alpha=0.5,
                label="baseline",
                color="tab:orange",
            )
            ax.legend(frameon=False)
        ax.set_xlabel(f"reciprocal rank @ {k}")
        ax.set_ylabel("queries")
        _save(fig, path)


def save_experiment_figure(mrr: Mapping[str, Mapping[str, float]], path) -> None:
    """Grouped bars: each ranker's MRR@10 on the moir and clir test sets."""
    rankers = sorted(mrr)
    test_sets = ["moir", "clir"]
    width = 0.35
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for i, ranker in enumerate(rankers):
            xs = [j + (i - (len(rankers) - 1) / 2) * width for j in range(len(test_sets))]
            ax.bar(xs, [mrr[ranker][t] for t in test_sets], width=width, label=ranker)
        ax.set_xticks(range(len(test_sets)))
        ax.set_xticklabels(test_sets)
        ax.set_ylabel("MRR@10")
        ax.legend(frameon=False)
        _save(fig, path)
