"""Static SVG bar charts. Output is byte-stable across runs."""

from __future__ import annotations

import io
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {"svg.hashsalt": "inclusive-coref", "svg.fonttype": "none"}


def _svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def bar_chart(
    labels: Sequence[str],
    values: Sequence[float],
    lows: Sequence[float] | None = None,
    highs: Sequence[float] | None = None,
    title: str = "",
    ylabel: str = "accuracy",
) -> str:
    """Bars with optional interval whiskers."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(labels) + 1.5), 3.2))
        x = range(len(labels))
        yerr = None
        if lows is not None and highs is not None:
            yerr = [[v - lo for v, lo in zip(values, lows)], [hi - v for v, hi in zip(values, highs)]]
        ax.bar(x, values, yerr=yerr, capsize=3, color="#4878a8")
        ax.set_xticks(list(x))
        ax.set_xticklabels(labels, rotation=45, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        return _svg(fig)


def accuracy_certainty_chart(
    labels: Sequence[str],
    values: Sequence[float],
    lows: Sequence[float],
    highs: Sequence[float],
    certainty: Sequence[Mapping[str, float]],
    certainty_labels: Sequence[str] = ("definitely", "probably", "unsure"),
    title: str = "",
) -> str:
    """Accuracy bars with intervals on top, stacked certainty shares below."""
    with plt.rc_context(_RC):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(max(4.0, 0.6 * len(labels) + 1.5), 4.8),
                                          gridspec_kw={"height_ratios": [3, 1]})
        x = list(range(len(labels)))
        yerr = [[v - lo for v, lo in zip(values, lows)], [hi - v for v, hi in zip(values, highs)]]
        top.bar(x, values, yerr=yerr, capsize=3, color="#4878a8")
        top.set_ylim(0, 1.05)
        top.set_ylabel("accuracy")
        if title:
            top.set_title(title)
        base = [0.0] * len(labels)
        for lab, color in zip(certainty_labels, ("#2d6a4f", "#95d5b2", "#d8d8d8")):
            share = [c.get(lab, 0.0) for c in certainty]
            bottom.bar(x, share, bottom=base, color=color, label=lab)
            base = [b + s for b, s in zip(base, share)]
        bottom.set_ylim(0, 1)
        bottom.set_ylabel("certainty")
        bottom.legend(fontsize="x-small", ncol=3, loc="upper center", bbox_to_anchor=(0.5, -0.9))
        bottom.set_xticks(x)
        bottom.set_xticklabels(labels, rotation=45, ha="right")
        return _svg(fig)
