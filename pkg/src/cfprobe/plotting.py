"""Static boxplot rendering for MaxSkew distributions.

SVGs are written with a fixed hash salt and no creation date so identical
inputs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import NEG_INF, SkewReport

_SVG_RC = {"svg.hashsalt": "cfprobe"}


def save_maxskew_boxplot(reports: Sequence[SkewReport], path: str | Path, title: str = "") -> None:
    """One box over subjects' MaxSkew values, extremes annotated with subjects.

    The subject attaining the maximum is marked with a red circle and label,
    the minimum with a green one. Negative-infinity sentinels are dropped.
    """
    finite = sorted(
        (r for r in reports if r.max_skew != NEG_INF),
        key=lambda r: (r.max_skew, r.subject),
    )
    if not finite:
        raise ValueError("no finite MaxSkew values to plot")
    values = [r.max_skew for r in finite]
    low, high = finite[0], finite[-1]

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(4.5, 5.0))
        ax.boxplot([values], widths=0.45, showfliers=False)
        ax.plot([1], [high.max_skew], "o", color="red")
        ax.annotate(high.subject, (1, high.max_skew), textcoords="offset points",
                    xytext=(10, 0), color="red", fontsize=9)
        ax.plot([1], [low.max_skew], "o", color="green")
        ax.annotate(low.subject, (1, low.max_skew), textcoords="offset points",
                    xytext=(10, 0), color="green", fontsize=9)
        ax.set_xticks([])
        ax.set_ylabel(f"MaxSkew@{finite[0].k}")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
