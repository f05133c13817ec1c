"""Figure rendering for the report path; every figure mirrors one CSV."""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_THEORY_STYLE = {"linestyle": "-", "linewidth": 1.6}
_DATA_STYLES = (
    {"linestyle": "--", "marker": "o", "markersize": 3, "linewidth": 1.0},
    {"linestyle": "--", "marker": "s", "markersize": 3, "linewidth": 1.0},
    {"linestyle": "--", "marker": "^", "markersize": 3, "linewidth": 1.0},
    {"linestyle": "--", "marker": "x", "markersize": 4, "linewidth": 1.0},
    {"linestyle": "--", "marker": "d", "markersize": 3, "linewidth": 1.0},
    {"linestyle": "--", "marker": "+", "markersize": 4, "linewidth": 1.0},
)


def line_figure(
    path: str,
    series: Sequence[tuple[str, np.ndarray, np.ndarray]],
    *,
    xlabel: str,
    ylabel: str,
    logy: bool = False,
    title: Optional[str] = None,
) -> str:
    """Overlay the given (label, x, y) series and save a PNG.

    Labels starting with "th" are drawn as solid theory curves, the rest as
    dashed marker lines.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    data_i = 0
    for label, x, y in series:
        if label.startswith("th"):
            ax.plot(x, y, label=label, **_THEORY_STYLE)
        else:
            style = _DATA_STYLES[data_i % len(_DATA_STYLES)]
            data_i += 1
            ax.plot(x, y, label=label, **style)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
