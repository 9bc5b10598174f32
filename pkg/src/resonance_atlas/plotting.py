"""Minimal SVG line plots written next to the CSV artifacts."""
from __future__ import annotations

import os
import tempfile
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# a fixed hash salt and no date stamp keep repeated renders byte-identical
matplotlib.rcParams["svg.hashsalt"] = "resonance-atlas"


def polyline_svg(path: str, series: Sequence[tuple], xlabel: str, ylabel: str, title: str = "") -> str:
    """Draw each ``(x, y, label)`` series as a polyline and save an SVG atomically.

    Returns the path written.
    """
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        for x, y, label in series:
            ax.plot(x, y, "-", lw=1.2, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if any(label for _, _, label in series):
            ax.legend(fontsize="small")
        ax.grid(True, lw=0.3)
        fig.tight_layout()
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(suffix=".svg", dir=directory)
        os.close(fd)
        try:
            fig.savefig(tmp, format="svg", metadata={"Date": None})
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
    finally:
        plt.close(fig)
    return path
