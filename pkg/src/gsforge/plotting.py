"""Figure rendering for sweep grids.

The CSV is the primary artifact; the PNG written next to it is a
convenience view of the same rows. Rendering is headless (Agg) and
deterministic: no timestamps are embedded, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def render_sweep(rows: list, axis_names: tuple, metric: str,
                 path: str, title: str = "") -> None:
    """Render sweep rows to a PNG at `path`.

    One axis gives a line plot, two give a heatmap. Rows must be in the
    sweep's row-major order (first axis slowest).
    """
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    if len(axis_names) == 1:
        xs = [r[0] for r in rows]
        ys = [r[1] for r in rows]
        ax.plot(xs, ys, marker="o", markersize=2.5, linewidth=1.0)
        ax.set_xlabel(axis_names[0])
        ax.set_ylabel(metric)
    else:
        a1 = sorted({r[0] for r in rows})
        a2 = sorted({r[1] for r in rows})
        grid = np.array([r[2] for r in rows]).reshape(len(a1), len(a2))
        mesh = ax.pcolormesh(a2, a1, grid, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=metric)
        ax.set_xlabel(axis_names[1])
        ax.set_ylabel(axis_names[0])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Date": None})
    plt.close(fig)
