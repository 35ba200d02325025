"""PNG figures rendered next to the CSV output (``--plot``).

Every figure is drawn from the same arrays that go into the CSV files, so
the CSVs remain the reference data.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {"figure.dpi": 120, "axes.grid": True, "grid.alpha": 0.3, "font.size": 9,
         "legend.fontsize": 8, "axes.spines.top": False, "axes.spines.right": False}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def profiles(path, coord, curves, labels, xlabel, ylabel):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        for c, lab in zip(curves, labels):
            ax.plot(coord, np.asarray(c)[:len(coord)], label=lab, lw=1.3)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend()
        _save(fig, path)


def fields(path, grid, values, titles):
    with plt.rc_context(STYLE):
        n = len(values)
        fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.0), squeeze=False)
        for ax, v, t in zip(axes[0], values, titles):
            im = ax.pcolormesh(grid.x, grid.y, np.asarray(v).reshape(grid.shape),
                               shading="auto", cmap="viridis")
            ax.set_aspect("equal")
            ax.set_title(t)
            ax.set_xlabel("x")
            ax.set_ylabel("y")
            fig.colorbar(im, ax=ax, shrink=0.8)
        _save(fig, path)


def modes(path, grid, phis, labels):
    """1-D modes as curves; 2-D modes as the u-component fields."""
    if grid.dimension == 1:
        profiles(path, grid.x, phis, labels, "x", "phi")
    else:
        fields(path, grid, [grid.split(p)[0] for p in phis], labels)


def history(path, series):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for name, f in series.items():
            f = np.asarray(f, dtype=float)
            ax.semilogy(np.arange(f.size), np.abs(f), marker="o", ms=3, label=name)
        ax.set_xlabel("iteration")
        ax.set_ylabel("|f|")
        ax.legend()
        _save(fig, path)


def gradcheck(path, report):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        labels = [r.label for r in report.rows]
        pos = np.arange(len(labels))
        ax.bar(pos - 0.2, [r.adjoint for r in report.rows], 0.4, label="adjoint")
        ax.bar(pos + 0.2, [r.fd for r in report.rows], 0.4, label="finite difference")
        ax.set_xticks(pos)
        ax.set_xticklabels([str(c) for c in labels])
        ax.set_xlabel("component")
        ax.set_ylabel("df/dx")
        ax.legend()
        _save(fig, path)
