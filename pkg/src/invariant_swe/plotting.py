"""PNG figures rendered next to the CSV output of a run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import Grid2D  # noqa: E402
from .diagnostics import relative_changes  # noqa: E402


def _read_csv(path: Path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return np.atleast_1d(data)


def plot_diagnostics(result, out: Path) -> Path:
    recs = result.records
    t = np.array([r.t for r in recs[1:]])
    ch = [relative_changes(r, recs[0]) for r in recs[1:]]
    keys = ["relM", "relP", "relPy", "relH"] if recs[0].is_2d else ["relM", "relP", "relH"]
    fig, axes = plt.subplots(len(keys), 1, figsize=(6, 2.2 * len(keys)), sharex=True)
    for ax, k in zip(axes, keys):
        ax.plot(t, [c[k] for c in ch], lw=1)
        ax.set_ylabel(k)
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2))
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    path = out / "diagnostics.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_mesh(result, out: Path) -> Path:
    path = out / "mesh.png"
    if isinstance(result.grid, Grid2D):
        g = result.grid
        fig, ax = plt.subplots(figsize=(6, 6))
        # close the periodic lines with the first row/column shifted by a period
        x = np.vstack([g.x, g.x[:1] + g.Lx])
        y = np.vstack([g.y, g.y[:1]])
        x = np.hstack([x, x[:, :1]])
        y = np.hstack([y, y[:, :1] + g.Ly])
        ax.plot(x, y, "k-", lw=0.4)
        ax.plot(x.T, y.T, "k-", lw=0.4)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(f"grid at t={result.t:g}")
    else:
        data = _read_csv(result.files["mesh"])
        fig, ax = plt.subplots(figsize=(6, 4))
        for i in np.unique(data["i"]):
            sel = data["i"] == i
            ax.plot(data["x"][sel], data["t"][sel], "k-", lw=0.5)
        ax.set_xlabel("x")
        ax.set_ylabel("t")
        ax.set_title("grid point trajectories")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_height(result, out: Path) -> Path:
    path = out / "height.png"
    g, s = result.grid, result.state
    if isinstance(g, Grid2D):
        fig, ax = plt.subplots(figsize=(6, 5))
        # wrap positions into one period for display
        x = np.mod(g.x, g.Lx)
        y = np.mod(g.y, g.Ly)
        tc = ax.tripcolor(x.ravel(), y.ravel(), s.h.ravel(), shading="gouraud")
        fig.colorbar(tc, ax=ax, label="h")
        ax.set_aspect("equal")
    else:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(g.x, s.h, ".-", lw=0.8, ms=3, label="h")
        ax.set_xlabel("x")
        ax.set_ylabel("h")
    ax.set_title(f"h at t={result.t:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_run(result, out_dir) -> list[Path]:
    out = Path(out_dir)
    return [plot_diagnostics(result, out), plot_mesh(result, out), plot_height(result, out)]
