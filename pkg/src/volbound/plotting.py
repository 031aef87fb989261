"""Render sweep results to figure files next to the TSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import SweepRow


def render_sweep_figure(
    rows: list[SweepRow],
    path: str | Path,
    title: str | None = None,
    ylim: tuple[float, float] | None = None,
    dpi: int = 150,
) -> Path:
    """Plot volswap strike, ZVIV and ATMI against correlation and save.

    Mirrors the layout of the reference figures: dashed black for the
    volatility swap strike ("Exact"), solid blue/orange for the two
    implied-vol curves, legend in the lower right.
    """
    path = Path(path)
    rho = [r.rho for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(rho, [r.volswap for r in rows], "k--", lw=1.5, label="Exact")
    ax.plot(rho, [r.zviv for r in rows], "-", color="tab:blue", lw=1.5, label="ZVIV")
    ax.plot(rho, [r.atmi for r in rows], "-", color="tab:orange", lw=1.5, label="ATMI")
    ax.set_xlabel(r"$\rho$")
    ax.set_xlim(min(rho), max(rho))
    if ylim is not None:
        ax.set_ylim(*ylim)
    if title:
        ax.set_title(title)
    ax.grid(True, color="0.85")
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    # strip the Software text chunk so the PNG bytes stay reproducible
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return path
