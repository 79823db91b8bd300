"""Render sweep reports as figures next to the CSV output.

Two figures per report: spectral efficiency against mean SNR, and loss
rate on a log axis.  Multiple series (one per scenario) overlay in a
single figure for side-by-side scheme comparisons.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["render_figures"]

_MARKERS = ["o", "s", "^", "v", "D", "x", "*", "+"]


def _series_xy(records, attr):
    xs, ys = [], []
    for rec in records:
        if attr == "eta_sim":
            val = rec.sim.eta_hat if rec.sim is not None else None
        elif attr == "plr_sim":
            val = rec.sim.plr_hat if rec.sim is not None else None
        else:
            val = getattr(rec, attr, None)
        if val is None and attr == "eta" and not rec.feasible:
            val = 0.0  # infeasible designs deliver nothing
        if val is None:
            continue
        xs.append(rec.p_bar_db)
        ys.append(val)
    return xs, ys


def render_figures(series, outdir, stem: str = "sweep", dpi: int = 150):
    """``series`` is a list of (label, records) pairs; returns file paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, (label, records) in enumerate(series):
        xs, ys = _series_xy(records, "eta")
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)], ms=4, label=label)
        xs, ys = _series_xy(records, "eta_sim")
        if ys:
            ax.plot(xs, ys, ls="none", marker=_MARKERS[i % len(_MARKERS)],
                    ms=8, mfc="none", label=f"{label} (sim)")
    ax.set_xlabel("average S-D SNR (dB)")
    ax.set_ylabel("spectral efficiency (bits/symbol)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / f"{stem}_eta.png"
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    any_pos = False
    for i, (label, records) in enumerate(series):
        xs, ys = _series_xy(records, "plr")
        pos = [(x, y) for x, y in zip(xs, ys) if y and y > 0]
        if pos:
            any_pos = True
            ax.semilogy([p[0] for p in pos], [p[1] for p in pos],
                        marker=_MARKERS[i % len(_MARKERS)], ms=4, label=label)
        xs, ys = _series_xy(records, "plr_sim")
        pos = [(x, y) for x, y in zip(xs, ys) if y and y > 0]
        if pos:
            any_pos = True
            ax.semilogy([p[0] for p in pos], [p[1] for p in pos], ls="none",
                        marker=_MARKERS[i % len(_MARKERS)], ms=8, mfc="none",
                        label=f"{label} (sim)")
    ax.set_xlabel("average S-D SNR (dB)")
    ax.set_ylabel("packet loss rate")
    ax.grid(True, which="both", alpha=0.4)
    if any_pos:
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / f"{stem}_plr.png"
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    paths.append(path)
    return paths
