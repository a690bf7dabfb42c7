"""Static figures from the solver CSVs: infusion panels and convergence curves.

Rendering is read-only and deterministic: a fixed dpi and backend version
reproduce identical bytes (file metadata dates are suppressed).
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "equibail-plots"   # deterministic SVG ids

import matplotlib.pyplot as plt
import numpy as np

from .csvdata import load_experiment_rows, load_infusion_grid

PANELS = ("pre", "post", "infusion")


@dataclass(frozen=True)
class FigureSpec:
    input_path: str
    output_path: str
    panels: tuple = PANELS     # subset of PANELS, or ("all",)
    dpi: int = 150


@dataclass(frozen=True)
class InfusionGeometry:
    """Marker positions recovered from the data alone."""

    support_lo: float | None   # x* - delta - y
    support_hi: float | None   # x* - delta
    cutoff_pre: float | None   # x*, the pre-infusion value jump
    threshold: float | None    # v*, the post-infusion plateau level


def infer_infusion_geometry(data) -> InfusionGeometry:
    x, iota, v_pre, v_post = data["x"], data["iota"], data["value_pre"], data["value_post"]
    on = iota > 0
    support_lo = float(x[on].min()) if on.any() else None
    support_hi = float(x[on].max()) if on.any() else None
    threshold = float(np.median(v_post[on])) if on.any() else None
    jumps = np.diff(v_pre)
    cutoff = None
    if jumps.size and jumps.max() > 5 * max(np.median(np.abs(jumps)), 1e-12):
        cutoff = float(x[int(np.argmax(jumps)) + 1])
    return InfusionGeometry(support_lo=support_lo, support_hi=support_hi,
                            cutoff_pre=cutoff, threshold=threshold)


def _normalize_panels(panels):
    if panels is None or "all" in panels:
        return PANELS
    unknown = [p for p in panels if p not in PANELS]
    if unknown:
        raise ValueError(f"unknown panels {unknown}; available: {list(PANELS)} or 'all'")
    return tuple(p for p in PANELS if p in panels)


def build_infusion_figure(data, panels=PANELS):
    """Assemble the panel figure; returns the matplotlib Figure."""
    panels = _normalize_panels(panels)
    geo = infer_infusion_geometry(data)
    x = data["x"]
    fig, axes = plt.subplots(len(panels), 1, figsize=(7.0, 2.6 * len(panels)),
                             sharex=True, squeeze=False)
    axes = axes[:, 0]
    markers = [(geo.support_lo, "support start"), (geo.support_hi, "support end"),
               (geo.cutoff_pre, "pre-infusion cutoff")]

    def decorate(ax, with_threshold=True):
        for pos, label in markers:
            if pos is not None:
                ax.axvline(pos, color="0.6", lw=0.8, ls=":", zorder=0)
        if with_threshold and geo.threshold is not None:
            ax.axhline(geo.threshold, color="0.4", lw=0.8, ls="--", zorder=0)

    for ax, panel in zip(axes, panels):
        if panel == "pre":
            ax.plot(x, data["value_pre"], "-", color="tab:blue", lw=1.4, label="value")
            ax.plot(x, data["endowment"], "--", color="tab:red", lw=1.2, label="endowment")
            decorate(ax)
            ax.set_ylabel("pre-infusion")
        elif panel == "post":
            ax.plot(x, data["value_post"], "-", color="tab:blue", lw=1.4, label="value")
            ax.plot(x, data["endowment_post"], "--", color="tab:red", lw=1.2,
                    label="endowment + cash")
            decorate(ax)
            ax.set_ylabel("post-infusion")
        else:
            ax.plot(x, data["iota"], "-", color="tab:green", lw=1.4, label="cash infusion")
            decorate(ax, with_threshold=False)
            ax.set_ylabel("infusion")
        ax.legend(loc="upper left", fontsize=8)
    axes[-1].set_xlabel("firm label")
    fig.tight_layout()
    return fig


def _save(fig, path, dpi):
    meta = {"Date": None} if path.endswith(".svg") else None
    fig.savefig(path, dpi=dpi, metadata=meta)
    plt.close(fig)


def render_infusion_figure(spec: FigureSpec) -> str:
    data = load_infusion_grid(spec.input_path)
    fig = build_infusion_figure(data, spec.panels)
    _save(fig, spec.output_path, spec.dpi)
    return spec.output_path


def build_convergence_figure(records, metric, metrics):
    if metric not in metrics:
        raise ValueError(f"unknown metric {metric!r}; available metrics: {metrics}")
    by_n = {}
    for m, n, value in records:
        if m == metric:
            by_n.setdefault(n, []).append(value)
    ns = sorted(by_n)
    med = np.array([np.median(by_n[n]) for n in ns])
    q25 = np.array([np.percentile(by_n[n], 25) for n in ns])
    q75 = np.array([np.percentile(by_n[n], 75) for n in ns])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.fill_between(ns, q25, q75, color="tab:blue", alpha=0.25, label="IQR")
    ax.plot(ns, med, "o-", color="tab:blue", lw=1.4, label="median")
    ax.set_xscale("log")
    ax.set_xlabel("network size n")
    ax.set_ylabel(metric)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render_convergence(input_path, metric, output_path, dpi=150) -> str:
    records, metrics = load_experiment_rows(input_path)
    fig = build_convergence_figure(records, metric, metrics)
    _save(fig, output_path, dpi)
    return output_path
