"""Renderers for the four figure kinds.

All physics numbers come straight from the CSV files; nothing is recomputed
here beyond evaluating a stored quadratic for its dashed overlay.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .figspec import FigureSpec, SpecError, read_table

plt.rcParams["svg.hashsalt"] = "leakctl-figures"


def _pick_x(spec: FigureSpec, table, default_candidates):
    if spec.x is not None:
        if spec.x not in table:
            raise SpecError(f"x column {spec.x!r} not in CSV columns {list(table)}")
        return spec.x
    for cand in default_candidates:
        if cand in table:
            return cand
    return next(iter(table))


def _pick_y(spec: FigureSpec, table, default="fidelity"):
    name = spec.y if spec.y is not None else default
    if name not in table:
        raise SpecError(f"y column {name!r} not in CSV columns {list(table)}")
    return name


def _new_axes(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
    ax.set_xlabel(spec.labels.get("x", spec.x or ""))
    ax.set_ylabel(spec.labels.get("y", spec.y or ""))
    if "title" in spec.labels:
        ax.set_title(spec.labels["title"])
    return fig, ax


def _save(fig, out_path):
    directory = os.path.dirname(out_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    metadata = {"Date": None} if out_path.lower().endswith(".svg") else None
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)
    return out_path


def fit_overlay(ax, fit_path: str, xs):
    """Dashed quadratic a*x^2 + b*x + c read from a one-row fit CSV."""
    table = read_table(fit_path, required=("a", "b", "c"))
    a, b, c = table["a"][0], table["b"][0], table["c"][0]
    dense = np.linspace(xs.min(), xs.max(), 400)
    ax.plot(dense, a * dense**2 + b * dense + c, "--", color="0.35", label="quadratic fit")
    if a != 0.0:
        ax.axvline(-b / (2.0 * a), color="0.7", lw=0.8, ls=":")
    return a, b, c


def _render_curve(spec: FigureSpec):
    table = read_table(spec.csv["data"])
    x = _pick_x(spec, table, ("amp", "det", "phase", "zeta", "time"))
    y = _pick_y(spec, table)
    fig, ax = _new_axes(spec)
    ax.set_xlabel(spec.labels.get("x", x))
    ax.set_ylabel(spec.labels.get("y", y))
    ax.plot(table[x], table[y], "o-", ms=3.5, label=y)
    if "fit" in spec.csv:
        fit_overlay(ax, spec.csv["fit"], table[x])
        ax.legend(frameon=False)
    return _save(fig, spec.out)


def _render_heatmap(spec: FigureSpec):
    table = read_table(spec.csv["data"])
    value = _pick_y(spec, table)
    axes = [c for c in table if c not in (value, "ok") and np.unique(table[c]).size > 1]
    if spec.x is not None:
        if spec.x not in table:
            raise SpecError(f"x column {spec.x!r} not in CSV columns {list(table)}")
        axes = [spec.x] + [c for c in axes if c != spec.x]
    if len(axes) < 2:
        raise SpecError(
            f"heatmap needs two varying axis columns besides {value!r}; found {axes}"
        )
    xname, yname = axes[0], axes[1]
    xg = np.unique(table[xname])
    yg = np.unique(table[yname])
    if xg.size * yg.size != table[value].size:
        raise SpecError(
            f"columns {xname!r}/{yname!r} do not form a full {xg.size}x{yg.size} grid"
        )
    grid = np.full((yg.size, xg.size), np.nan)
    xi = np.searchsorted(xg, table[xname])
    yi = np.searchsorted(yg, table[yname])
    grid[yi, xi] = table[value]
    fig, ax = _new_axes(spec)
    ax.set_xlabel(spec.labels.get("x", xname))
    ax.set_ylabel(spec.labels.get("y", yname))
    mesh = ax.pcolormesh(xg, yg, grid, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=value)
    k = int(np.nanargmax(grid))
    ax.plot(xg[k % xg.size], yg[k // xg.size], "r+", ms=10)
    return _save(fig, spec.out)


def _render_trajectory(spec: FigureSpec):
    table = read_table(spec.csv["data"], required=("time",))
    pops = [c for c in table if c != "time"]
    if not pops:
        raise SpecError("trajectory CSV has no population columns besides 'time'")
    fig, ax = _new_axes(spec)
    ax.set_xlabel(spec.labels.get("x", "time"))
    ax.set_ylabel(spec.labels.get("y", "population"))
    for name in pops:
        ax.plot(table["time"], table[name], label=name)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(frameon=False)
    return _save(fig, spec.out)


def _render_comparison(spec: FigureSpec):
    table = read_table(spec.csv["data"])
    x = _pick_x(spec, table, ("zeta", "eps_phase", "amp", "det", "phase", "time"))
    series = list(spec.series) or [c for c in table if c not in (x, "ok")]
    missing = [s for s in series if s not in table]
    if missing:
        raise SpecError(f"comparison series {missing} not in CSV columns {list(table)}")
    if not series:
        raise SpecError("comparison needs at least one series column")
    fig, ax = _new_axes(spec)
    ax.set_xlabel(spec.labels.get("x", x))
    styles = ["o-", "s--", "^-.", "d:"]
    for k, name in enumerate(series):
        ax.plot(table[x], table[name], styles[k % len(styles)], ms=3.5, label=name)
    ax.legend(frameon=False)
    return _save(fig, spec.out)


_RENDERERS = {
    "curve": _render_curve,
    "heatmap": _render_heatmap,
    "trajectory": _render_trajectory,
    "comparison": _render_comparison,
}


def render(spec: FigureSpec) -> str:
    """Render the figure described by ``spec`` and return the image path."""
    return _RENDERERS[spec.kind](spec)
