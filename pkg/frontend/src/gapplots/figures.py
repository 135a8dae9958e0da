"""Figure builders over rampmcmc result files.

All numbers are read from the input files; nothing is recomputed here beyond
row selection and axis cosmetics. Fit overlays take their exponents from
fit.json documents produced by the simulator's `fit` command.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvdata import ResultTable, SchemaError, load_fit, load_table

logger = logging.getLogger(__name__)

FIGURE_KINDS = ("bound-vs-alpha", "gap-vs-alpha", "gap-vs-kappa", "scaling-inset")

MODEL_COLORMAPS = {"sk": plt.cm.Greens, "3spin": plt.cm.Purples}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: figure kind, role-tagged input paths, output image path."""

    kind: str
    data: Path
    output: Path
    overlay: Path | None = None
    fits: tuple[Path, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"figure kind must be one of {FIGURE_KINDS}, got {self.kind!r}")


def _size_shades(table: ResultTable, sizes: np.ndarray):
    models = set(table.column("model", numeric=False)) if "model" in table.header else set()
    cmap = MODEL_COLORMAPS.get(models.pop() if len(models) == 1 else None, plt.cm.viridis)
    return [cmap(x) for x in np.linspace(0.45, 0.95, max(len(sizes), 2))]


def _save(figure, spec: FigureSpec) -> None:
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(spec.output, dpi=150, bbox_inches="tight")
    plt.close(figure)
    logger.info("wrote %s", spec.output)


def _empty_figure(spec: FigureSpec, message: str) -> None:
    logger.warning("%s: %s; emitting empty axes", spec.data, message)
    figure, axes = plt.subplots(figsize=(5, 3.4))
    axes.set_title("no data")
    _save(figure, spec)


def draw_bound_vs_alpha(spec: FigureSpec) -> None:
    """Bound curves against ramp time, one shaded line per system size,
    with exact-gap dots overlaid when a gap scan is supplied."""
    table = load_table(spec.data)
    if table.empty:
        _empty_figure(spec, "no bound rows")
        return
    table.require_columns(["N", "alpha", "bound"])
    sizes = np.unique(table.column("N"))
    figure, axes = plt.subplots(figsize=(5.2, 3.6))
    shades = _size_shades(table, sizes)
    n_col, alpha_col, bound_col = table.column("N"), table.column("alpha"), table.column("bound")
    for shade, n in zip(shades, sizes):
        mask = n_col == n
        order = np.argsort(alpha_col[mask])
        axes.plot(alpha_col[mask][order], bound_col[mask][order],
                  color=shade, label=f"N={int(n)}")
    if spec.overlay is not None:
        gaps = load_table(spec.overlay)
        gaps.require_columns(["N", "alpha", "delta"])
        gn, ga, gd = gaps.column("N"), gaps.column("alpha"), gaps.column("delta")
        for shade, n in zip(shades, sizes):
            mask = gn == n
            if mask.any():
                axes.plot(ga[mask], gd[mask], "o", color=shade, markersize=4,
                          markeredgecolor="black", markeredgewidth=0.4)
    axes.set_yscale("log")
    axes.set_xlabel(r"ramp time $\alpha$")
    axes.set_ylabel(r"gap bound")
    axes.legend(fontsize=7, ncol=2)
    _save(figure, spec)


def _select_scaling_points(table: ResultTable, select: str):
    """Pick one row per size from a summary table, as declared by the fit."""
    table.require_columns(["N", "alpha", "mean_delta", "std_err"])
    n_col = table.column("N")
    alpha_col = table.column("alpha")
    mean_col = table.column("mean_delta")
    err_col = table.column("std_err")
    sizes = np.unique(n_col)
    points = []
    for n in sizes:
        mask = n_col == n
        if select == "quench":
            pick = np.nonzero(mask & (alpha_col == 0.0))[0]
        elif select == "alpha-n":
            pick = np.nonzero(mask & (alpha_col == n))[0]
        else:
            candidates = np.nonzero(mask)[0]
            pick = candidates[[np.argmax(mean_col[candidates])]]
        if len(pick) == 0:
            raise SchemaError(f"{table.path}: no row matching selection {select!r} for N={n:g}")
        points.append((n, mean_col[pick[0]], err_col[pick[0]]))
    return np.array(points)


def _scaling_points(table: ResultTable, select: str):
    if "mean_delta" in table.header:
        return _select_scaling_points(table, select)
    table.require_columns(["N", "delta", "sigma"])
    return np.column_stack(
        [table.column("N"), table.column("delta"), table.column("sigma")]
    )


def _draw_scaling(axes, table: ResultTable, fit_documents: list[dict]) -> None:
    markers = ("o", "s", "^", "d")
    for index, document in enumerate(fit_documents or [{"kind": None, "select": "peak"}]):
        select = document.get("select", "peak")
        points = _scaling_points(table, select)
        sizes, gaps, errors = points.T
        axes.errorbar(
            sizes, gaps, yerr=errors, fmt=markers[index % len(markers)],
            markersize=4, capsize=2, color="black" if index == 0 else None,
            label=select,
        )
        if document.get("kind") is None:
            continue
        grid = np.linspace(sizes.min(), sizes.max(), 64)
        exponent = float(document["exponent"])
        if document["kind"] == "exponential":
            # anchor the declared slope through the data's log midpoint
            offset = np.mean(np.log2(gaps) + exponent * sizes)
            line = 2.0 ** (offset - exponent * grid)
            label = rf"$2^{{-{exponent:.3f} N}}$"
        else:
            offset = np.mean(np.log(gaps) + exponent * np.log(sizes))
            line = np.exp(offset - exponent * np.log(grid))
            label = rf"$N^{{-{exponent:.2f}}}$"
        axes.plot(grid, line, "--", linewidth=1, label=label)
    axes.set_yscale("log")
    axes.set_xlabel("N")
    axes.set_ylabel(r"$\langle\delta\rangle$")
    axes.legend(fontsize=6)


def draw_gap_vs_alpha(spec: FigureSpec) -> None:
    """Disorder-averaged gap against ramp time with quench triangles and
    peak dots; a scaling inset appears when fit documents are supplied."""
    table = load_table(spec.data)
    if table.empty:
        _empty_figure(spec, "no summary rows")
        return
    table.require_columns(["N", "alpha", "mean_delta", "std_err"])
    sizes = np.unique(table.column("N"))
    n_col, alpha_col = table.column("N"), table.column("alpha")
    mean_col, err_col = table.column("mean_delta"), table.column("std_err")
    figure, axes = plt.subplots(figsize=(5.2, 3.8))
    shades = _size_shades(table, sizes)
    for shade, n in zip(shades, sizes):
        mask = n_col == n
        order = np.argsort(alpha_col[mask])
        axes.errorbar(
            alpha_col[mask][order], mean_col[mask][order], yerr=err_col[mask][order],
            color=shade, linewidth=1.2, capsize=1.5, label=f"N={int(n)}",
        )
        peak = np.argmax(mean_col[mask][order])
        axes.plot(alpha_col[mask][order][peak], mean_col[mask][order][peak],
                  "o", color="black", markersize=4, zorder=5)
        quench = np.nonzero(alpha_col[mask][order] == 0.0)[0]
        if len(quench):
            axes.plot(0.0, mean_col[mask][order][quench[0]], "^",
                      color="tab:blue", markersize=5, zorder=5)
    axes.set_yscale("log")
    axes.set_xlabel(r"ramp time $\alpha$")
    axes.set_ylabel(r"$\langle\delta\rangle$")
    axes.legend(fontsize=6, ncol=2)
    if spec.fits:
        inset = axes.inset_axes([0.62, 0.08, 0.36, 0.42])
        _draw_scaling(inset, table, [load_fit(path) for path in spec.fits])
        inset.set_ylabel("")
        inset.tick_params(labelsize=6)
        inset.legend(fontsize=5)
    _save(figure, spec)


def draw_gap_vs_kappa(spec: FigureSpec) -> None:
    """Gap against hold duration on a log axis, with the interval mean
    (dashed) and the dephased-limit value (dotted)."""
    table = load_table(spec.data)
    if table.empty:
        _empty_figure(spec, "no scan rows")
        return
    table.require_columns(["kappa", "delta"])
    kappa_raw = table.column("kappa", numeric=False)
    delta_col = table.column("delta")
    numeric = np.array([value not in ("avg", "inf") for value in kappa_raw])
    figure, axes = plt.subplots(figsize=(5.2, 3.4))
    if numeric.any():
        kappas = np.array([float(v) for v in kappa_raw[numeric]])
        gaps = delta_col[numeric]
        grid = np.unique(kappas)
        averaged = np.array([gaps[kappas == k].mean() for k in grid])
        axes.plot(grid, averaged, "-", color="tab:green", linewidth=1.0)
    for tag, style, label in (("avg", "--", "interval mean"), ("inf", ":", "dephased limit")):
        mask = kappa_raw == tag
        if mask.any():
            axes.axhline(delta_col[mask].mean(), linestyle=style, color="gray", label=label)
    axes.set_xscale("log")
    axes.set_yscale("log")
    axes.set_xlabel(r"hold duration $\kappa$")
    axes.set_ylabel(r"$\delta$")
    axes.legend(fontsize=7)
    _save(figure, spec)


def draw_scaling_inset(spec: FigureSpec) -> None:
    """Standalone peak-scaling panel: points with declared fit overlays."""
    table = load_table(spec.data)
    if table.empty:
        _empty_figure(spec, "no scaling rows")
        return
    figure, axes = plt.subplots(figsize=(3.6, 3.0))
    _draw_scaling(axes, table, [load_fit(path) for path in spec.fits])
    _save(figure, spec)


_RENDERERS = {
    "bound-vs-alpha": draw_bound_vs_alpha,
    "gap-vs-alpha": draw_gap_vs_alpha,
    "gap-vs-kappa": draw_gap_vs_kappa,
    "scaling-inset": draw_scaling_inset,
}


def render(spec: FigureSpec) -> None:
    """Render one figure; reads inputs, writes the image, touches nothing else."""
    _RENDERERS[spec.kind](spec)
