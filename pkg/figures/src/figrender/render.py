"""Deterministic multi-panel rendering of recipe data."""

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recipes import RecipeError

# One fixed style; no timestamps, no rcParams leakage from the host.
STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "lines.linewidth": 0.9,
    "axes.grid": True,
    "grid.alpha": 0.25,
}


def read_table(path):
    """CSV reader for the delimited output format: '#' metadata, header, rows."""
    meta = {}
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                key, sep, val = body.partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            if columns is None:
                columns = line.split(",")
                continue
            if line:
                rows.append([float(v) for v in line.split(",")])
    if columns is None or not rows:
        raise RecipeError(f"{path}: no data rows")
    return meta, columns, np.array(rows)


def _column(columns, data, name, path):
    if name not in columns:
        raise RecipeError(f"{path}: expected column {name!r}, found {columns}")
    return data[:, columns.index(name)]


def _draw_panel(ax, kind, paths):
    for path in paths:
        meta, columns, data = read_table(path)
        if kind == "scatter":
            ax.plot(
                _column(columns, data, "xi", path),
                _column(columns, data, "v", path),
                ".", markersize=1.2, markeredgewidth=0,
            )
        elif kind == "lines":
            ax.plot(_column(columns, data, "tau", path), _column(columns, data, "xi", path))
        elif kind == "spectrum":
            nu = _column(columns, data, "nu", path)
            power = _column(columns, data, "power", path)
            floor = max(power.max(), 1e-300) * 1e-12
            ax.semilogy(nu, np.maximum(power, floor))
        elif kind == "probabilities":
            tau = _column(columns, data, "tau", path)
            for name in columns:
                if name.startswith("P_"):
                    ax.plot(tau, _column(columns, data, name, path),
                            label=name.replace("P_", "n="))
            if sum(1 for c in columns if c.startswith("P_")) > 1:
                ax.legend(fontsize=6, ncol=2)
        elif kind == "expectation":
            tau = _column(columns, data, "tau", path)
            ax.plot(tau, _column(columns, data, "xi2", path), label="xi^2")
            ax.plot(tau, _column(columns, data, "h_lo", path), label="H_LO")
            ax.legend(fontsize=6)
        else:  # unreachable: recipes are validated on load
            raise RecipeError(f"unknown panel kind {kind!r}")


def render(recipe, data_dir, out_path):
    """Render a recipe from a data directory; byte-identical for identical inputs."""
    resolved = recipe.validate_data_dir(data_dir)
    n = len(recipe.panels)
    ncols = max(1, min(recipe.ncols, n))
    nrows = math.ceil(n / ncols)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(3.4 * ncols, 2.6 * nrows), squeeze=False
        )
        for i, panel in enumerate(recipe.panels):
            ax = axes[i // ncols][i % ncols]
            _draw_panel(ax, recipe.kind, resolved[i])
            ax.set_title(panel.label)
            ax.set_xlabel(recipe.xlabel)
            ax.set_ylabel(recipe.ylabel)
        for j in range(n, nrows * ncols):
            axes[j // ncols][j % ncols].axis("off")
        fig.suptitle(recipe.title)
        fig.tight_layout(rect=(0, 0, 1, 0.95))
        os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
        fig.savefig(out_path, format="png", metadata={"Software": None})
        plt.close(fig)
    return out_path
