"""Figure recipes: one renderer per experiment dataset.

plotkit never recomputes physics.  It consumes the documented CSV/JSON
schemas produced by `cavom run` and turns each dataset into one image; a
dataset with missing files or unexpected headers fails loudly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class MissingDataset(FileNotFoundError):
    """Dataset file absent or carries no data rows."""


class SchemaMismatch(ValueError):
    """Dataset columns do not match the documented schema."""


SCHEMAS = {
    "fig2": ("fig2.csv", ["x", "re_v", "im_v", "u_classical"]),
    "fig3a": ("fig3a.csv", ["delta_c", "p_r", "p_r_empty"]),
    "fig3b": ("fig3b.csv", ["delta_c", "p_r", "p_r_empty"]),
    "fig4c": ("fig4c.csv", ["r_zp", "p_r", "p_t"]),
    "fig5": ("fig5.csv", ["delta_c", "p_r", "p_t", "p_at", "p_t_cond",
                          "g2_tt", "g2_rt"]),
    "fig6": ("fig6.csv", ["r_zp", "n_r", "n_t", "n_total"]),
    "fig9": ("fig9.csv", ["ratio", "p_r_eff", "p_t_eff", "p_at_eff", "n_r_eff",
                          "p_r_full", "p_t_full", "p_at_full", "n_r_full"]),
    "fig10": ("fig10.csv", ["ratio", "n_r_eff", "n_r_full"]),
    "fig11": ("fig11.csv", ["detuning_over_g0", "r_zp_set_i", "delta_c_set_i",
                            "r_zp_set_ii", "delta_c_set_ii"]),
}

FIGURE_IDS = tuple(SCHEMAS)


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    data_dir: Path
    out_dir: Path
    dpi: int = 150
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure_id not in SCHEMAS:
            raise SchemaMismatch(
                f"unknown figure id {self.figure_id!r}; known: {', '.join(FIGURE_IDS)}")


def load_table(path: Path, columns: list[str]) -> dict[str, np.ndarray]:
    if not path.is_file():
        raise MissingDataset(f"dataset not found: {path}")
    with open(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingDataset(f"dataset is empty: {path}")
        if header != columns:
            raise SchemaMismatch(
                f"{path} columns {header} do not match expected {columns}")
        try:
            rows = [[float(v) for v in row] for row in reader if row]
        except ValueError as exc:
            raise SchemaMismatch(f"{path} has a non-numeric cell: {exc}")
    if not rows:
        raise MissingDataset(f"dataset has no rows: {path}")
    data = np.asarray(rows)
    if data.shape[1] != len(columns):
        raise SchemaMismatch(f"{path} has ragged rows")
    return {name: data[:, i] for i, name in enumerate(columns)}


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    return fig, ax


def _plot_fig2(t, ax):
    ax.plot(t["x"], t["re_v"], color="tab:blue", label="Re V(x)")
    ax.plot(t["x"], t["im_v"], color="tab:red", label="Im V(x)")
    ax.plot(t["x"], t["u_classical"], "--", color="tab:green", label="U(x)")
    ax.legend()


def _plot_spectrum(t, ax):
    ax.plot(t["delta_c"], t["p_r"], color="tab:blue", label="with atom")
    ax.plot(t["delta_c"], t["p_r_empty"], "--", color="tab:green",
            label="empty cavity")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()


def _plot_fig4c(t, ax):
    ax.semilogx(t["r_zp"], t["p_r"], color="tab:red", label="p_r")
    ax.semilogx(t["r_zp"], t["p_t"], color="tab:green", label="p_t")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()


def _plot_fig5(t, axes):
    ax0, ax1, ax2 = axes
    ax0.plot(t["delta_c"], t["p_t"], color="tab:blue", label="p_t")
    ax0.plot(t["delta_c"], t["p_t_cond"], color="tab:green", label="p(t|t)")
    ax0.legend()
    ax0.set_ylabel("probability")
    ax1.plot(t["delta_c"], t["g2_tt"], color="tab:purple")
    ax1.axhline(1.0, color="gray", lw=0.8)
    ax1.set_ylabel("g2_tt(0)")
    ax2.plot(t["delta_c"], t["g2_rt"], color="tab:orange")
    ax2.axhline(1.0, color="gray", lw=0.8)
    ax2.set_ylabel("g2_rt(0)")
    ax2.set_xlabel("drive detuning delta_c")


def _plot_fig6(t, ax, slopes):
    ax.loglog(t["r_zp"], t["n_r"], "o-", ms=3, color="tab:blue", label="n_r")
    ax.loglog(t["r_zp"], t["n_t"], "s-", ms=3, color="tab:red", label="n_t")
    ax.loglog(t["r_zp"], t["n_total"], "--", color="tab:gray", label="n total")
    note = (f"fit n_t ~ r^{slopes['slope_n_t']:.2f} on {slopes['n_t_window']}\n"
            f"fit n_r ~ r^{slopes['slope_n_r']:.2f} on {slopes['n_r_window']}")
    ax.text(0.03, 0.97, note, transform=ax.transAxes, va="top", fontsize=8,
            bbox=dict(boxstyle="round", fc="white", alpha=0.7))
    ax.legend(loc="lower right")


def _plot_fig9(t, axes):
    ax0, ax1 = axes
    for key, color in (("p_r", "tab:red"), ("p_t", "tab:orange"),
                       ("p_at", "tab:green")):
        ax0.plot(t["ratio"], t[f"{key}_eff"], color=color, label=f"{key} effective")
        ax0.plot(t["ratio"], t[f"{key}_full"], "o", ms=3, color=color,
                 label=f"{key} exact")
    ax0.set_ylabel("channel probability")
    ax0.legend(fontsize=7)
    ax1.plot(t["ratio"], t["n_r_eff"], color="tab:red", label="effective")
    ax1.plot(t["ratio"], t["n_r_full"], "o", ms=3, color="tab:blue", label="exact")
    ax1.set_ylabel("n_r")
    ax1.set_xlabel("coupling / atom detuning")
    ax1.legend()


def _plot_fig10(t, ax):
    ax.plot(t["ratio"], t["n_r_eff"], color="tab:blue", label="effective")
    ax.plot(t["ratio"], t["n_r_full"], "o", ms=4, color="tab:red", label="exact")
    ax.set_xscale("log")
    ax.legend()


def _plot_fig11(t, axes):
    ax0, ax1 = axes
    ax0.plot(t["detuning_over_g0"], t["r_zp_set_i"], color="tab:red", label="set I")
    ax0.plot(t["detuning_over_g0"], t["r_zp_set_ii"], "--", color="tab:blue",
             label="set II")
    ax0.set_ylabel("zero-point resolution")
    ax0.legend()
    ax1.plot(t["detuning_over_g0"], t["delta_c_set_i"], color="tab:red")
    ax1.plot(t["detuning_over_g0"], t["delta_c_set_ii"], "--", color="tab:blue")
    ax1.set_ylabel("resonant delta_c")
    ax1.set_xlabel("atom-cavity detuning / g0")


def render(recipe: FigureRecipe) -> Path:
    """Render one figure dataset to PNG; returns the output path."""
    filename, columns = SCHEMAS[recipe.figure_id]
    table = load_table(Path(recipe.data_dir) / filename, columns)
    out_dir = Path(recipe.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{recipe.figure_id}.png"

    fid = recipe.figure_id
    if fid == "fig2":
        fig, ax = _new_axes("Driven-cavity mechanical potentials", "k x",
                            "potential / (kr E0^2 / kappa)")
        _plot_fig2(table, ax)
    elif fid in ("fig3a", "fig3b"):
        fig, ax = _new_axes("Reflection spectrum", "drive detuning delta_c",
                            "p_r")
        _plot_spectrum(table, ax)
    elif fid == "fig4c":
        fig, ax = _new_axes("Scattering vs zero-point resolution",
                            "r_zp", "probability")
        _plot_fig4c(table, ax)
    elif fid == "fig5":
        fig, axes = plt.subplots(3, 1, figsize=(6.4, 7.5), sharex=True,
                                 constrained_layout=True)
        fig.suptitle("Photon statistics from wave-function projection")
        _plot_fig5(table, axes)
    elif fid == "fig6":
        slopes_path = Path(recipe.data_dir) / "fig6_slopes.json"
        if not slopes_path.is_file():
            raise MissingDataset(f"dataset not found: {slopes_path}")
        slopes = json.loads(slopes_path.read_text())
        for key in ("slope_n_t", "slope_n_r", "n_t_window", "n_r_window"):
            if key not in slopes:
                raise SchemaMismatch(f"{slopes_path} lacks {key!r}")
        fig, ax = _new_axes("Added phonons per scattered photon",
                            "r_zp", "phonons")
        _plot_fig6(table, ax, slopes)
    elif fid == "fig9":
        fig, axes = plt.subplots(2, 1, figsize=(6.4, 7.0), sharex=True,
                                 constrained_layout=True)
        fig.suptitle("Effective theory vs exact model: dispersive limit")
        _plot_fig9(table, axes)
    elif fid == "fig10":
        fig, ax = _new_axes("Effective theory vs exact model: sidebands",
                            "omega_m / kappa", "n_r")
        _plot_fig10(table, ax)
    elif fid == "fig11":
        fig, axes = plt.subplots(2, 1, figsize=(6.4, 7.0), sharex=True,
                                 constrained_layout=True)
        fig.suptitle("Tunable-cavity design curves")
        _plot_fig11(table, axes)
    else:
        raise AssertionError("unreachable")

    fig.savefig(out_path, dpi=recipe.dpi)
    plt.close(fig)
    return out_path
