#!/usr/bin/env python3
"""Render figures from the scenario runner's CSV outputs.

Usage::

    python3 plots/render.py --kind <kind> --in <csv> [<csv> ...] --out <img>

Each figure kind consumes one of the CSV schemas written by the
``crossres`` command line tool and never recomputes any physics; the
image is a pure function of the input bytes and the style options, so a
byte-identical CSV renders to a visually identical figure. Axes are
labeled with the units carried by the column names (GHz, MHz, kHz, ns).
The outputs format follows the output path's extension (png, pdf, svg).

Kinds and the columns they require:

``landscape``
    ``target_GHz``, ``zz_kHz``, ``jxy_MHz`` and exactly one swept knob
    (``resonator_GHz``, ``direct_MHz``, or ``g_rq_MHz``) forming a 2D
    grid. Filled contours of the ZZ magnitude on a logarithmic color
    scale (symmetric-log of the signed value with ``--signed``) under
    dashed, labeled contours of the exchange strength.
``cuts``
    One swept axis (first column) plus ``zz_kHz`` and ``jxy_MHz``;
    perturbative companion columns overlay as dashed lines. Several
    input files overlay with one color each.
``error_length``
    ``t_g_ns`` and ``error``, optionally ``leakage`` and a grouping
    column (``coupler`` or ``control``/``target``). Error on a log
    axis versus gate length, leakage dotted.
``violin``
    Either ensemble columns ``zz_*_kHz`` (one violin per qubit pair) or
    repeated ``error`` values per ``t_g_ns`` (one violin per length).
    Distributions are shown in log10; a dashed line tracks the medians.
``spectrum``
    ``amplitude_MHz``, ``level_index``, ``energy_MHz``, optionally
    ``label`` (colors levels by total excitation) and ``carrier_GHz``.
``scatter``
    Any two numeric columns via ``--x``/``--y``; without them, sweeps
    with ``amplitude_MHz`` and ``error`` columns plot error versus
    amplitude, colored by ``shift_MHz`` when present.

Exit codes: 0 on success, 2 when the CSV schema does not match the kind
(the message lists the missing and the found columns), 3 when the file
has no usable data rows (an empty CSV renders nothing, gracefully).
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import colors

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_DATA = 3

PLOT_KINDS = ("landscape", "cuts", "error_length", "violin", "spectrum", "scatter")

# one figure style for every kind, so reruns are visually identical
_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.axisbelow": True,
    "lines.linewidth": 1.4,
    "legend.framealpha": 0.9,
    "svg.hashsalt": "crossres-plots",
}

_UNIT_SUFFIXES = ("GHz", "MHz", "kHz", "ns")
_LANDSCAPE_KNOBS = ("resonator_GHz", "direct_MHz", "g_rq_MHz")


class RenderError(Exception):
    """Anything that should abort the render with a message, not a trace."""

    def __init__(self, message: str, exit_code: int) -> None:
        super().__init__(message)
        self.exit_code = exit_code


def schema_error(message: str) -> RenderError:
    return RenderError(message, EXIT_SCHEMA)


def data_error(message: str) -> RenderError:
    return RenderError(message, EXIT_DATA)


@dataclass(frozen=True)
class PlotJob:
    """One render: input CSVs, a figure kind, style options, output path."""

    kind: str
    inputs: Tuple[Path, ...]
    output: Path
    title: Optional[str] = None
    x: Optional[str] = None
    y: Optional[str] = None
    signed: bool = False
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {PLOT_KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.dpi < 10:
            raise ValueError(f"dpi must be at least 10, got {self.dpi}")


@dataclass(frozen=True)
class Table:
    """One parsed CSV: column names in file order, rows as strings."""

    source: Path
    columns: Tuple[str, ...]
    rows: Tuple[Dict[str, str], ...]

    @property
    def name(self) -> str:
        return self.source.stem

    def column(self, name: str) -> np.ndarray:
        """Numeric column; raises a schema error on non-numeric cells."""
        try:
            return np.array([float(row[name]) for row in self.rows])
        except ValueError:
            raise schema_error(
                f"{self.source}: column {name!r} is not numeric"
            ) from None

    def strings(self, name: str) -> List[str]:
        return [row[name] for row in self.rows]


def read_table(path: Path) -> Table:
    """Parse one CSV, skipping the ``# manifest`` comment header."""
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise data_error(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(line for line in handle if not line.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise data_error(f"{path}: empty CSV, nothing to render") from None
        rows = [dict(zip(header, row)) for row in reader if row]
    if not rows:
        raise data_error(f"{path}: no data rows, nothing to render")
    return Table(source=path, columns=tuple(header), rows=tuple(rows))


def require_columns(table: Table, required: Sequence[str], kind: str) -> None:
    missing = [c for c in required if c not in table.columns]
    if missing:
        raise schema_error(
            f"{table.source}: kind {kind!r} expects columns {sorted(required)}; "
            f"missing {sorted(missing)}; found {list(table.columns)}"
        )


def axis_label(column: str) -> str:
    """Human axis label with the unit taken from the column name."""
    for suffix in _UNIT_SUFFIXES:
        if column.endswith("_" + suffix):
            stem = column[: -len(suffix) - 1].replace("_", " ")
            return f"{stem} ({suffix})"
    if column == "error":
        return "gate error"
    if column == "leakage":
        return "leakage"
    return column.replace("_", " ")


def _log_floor(values: np.ndarray) -> float:
    """Smallest positive magnitude, for log-scale floors."""
    magnitudes = np.abs(values)
    positive = magnitudes[magnitudes > 0]
    if positive.size == 0:
        raise data_error("all values are zero; nothing to show on a log scale")
    return float(positive.min())


def _new_axes(job: PlotJob) -> Tuple[plt.Figure, plt.Axes]:
    fig, ax = plt.subplots()
    if job.title:
        ax.set_title(job.title)
    return fig, ax


# --------------------------------------------------------------------------
# landscape


def _draw_landscape(job: PlotJob, table: Table) -> plt.Figure:
    require_columns(table, ("target_GHz", "zz_kHz", "jxy_MHz"), job.kind)
    knobs = [k for k in _LANDSCAPE_KNOBS if k in table.columns]
    if len(knobs) != 1:
        raise schema_error(
            f"{table.source}: kind 'landscape' expects exactly one knob column of "
            f"{list(_LANDSCAPE_KNOBS)}; found {knobs or 'none'} in {list(table.columns)}"
        )
    knob = knobs[0]
    xs = np.unique(table.column(knob))
    ys = np.unique(table.column("target_GHz"))
    if xs.size < 2 or ys.size < 2:
        raise data_error(
            f"{table.source}: landscape needs a 2D grid, got {xs.size} x {ys.size}; "
            "render a single sweep with --kind cuts"
        )
    zz = np.full((ys.size, xs.size), np.nan)
    jxy = np.full((ys.size, xs.size), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for row in table.rows:
        i = yi[float(row["target_GHz"])]
        j = xi[float(row[knob])]
        zz[i, j] = float(row["zz_kHz"])
        jxy[i, j] = float(row["jxy_MHz"])

    fig, ax = _new_axes(job)
    finite = zz[np.isfinite(zz)]
    if finite.size == 0:
        raise data_error(f"{table.source}: no finite ZZ values")
    floor = max(_log_floor(finite), 1e-3 * float(np.nanmax(np.abs(zz))))
    if job.signed:
        bound = float(np.nanmax(np.abs(zz)))
        norm: colors.Normalize = colors.SymLogNorm(
            linthresh=floor, vmin=-bound, vmax=bound
        )
        levels = np.concatenate([
            -np.geomspace(bound, floor, 12), [0.0], np.geomspace(floor, bound, 12)
        ])
        cmap = "RdBu_r"
    else:
        zz = np.abs(zz)
        bound = float(np.nanmax(zz))
        norm = colors.LogNorm(vmin=floor, vmax=bound)
        levels = np.geomspace(floor, bound, 24)
        zz = np.clip(zz, floor, None)
        cmap = "viridis"
    filled = ax.contourf(xs, ys, zz, levels=levels, norm=norm, cmap=cmap)
    bar = fig.colorbar(filled, ax=ax)
    bar.set_label("static ZZ (kHz)" if job.signed else "|static ZZ| (kHz)")

    overlay = np.abs(jxy)
    top = float(np.nanmax(overlay))
    if np.isfinite(top) and top > 0:
        j_levels = [lv for lv in (0.5, 1.0, 2.0, 3.0, 5.0, 10.0) if lv < top]
        if j_levels:
            dashed = ax.contour(
                xs, ys, overlay, levels=j_levels,
                colors="white" if not job.signed else "black",
                linestyles="dashed", linewidths=1.2,
            )
            ax.clabel(dashed, fmt=lambda v: f"{v:g} MHz", fontsize=8)
    ax.set_xlabel(axis_label(knob))
    ax.set_ylabel(axis_label("target_GHz"))
    return fig


# --------------------------------------------------------------------------
# cuts


def _draw_cuts(job: PlotJob, tables: Sequence[Table]) -> plt.Figure:
    fig, (ax_j, ax_zz) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.6))
    if job.title:
        ax_j.set_title(job.title)
    axis_column = None
    for index, table in enumerate(tables):
        require_columns(table, ("zz_kHz", "jxy_MHz"), job.kind)
        axis = table.columns[0]
        if axis in ("zz_kHz", "jxy_MHz"):
            raise schema_error(
                f"{table.source}: kind 'cuts' expects the swept axis as the first "
                f"column; found {list(table.columns)}"
            )
        if axis_column is None:
            axis_column = axis
        elif axis != axis_column:
            raise schema_error(
                f"{table.source}: axis column {axis!r} differs from "
                f"{axis_column!r} in the first input"
            )
        x = table.column(axis)
        color = f"C{index}"
        stem = table.name if len(tables) > 1 else None

        def put(ax: plt.Axes, column: str, style: str, tag: str) -> None:
            if column not in table.columns:
                return
            y = np.abs(table.column(column))
            label = f"{stem}: {tag}" if stem else tag
            ax.plot(x, y, style, color=color, label=label)

        put(ax_j, "jxy_MHz", "-", "numeric")
        put(ax_j, "jxy_perturbative_MHz", "--", "perturbative")
        put(ax_zz, "zz_kHz", "-", "numeric")
        put(ax_zz, "zz_perturbative_kHz", "--", "perturbative")

    ax_j.set_ylabel("|exchange J| (MHz)")
    ax_zz.set_yscale("log")
    ax_zz.set_ylabel("|static ZZ| (kHz)")
    ax_zz.set_xlabel(axis_label(axis_column))
    ax_j.legend(fontsize=8)
    return fig


# --------------------------------------------------------------------------
# error versus gate length


def _series_key(table: Table, row: Dict[str, str], many: bool) -> str:
    parts = []
    if many:
        parts.append(table.name)
    if "coupler" in table.columns:
        parts.append(row["coupler"])
    if "control" in table.columns and "target" in table.columns:
        parts.append(f"{row['control']}>{row['target']}")
    return " ".join(parts) or "gate"


def _draw_error_length(job: PlotJob, tables: Sequence[Table]) -> plt.Figure:
    fig, ax = _new_axes(job)
    series: Dict[str, Dict[str, List[float]]] = {}
    order: List[str] = []
    for table in tables:
        require_columns(table, ("t_g_ns", "error"), job.kind)
        has_leak = "leakage" in table.columns
        for row in table.rows:
            key = _series_key(table, row, len(tables) > 1)
            bucket = series.setdefault(key, {"t": [], "err": [], "leak": []})
            if key not in order:
                order.append(key)
            bucket["t"].append(float(row["t_g_ns"]))
            bucket["err"].append(float(row["error"]))
            if has_leak:
                bucket["leak"].append(float(row["leakage"]))
    for index, key in enumerate(order):
        bucket = series[key]
        sort = np.argsort(bucket["t"])
        t = np.asarray(bucket["t"])[sort]
        color = f"C{index}"
        ax.plot(t, np.asarray(bucket["err"])[sort], "o-", color=color, label=key)
        if bucket["leak"]:
            ax.plot(
                t, np.asarray(bucket["leak"])[sort], "s:", color=color,
                alpha=0.7, label=f"{key} leakage",
            )
    ax.set_yscale("log")
    ax.set_xlabel(axis_label("t_g_ns").replace("t g", "gate length"))
    ax.set_ylabel("gate error / leakage")
    ax.legend(fontsize=8)
    return fig


# --------------------------------------------------------------------------
# violin


_ZZ_COLUMN = re.compile(r"^zz_(.+)_kHz$")


def _violin_groups(table: Table) -> Tuple[str, List[str], List[np.ndarray], str]:
    """(x label, group names, group values in log10, value label)."""
    zz_columns = [c for c in table.columns if _ZZ_COLUMN.match(c)]
    if zz_columns:
        names = [_ZZ_COLUMN.match(c).group(1).replace("_", "-") for c in zz_columns]
        groups = [np.abs(table.column(c)) for c in zz_columns]
        return "qubit pair", names, groups, "|static ZZ| (kHz)"
    if "t_g_ns" in table.columns and "error" in table.columns:
        lengths = table.column("t_g_ns")
        errors = table.column("error")
        names = [f"{v:g}" for v in np.unique(lengths)]
        groups = [errors[lengths == v] for v in np.unique(lengths)]
        return "gate length (ns)", names, groups, "gate error"
    raise schema_error(
        f"{table.source}: kind 'violin' expects ensemble columns 'zz_*_kHz' or "
        f"repeated ('t_g_ns', 'error') rows; found {list(table.columns)}"
    )


def _draw_violin(job: PlotJob, table: Table) -> plt.Figure:
    x_label, names, groups, value_label = _violin_groups(table)
    floor = _log_floor(np.concatenate(groups))
    logged = [np.log10(np.clip(g, floor, None)) for g in groups]
    if any(g.size < 2 for g in logged):
        raise data_error(
            f"{table.source}: every violin group needs at least two values"
        )
    fig, ax = _new_axes(job)
    positions = np.arange(1, len(names) + 1)
    ax.violinplot(logged, positions=positions, showextrema=True)
    medians = [float(np.median(g)) for g in logged]
    ax.plot(positions, medians, "k--", marker="o", markersize=3, label="median")
    ax.set_xticks(positions)
    ax.set_xticklabels(names, rotation=30 if max(map(len, names)) > 6 else 0)
    ax.set_xlabel(x_label)
    span = range(
        int(math.floor(min(float(g.min()) for g in logged))),
        int(math.ceil(max(float(g.max()) for g in logged))) + 1,
    )
    ax.set_yticks(list(span))
    ax.set_yticklabels([f"$10^{{{k}}}$" for k in span])
    ax.set_ylabel(value_label)
    ax.legend(fontsize=8)
    return fig


# --------------------------------------------------------------------------
# spectrum


def _draw_spectrum(job: PlotJob, table: Table) -> plt.Figure:
    require_columns(table, ("amplitude_MHz", "level_index", "energy_MHz"), job.kind)
    amplitude = table.column("amplitude_MHz")
    level = table.column("level_index").astype(int)
    energy = table.column("energy_MHz")
    labels = table.strings("label") if "label" in table.columns else None

    fig, ax = _new_axes(job)
    cmap = plt.get_cmap("viridis")
    max_excitation = 1
    if labels is not None:
        totals = {}
        for lv, text in zip(level, labels):
            totals.setdefault(int(lv), sum(int(ch) for ch in text if ch.isdigit()))
        max_excitation = max(max(totals.values()), 1)
    seen = set()
    for lv in np.unique(level):
        mask = level == lv
        sort = np.argsort(amplitude[mask])
        if labels is not None:
            n = totals[int(lv)]
            color = cmap(n / max_excitation)
            tag = f"{n} excitations" if n not in seen else None
            seen.add(n)
        else:
            color, tag = "C0", None
        ax.plot(
            amplitude[mask][sort], energy[mask][sort],
            color=color, linewidth=0.8, label=tag,
        )
    if labels is not None and len(seen) <= 8:
        ax.legend(fontsize=7, loc="upper right")
    ax.set_xlabel("drive amplitude (MHz)")
    ax.set_ylabel("dressed energy (MHz)")
    if "carrier_GHz" in table.columns:
        carriers = np.unique(table.column("carrier_GHz"))
        if carriers.size == 1 and not job.title:
            ax.set_title(f"carrier {carriers[0]:.6f} GHz")
    return fig


# --------------------------------------------------------------------------
# scatter


def _scatter_axes(job: PlotJob, table: Table) -> Tuple[str, str]:
    if (job.x is None) != (job.y is None):
        raise schema_error("scatter: --x and --y must be given together")
    if job.x is not None:
        require_columns(table, (job.x, job.y), job.kind)
        return job.x, job.y
    if "amplitude_MHz" in table.columns and "error" in table.columns:
        return "amplitude_MHz", "error"
    numeric = [c for c in table.columns if _is_numeric(table, c)]
    raise schema_error(
        f"{table.source}: kind 'scatter' needs --x and --y (numeric columns: "
        f"{numeric}); only sweeps with 'amplitude_MHz' and 'error' have a default"
    )


def _is_numeric(table: Table, column: str) -> bool:
    try:
        float(table.rows[0][column])
        return True
    except (ValueError, KeyError):
        return False


def _draw_scatter(job: PlotJob, tables: Sequence[Table]) -> plt.Figure:
    fig, ax = _new_axes(job)
    x_col, y_col = _scatter_axes(job, tables[0])
    mappable = None
    for index, table in enumerate(tables):
        require_columns(table, (x_col, y_col), job.kind)
        x = table.column(x_col)
        y = table.column(y_col)
        label = table.name if len(tables) > 1 else None
        if len(tables) == 1 and "shift_MHz" in table.columns and x_col != "shift_MHz":
            mappable = ax.scatter(
                x, y, c=table.column("shift_MHz"), cmap="coolwarm", label=label
            )
        else:
            ax.scatter(x, y, color=f"C{index}", label=label)
    if mappable is not None:
        fig.colorbar(mappable, ax=ax).set_label(axis_label("shift_MHz"))
    all_y = np.concatenate([t.column(y_col) for t in tables])
    positive = all_y[all_y > 0]
    if positive.size == all_y.size and positive.max() / positive.min() > 100.0:
        ax.set_yscale("log")
    ax.set_xlabel(axis_label(x_col))
    ax.set_ylabel(axis_label(y_col))
    if len(tables) > 1:
        ax.legend(fontsize=8)
    return fig


# --------------------------------------------------------------------------
# driver


_SINGLE_INPUT_KINDS = ("landscape", "violin", "spectrum")


def render(job: PlotJob) -> Path:
    """Render one job to its output image; returns the written path."""
    if job.kind in _SINGLE_INPUT_KINDS and len(job.inputs) != 1:
        raise schema_error(f"kind {job.kind!r} takes exactly one input CSV")
    tables = [read_table(path) for path in job.inputs]
    plt.rcdefaults()
    plt.rcParams.update(_STYLE)
    try:
        if job.kind == "landscape":
            fig = _draw_landscape(job, tables[0])
        elif job.kind == "cuts":
            fig = _draw_cuts(job, tables)
        elif job.kind == "error_length":
            fig = _draw_error_length(job, tables)
        elif job.kind == "violin":
            fig = _draw_violin(job, tables[0])
        elif job.kind == "spectrum":
            fig = _draw_spectrum(job, tables[0])
        else:
            fig = _draw_scatter(job, tables)
        fig.tight_layout()
        job.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(job.output, dpi=job.dpi, metadata=_stable_metadata(job.output))
    finally:
        plt.close("all")
    return job.output


def _stable_metadata(output: Path) -> Optional[Dict[str, str]]:
    """Strip timestamps so identical inputs give identical bytes."""
    suffix = output.suffix.lower()
    if suffix == ".png":
        return {"Software": "crossres-plots"}
    if suffix == ".pdf":
        return {"CreationDate": None, "Producer": "crossres-plots"}
    if suffix == ".svg":
        return {"Date": None}
    return None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from scenario CSV output.",
    )
    parser.add_argument("--kind", required=True, choices=PLOT_KINDS)
    parser.add_argument(
        "--in", dest="inputs", required=True, nargs="+", metavar="CSV",
        help="input CSV file(s); overlay kinds accept several",
    )
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    parser.add_argument("--title", default=None, help="figure title")
    parser.add_argument("--x", default=None, help="scatter: x column")
    parser.add_argument("--y", default=None, help="scatter: y column")
    parser.add_argument(
        "--signed", action="store_true",
        help="landscape: color the signed ZZ on a symmetric-log scale",
    )
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        job = PlotJob(
            kind=args.kind,
            inputs=tuple(Path(p) for p in args.inputs),
            output=Path(args.out),
            title=args.title,
            x=args.x,
            y=args.y,
            signed=args.signed,
            dpi=args.dpi,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        written = render(job)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"wrote {written}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
