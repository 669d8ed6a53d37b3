"""Render mpcr experiment CSVs as figures.

Reads the delimited tables the mpcr CLI emits and draws them; all numbers are
taken from the file as-is, nothing is recomputed here. Paired figures (1 and
3) overlay the identity line so agreement shows up as points on the diagonal.

Usage: render_figure --id 1 --in theorem1.csv --out fig1.png
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

DPI = 150
IDENTITY_STYLE = dict(color="0.3", linewidth=1.0, linestyle="--", zorder=1)
POINT_STYLE = dict(s=12, alpha=0.75, zorder=2)

# Expected header per figure id; figure A is validated separately since its
# curve count varies with the model dimension.
SCHEMAS = {
    "1": ["replicate", "scaled_Z_1", "limit_1", "scaled_Z_2", "limit_2"],
    "2": ["replicate", "coord1", "coord2"],
    "3": ["replicate", "type", "simulated", "limit"],
}


class SchemaMismatch(Exception):
    """Input CSV header does not match the figure's documented columns."""


@dataclass
class FigureSpec:
    """One rendering job: which figure, from which CSV, to which image."""

    figure_id: str
    input_path: Path
    output_path: Path
    identity_line: bool = True


def read_table(path: Path, figure_id: str) -> dict[str, list[float]]:
    """Load the CSV into float columns after validating the header."""
    if not path.exists():
        raise FileNotFoundError(f"input CSV not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if figure_id == "A":
            if header[:1] != ["x"] or not all(
                c.startswith("G_") for c in header[1:]
            ) or len(header) < 2:
                raise SchemaMismatch(
                    f"{path}: figure A needs columns x, G_1, ... got {header}"
                )
        elif header != SCHEMAS[figure_id]:
            raise SchemaMismatch(
                f"{path}: figure {figure_id} needs columns "
                f"{SCHEMAS[figure_id]}, got {header}"
            )
        columns: dict[str, list[float]] = {name: [] for name in header}
        for row in reader:
            if len(row) != len(header):
                raise SchemaMismatch(f"{path}: ragged row {row}")
            for name, cell in zip(header, row):
                columns[name].append(float(cell))
    if not columns[header[0]]:
        raise SchemaMismatch(f"{path}: no data rows")
    return columns


def _identity_line(ax, xs, ys):
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    pad = 0.03 * (hi - lo) if hi > lo else 0.05
    span = (lo - pad, hi + pad)
    ax.plot(span, span, label="identity", **IDENTITY_STYLE)


def render_curves(columns, fig):
    """Figure A: one curve per correction factor, all starting at height 1."""
    ax = fig.subplots()
    x = columns["x"]
    for name in list(columns)[1:]:
        ax.plot(x, columns[name], linewidth=1.4, label=name.replace("_", ""))
    ax.set_xlabel("x")
    ax.set_ylabel("G(x)")
    ax.set_ylim(0.0, 1.05)
    ax.legend(frameon=False, fontsize=8, ncols=2)


def render_paired_two_types(columns, fig, identity):
    """Figure 1: simulated scaled counts against their limits, one panel per type."""
    axes = fig.subplots(1, 2)
    panels = [("limit_1", "scaled_Z_1", "type 1"), ("limit_2", "scaled_Z_2", "type 2")]
    for ax, (cx, cy, title) in zip(axes, panels):
        ax.scatter(columns[cx], columns[cy], **POINT_STYLE)
        if identity:
            _identity_line(ax, columns[cx], columns[cy])
        ax.set_xlabel("limit")
        ax.set_ylabel("simulated")
        ax.set_title(title, fontsize=10)


def render_joint(columns, fig):
    """Figure 2: joint scatter of the two limit coordinates."""
    ax = fig.subplots()
    ax.scatter(columns["coord1"], columns["coord2"], **POINT_STYLE)
    ax.set_xlabel("coordinate 1")
    ax.set_ylabel("coordinate 2")


def render_paired_clusters(columns, fig, identity):
    """Figure 3: per-type clusters of simulated densities against limits."""
    ax = fig.subplots()
    types = sorted(set(columns["type"]))
    for t in types:
        xs = [x for x, tt in zip(columns["limit"], columns["type"]) if tt == t]
        ys = [y for y, tt in zip(columns["simulated"], columns["type"]) if tt == t]
        ax.scatter(xs, ys, label=f"type {int(t)}", **POINT_STYLE)
    if identity:
        _identity_line(ax, columns["limit"], columns["simulated"])
    ax.set_xlabel("limit")
    ax.set_ylabel("simulated")
    ax.legend(frameon=False, fontsize=8)


def render(spec: FigureSpec):
    """Render one figure to file; returns the matplotlib figure."""
    if spec.figure_id not in ("A", "1", "2", "3"):
        raise SchemaMismatch(f"unknown figure id {spec.figure_id!r}")
    columns = read_table(spec.input_path, spec.figure_id)
    wide = spec.figure_id == "1"
    fig = plt.figure(figsize=(9.0, 4.0) if wide else (5.0, 4.0))
    if spec.figure_id == "A":
        render_curves(columns, fig)
    elif spec.figure_id == "1":
        render_paired_two_types(columns, fig, spec.identity_line)
    elif spec.figure_id == "2":
        render_joint(columns, fig)
    else:
        render_paired_clusters(columns, fig, spec.identity_line)
    fig.tight_layout()
    spec.output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output_path, dpi=DPI)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figure", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--id", required=True, choices=("A", "1", "2", "3"))
    parser.add_argument("--in", dest="input_path", required=True)
    parser.add_argument("--out", dest="output_path", required=True)
    parser.add_argument(
        "--no-identity", action="store_true",
        help="suppress the identity line on paired figures",
    )
    args = parser.parse_args(argv)
    spec = FigureSpec(
        figure_id=args.id,
        input_path=Path(args.input_path),
        output_path=Path(args.output_path),
        identity_line=not args.no_identity,
    )
    try:
        fig = render(spec)
        plt.close(fig)
    except (SchemaMismatch, FileNotFoundError) as exc:
        print(f"render_figure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
