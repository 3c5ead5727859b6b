"""Render the four standard figures from bs-spectra CSV files.

    render --fig {contour|spectrum|eigfun|zoom} --in CSV[,CSV] --out PNG

contour   symbol grid CSV `q,p,value`  -> level-set contour plot
spectrum  spectrum CSV `k,j,lambda,residual` -> ordered-eigenvalue staircase
eigfun    field CSV + symbol grid CSV -> modulus heatmap with the level-set
          polyline overlaid (marching squares; pass --level or keep an
          `eigfun_summary.json` next to the field CSV)
zoom      verify CSV `k,j,lambda,E_pred,residual,gap_ratio` -> computed
          eigenvalues as red squares vs predictions as blue diamonds

Rendering is a pure function of the CSV rows: fixed geometry, fixed colors,
no timestamps, so identical inputs give byte-identical PNGs.  Exit codes:
0 success, 1 schema mismatch (message names the offending column), 2 usage
or I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXIT_OK = 0
EXIT_SCHEMA = 1
EXIT_USAGE = 2

FIGSIZE = (6.0, 4.5)
DPI = 150
FIELD_SCHEMA = ("q", "p", "value")
SPECTRUM_SCHEMA = ("k", "j", "lambda", "residual")
VERIFY_SCHEMA = ("k", "j", "lambda", "E_pred", "residual", "gap_ratio")


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    figure: str                  # contour | spectrum | eigfun | zoom
    inputs: tuple
    output: str
    level: float | None = None   # eigfun overlay level


@dataclass(frozen=True)
class RenderResult:
    output: str
    points: int                  # data points drawn (both series for zoom)


def read_csv(path, schema):
    """Parse a headered CSV against the expected column tuple."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"input CSV not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        columns = tuple(header.split(",")) if header else ()
        for pos, expected in enumerate(schema):
            found = columns[pos] if pos < len(columns) else "<missing>"
            if found != expected:
                raise SchemaError(
                    f"schema mismatch in {path}: expected column {pos + 1} "
                    f"{expected!r}, found {found!r}"
                )
        if len(columns) != len(schema):
            raise SchemaError(
                f"schema mismatch in {path}: unexpected extra column {columns[len(schema)]!r}"
            )
        rows = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(schema):
                raise SchemaError(f"{path}:{line_no}: expected {len(schema)} fields")
            rows.append([float(x) for x in parts])
    return np.array(rows) if rows else np.zeros((0, len(schema)))


def field_to_grid(rows):
    """Row-major `q,p,value` records back to a (res, res) value grid."""
    if len(rows) == 0:
        return np.zeros((0, 0))
    res = int(round(math.sqrt(len(rows))))
    if res * res != len(rows):
        raise SchemaError(f"field CSV is not a square grid ({len(rows)} rows)")
    return rows[:, 2].reshape(res, res)


def marching_squares(grid, level):
    """Level-set segments of a periodic grid by linear edge interpolation.

    Returns an array of segments (n, 2, 2) in (q, p) coordinates.
    """
    res = grid.shape[0]
    if res == 0:
        return np.zeros((0, 2, 2))
    h = 1.0 / res
    s00 = grid - level
    s10 = np.roll(s00, -1, axis=0)
    s01 = np.roll(s00, -1, axis=1)
    s11 = np.roll(s10, -1, axis=1)
    segments = []
    for i in range(res):
        for j in range(res):
            corners = (s00[i, j], s10[i, j], s11[i, j], s01[i, j])
            below = [c <= 0 for c in corners]
            if all(below) or not any(below):
                continue
            # edge order: bottom (00-10), right (10-11), top (01-11), left (00-01)
            q0, p0 = i * h, j * h
            crossings = []
            edges = (
                (corners[0], corners[1], (q0, p0), (q0 + h, p0)),
                (corners[1], corners[2], (q0 + h, p0), (q0 + h, p0 + h)),
                (corners[3], corners[2], (q0, p0 + h), (q0 + h, p0 + h)),
                (corners[0], corners[3], (q0, p0), (q0, p0 + h)),
            )
            for sa, sb, pa, pb in edges:
                if (sa <= 0) != (sb <= 0):
                    t = sa / (sa - sb)
                    crossings.append(
                        (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))
                    )
            # pair crossings; ambiguous saddles resolved by the corner mean
            if len(crossings) == 2:
                segments.append(crossings)
            elif len(crossings) == 4:
                center_below = sum(corners) / 4.0 <= 0
                if (corners[0] <= 0) == center_below:
                    segments.append([crossings[0], crossings[1]])
                    segments.append([crossings[2], crossings[3]])
                else:
                    segments.append([crossings[0], crossings[3]])
                    segments.append([crossings[1], crossings[2]])
    return np.array(segments) if segments else np.zeros((0, 2, 2))


def _new_axes():
    fig = plt.figure(figsize=FIGSIZE, dpi=DPI)
    return fig, fig.add_subplot(111)


def _save(fig, path):
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def _render_contour(spec):
    grid = field_to_grid(read_csv(spec.inputs[0], FIELD_SCHEMA))
    fig, ax = _new_axes()
    points = grid.size
    if points and float(grid.max()) > float(grid.min()):
        res = grid.shape[0]
        axis = np.arange(res) / res
        levels = np.linspace(float(grid.min()), float(grid.max()), 13)[1:-1]
        cs = ax.contour(axis, axis, grid.T, levels=levels, cmap="viridis")
        fig.colorbar(cs, ax=ax)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title("symbol level sets")
    ax.set_aspect("equal")
    _save(fig, spec.output)
    return RenderResult(spec.output, points)


def _render_spectrum(spec):
    rows = read_csv(spec.inputs[0], SPECTRUM_SCHEMA)
    fig, ax = _new_axes()
    if len(rows):
        ax.plot(rows[:, 1], rows[:, 2], color="#1f3f8f", marker=".",
                markersize=3, linewidth=0.8)
    ax.set_xlabel("j")
    ax.set_ylabel("eigenvalue")
    ax.set_title("ordered eigenvalues")
    _save(fig, spec.output)
    return RenderResult(spec.output, len(rows))


def _resolve_level(spec):
    if spec.level is not None:
        return spec.level
    sidecar = os.path.join(os.path.dirname(os.path.abspath(spec.inputs[0])),
                           "eigfun_summary.json")
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            return float(json.load(fh)["level"])
    raise SchemaError("eigfun overlay level unknown: pass --level or keep "
                      "eigfun_summary.json next to the field CSV")


def _render_eigfun(spec):
    if len(spec.inputs) != 2:
        raise SchemaError("eigfun needs two inputs: field CSV,symbol CSV")
    field = field_to_grid(read_csv(spec.inputs[0], FIELD_SCHEMA))
    symbol = field_to_grid(read_csv(spec.inputs[1], FIELD_SCHEMA))
    fig, ax = _new_axes()
    points = field.size
    if points:
        ax.imshow(field.T, origin="lower", extent=(0, 1, 0, 1), cmap="magma")
        level = _resolve_level(spec)
        segments = marching_squares(symbol, level)
        for (qa, pa), (qb, pb) in segments:
            ax.plot([qa, qb], [pa, pb], color="#00e5ff", linewidth=1.0)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title("eigenfunction modulus")
    ax.set_aspect("equal")
    _save(fig, spec.output)
    return RenderResult(spec.output, points)


def _render_zoom(spec):
    rows = read_csv(spec.inputs[0], VERIFY_SCHEMA)
    fig, ax = _new_axes()
    if len(rows):
        ax.plot(rows[:, 1], rows[:, 2], linestyle="none", marker="s",
                color="#c62828", markersize=6, fillstyle="none", label="computed")
        ax.plot(rows[:, 1], rows[:, 3], linestyle="none", marker="D",
                color="#1565c0", markersize=5, fillstyle="none", label="predicted")
        ax.legend(loc="upper left")
    ax.set_xlabel("j")
    ax.set_ylabel("energy")
    ax.set_title("low eigenvalues: computed vs predicted")
    _save(fig, spec.output)
    return RenderResult(spec.output, 2 * len(rows))


_RENDERERS = {
    "contour": _render_contour,
    "spectrum": _render_spectrum,
    "eigfun": _render_eigfun,
    "zoom": _render_zoom,
}


def render(spec: FigureSpec) -> RenderResult:
    if spec.figure not in _RENDERERS:
        raise ValueError(f"unknown figure id {spec.figure!r}")
    return _RENDERERS[spec.figure](spec)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="render", description=__doc__)
    parser.add_argument("--fig", required=True, choices=sorted(_RENDERERS))
    parser.add_argument("--in", dest="inputs", required=True,
                        help="input CSV (comma-separated pair for eigfun)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--level", type=float, default=None,
                        help="overlay level for the eigfun figure")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        figure=args.fig,
        inputs=tuple(args.inputs.split(",")),
        output=args.out,
        level=args.level,
    )
    try:
        result = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"wrote {result.output} ({result.points} points)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
