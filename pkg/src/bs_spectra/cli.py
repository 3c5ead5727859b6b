"""Command-line front door: spectra, verification reports, fields, decay sweeps.

Commands
--------
spectrum   build the operator and write `k,j,lambda,residual`
verify     full pipeline (profile -> predict -> verify) + JSON summary
eigfun     eigenfunction modulus field + symbol grid (CSV `q,p,value`)
sweep      per-j residual decay exponents across a k list

Exit codes: 0 success, 1 contract/tolerance failure, 2 usage or I/O error.
All CSV output uses 17 significant digits, fixed row order, trailing newline;
identical configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import bohr_sommerfeld as bs
from . import spectral, symbols, theta_sections, torus_quant

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class RunConfig:
    """Validated command inputs shared by all subcommands."""

    symbol_path: str
    out_dir: str
    k: int | None = None
    k_list: tuple | None = None
    e_cap: float | None = None
    resolution: int = 1024
    grid_size: int = 200


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _k_list(text):
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from exc
    if len(values) < 3 or any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("k list must be ascending with at least 3 entries")
    return values


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_symbol_or_exit(path):
    if not os.path.exists(path):
        print(f"error: symbol file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    return symbols.load_symbol(path)


def _field_csv_text(field):
    res = np.asarray(field).shape[0]
    lines = ["q,p,value"]
    for i in range(res):
        for j in range(res):
            lines.append(f"{i / res:.17g},{j / res:.17g},{field[i, j]:.17g}")
    return "\n".join(lines) + "\n"


# ── subcommands ───────────────────────────────────────────────────────


def cmd_spectrum(args):
    sym = _load_symbol_or_exit(args.symbol)
    params = torus_quant.QuantumTorusParams(args.k)
    op = torus_quant.weyl_quantize(sym, params)
    result = spectral.eigh(op, want_vectors=False)
    os.makedirs(args.out, exist_ok=True)
    lines = ["k,j,lambda,residual"]
    for j, (lam, res) in enumerate(zip(result.eigenvalues, result.residuals)):
        lines.append(f"{args.k},{j},{lam:.17g},{res:.17g}")
    _atomic_write(os.path.join(args.out, "spectrum.csv"), "\n".join(lines) + "\n")
    if args.dump_operator:
        torus_quant.dump_operator_csv(op, os.path.join(args.out, "operator.csv"))
    return EXIT_OK


def cmd_verify(args):
    sym = _load_symbol_or_exit(args.symbol)
    params = torus_quant.QuantumTorusParams(args.k)
    op = torus_quant.weyl_quantize(sym, params)
    spectrum = spectral.eigh(op, want_vectors=False)
    profile = bs.build_action_profile(
        sym,
        e_cap=args.e_cap,
        grid_size=args.grid_size,
        resolution=args.resolution,
    )
    predictions = bs.predict(profile, args.k)
    count_levels = tuple(args.count_level) if args.count_level else (profile.E_cap,)
    report = bs.verify(spectrum, predictions, profile.E_cap, count_levels=count_levels)

    lam = spectrum.eigenvalues
    window_lo = profile.E_min
    window_hi = profile.E_min + 20.0 * math.pi / args.k
    window_count = int(np.sum((lam >= window_lo) & (lam <= window_hi)))

    os.makedirs(args.out, exist_ok=True)
    lines = ["k,j,lambda,E_pred,residual,gap_ratio"]
    for r in report.rows:
        lines.append(
            f"{report.k},{r.j},{r.lam:.17g},{r.e_pred:.17g},"
            f"{r.residual:.17g},{r.gap_ratio:.17g}"
        )
    _atomic_write(os.path.join(args.out, "verify.csv"), "\n".join(lines) + "\n")

    def _nan_to_none(x):
        return None if not math.isfinite(x) else x

    summary = {
        "k": report.k,
        "e_cap": report.e_cap,
        "rows": len(report.rows),
        "gap_ratio": {
            "mean": _nan_to_none(report.gap_ratio_mean),
            "min": _nan_to_none(report.gap_ratio_min),
            "max": _nan_to_none(report.gap_ratio_max),
        },
        "window": {"lo": window_lo, "hi": window_hi, "count": window_count},
        "counting": [
            {"level": c.level, "count": c.count, "weyl": c.weyl, "defect": c.defect}
            for c in report.counts
        ],
    }
    _atomic_write(
        os.path.join(args.out, "verify_summary.json"),
        json.dumps(summary, indent=2, sort_keys=True) + "\n",
    )
    return EXIT_OK


def cmd_eigfun(args):
    sym = _load_symbol_or_exit(args.symbol)
    if args.level is not None:
        e_level = args.level
    else:
        q0, p0 = args.level_point
        e_level = sym.value(q0, p0)
    params = torus_quant.QuantumTorusParams(args.k)
    op = torus_quant.weyl_quantize(sym, params)
    spectrum = spectral.eigh(op, want_vectors=True)
    idx = int(np.argmin(np.abs(spectrum.eigenvalues - e_level)))
    field = theta_sections.eigenfunction_field(
        args.k, spectrum.eigenvectors[:, idx], resolution=args.resolution
    )
    axis = np.arange(args.resolution) / args.resolution
    symbol_grid = sym._grid_on(axis, axis)
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(os.path.join(args.out, "eigfun.csv"), _field_csv_text(field))
    _atomic_write(os.path.join(args.out, "symbol.csv"), _field_csv_text(symbol_grid))
    summary = {
        "k": args.k,
        "level": e_level,
        "eig_index": idx,
        "lambda": float(spectrum.eigenvalues[idx]),
    }
    _atomic_write(
        os.path.join(args.out, "eigfun_summary.json"),
        json.dumps(summary, indent=2, sort_keys=True) + "\n",
    )
    return EXIT_OK


def cmd_sweep(args):
    sym = _load_symbol_or_exit(args.symbol)
    profile = None
    if args.full_predictor:
        profile = bs.build_action_profile(
            sym, e_cap=args.e_cap, grid_size=args.grid_size, resolution=args.resolution
        )
    fits = bs.decay_sweep(sym, symbols.TORUS_NORMALIZATION, list(args.k_list), args.j_max, profile=profile)
    os.makedirs(args.out, exist_ok=True)
    lines = ["j,slope,intercept"]
    for f in fits:
        lines.append(f"{f.j},{f.slope:.17g},{f.intercept:.17g}")
    _atomic_write(os.path.join(args.out, "sweep.csv"), "\n".join(lines) + "\n")
    return EXIT_OK


# ── parser ────────────────────────────────────────────────────────────


def _point(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected q,p")
    return float(parts[0]), float(parts[1])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bs-spectra",
        description="Quantized torus Hamiltonians: spectra, eigenvalue predictions, fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_k=True):
        p.add_argument("--symbol", required=True, help="symbol file (lines `m n re im`)")
        p.add_argument("--out", default=".", help="output directory")
        if need_k:
            p.add_argument("--k", type=_positive_int, required=True,
                           help="inverse semiclassical parameter")

    p_spec = sub.add_parser("spectrum", help="full spectrum CSV")
    common(p_spec)
    p_spec.add_argument("--dump-operator", action="store_true",
                        help="also dump the operator entries CSV")
    p_spec.set_defaults(func=cmd_spectrum)

    p_ver = sub.add_parser("verify", help="predictions vs spectrum report")
    common(p_ver)
    p_ver.add_argument("--e-cap", type=float, default=None,
                       help="energy cap (default: midpoint of minimum and separatrix)")
    p_ver.add_argument("--resolution", type=_positive_int, default=1024)
    p_ver.add_argument("--grid-size", type=_positive_int, default=200)
    p_ver.add_argument("--count-level", type=float, action="append", default=None,
                       help="level for the counting defect (repeatable)")
    p_ver.set_defaults(func=cmd_verify)

    p_eig = sub.add_parser("eigfun", help="eigenfunction modulus field")
    p_eig.add_argument("--symbol", required=True)
    p_eig.add_argument("--out", default=".")
    p_eig.add_argument("--k", type=_positive_int, default=100)
    p_eig.add_argument("--level", type=float, default=None,
                       help="target energy (default: symbol value at --level-point)")
    p_eig.add_argument("--level-point", type=_point, default=(0.7, 0.6),
                       help="point q,p whose symbol value selects the eigenvalue")
    p_eig.add_argument("--resolution", type=_positive_int, default=512)
    p_eig.set_defaults(func=cmd_eigfun)

    p_swp = sub.add_parser("sweep", help="residual decay exponents over k")
    p_swp.add_argument("--symbol", required=True)
    p_swp.add_argument("--out", default=".")
    p_swp.add_argument("--k-list", type=_k_list, required=True, help="ascending list a,b,c,...")
    p_swp.add_argument("--j-max", type=int, default=2)
    p_swp.add_argument("--full-predictor", action="store_true",
                       help="use action-profile inversion instead of the near-minimum law")
    p_swp.add_argument("--e-cap", type=float, default=None)
    p_swp.add_argument("--resolution", type=_positive_int, default=1024)
    p_swp.add_argument("--grid-size", type=_positive_int, default=200)
    p_swp.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
