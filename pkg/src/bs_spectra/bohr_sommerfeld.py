"""Eigenvalue predictions from action geometry, and verification reports.

The action profile tabulates the symplectic area c0(E) of the sublevel set
through the well, f0 = c0/(2*pi) is its quantum counting function, and the
prediction for the j-th eigenvalue solves f0(E) = (j+1/2)/k.  Near the bottom
the closed-form first-order law E_min + (a1 + 2*pi*(j+1/2)/c0'(E_min))/k is
available without quadrature.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import spectral, torus_quant
from .symbols import (
    SublevelAreaCalculator,
    TORUS_NORMALIZATION,
    action_derivative_at_min,
    find_minimum,
    separatrix_energy,
)

TWO_PI = 2.0 * math.pi
INVERSION_TOL = 1e-12
RESIDUAL_FLOOR = 1e-12     # below this, decay exponents are machine-limited


@dataclass(frozen=True)
class ActionProfile:
    """Tabulated action c0(E), its normalized form f0, and a monotone interpolant."""

    E_grid: np.ndarray
    c0: np.ndarray
    f0: np.ndarray
    c0_prime_min: float
    E_min: float
    E_cap: float
    interpolant: PchipInterpolator = field(repr=False)

    def f0_of(self, e):
        return float(self.interpolant(e))

    @property
    def f0_cap(self):
        return float(self.f0[-1])

    def invert(self, target, k=None, f1=None):
        """Solve f0(E) (+ f1(E)/k) = target by bisection bracket + Newton polish."""

        def func(e):
            val = float(self.interpolant(e))
            if f1 is not None and k is not None:
                val += f1(e) / k
            return val - target

        lo, hi = float(self.E_grid[0]), float(self.E_grid[-1])
        f_lo = func(lo)
        if f_lo > 0:
            # target sits below the first sample: use the harmonic slope
            slope = self.c0_prime_min / TWO_PI
            e = self.E_min + target / slope
            if e <= lo:
                return e
            raise ValueError("inversion target below the tabulated range")
        if func(hi) < 0:
            raise ValueError("inversion target above the tabulated range")
        deriv = self.interpolant.derivative()
        e = lo + (hi - lo) * 0.5
        for _ in range(200):
            f_e = func(e)
            if abs(f_e) <= INVERSION_TOL:
                return e
            if f_e > 0:
                hi = e
            else:
                lo = e
            d = float(deriv(e))
            if f1 is not None and k is not None:
                d += _numeric_derivative(f1, e) / k
            e_newton = e - f_e / d if d > 0 else None
            e = e_newton if e_newton is not None and lo < e_newton < hi else 0.5 * (lo + hi)
        raise ArithmeticError("action inversion did not converge")


def _numeric_derivative(fn, e, h=1e-7):
    return (fn(e + h) - fn(e - h)) / (2.0 * h)


@dataclass(frozen=True)
class PredictionSet:
    """Predicted eigenvalues E_j solving f0(E) = (j+1/2)/k, j ascending."""

    k: int
    entries: tuple
    source: ActionProfile


@dataclass(frozen=True)
class VerifyRow:
    j: int
    lam: float
    e_pred: float
    residual: float
    gap_ratio: float


@dataclass(frozen=True)
class CountRow:
    level: float
    count: int
    weyl: float
    defect: float


@dataclass(frozen=True)
class VerificationReport:
    k: int
    e_cap: float
    rows: tuple
    gap_ratio_mean: float
    gap_ratio_min: float
    gap_ratio_max: float
    counts: tuple


@dataclass(frozen=True)
class DecayFit:
    j: int
    slope: float
    intercept: float
    machine_limited: bool


def build_action_profile(
    sym,
    norm=TORUS_NORMALIZATION,
    e_cap=None,
    grid_size=200,
    resolution=1024,
    minimum=None,
):
    """Sample the sublevel action on a cosine-clustered energy grid.

    The grid clusters toward the minimum, where the profile must resolve the
    linear regime f0 ~ c0'(E_min)/(2*pi) * (E - E_min).  A non-monotone sample
    set (quadrature too coarse) triggers one retry at doubled resolution.
    """
    if minimum is None:
        minimum = find_minimum(sym)
    if not minimum.nondegenerate:
        raise ValueError("degenerate minimum: no action profile")
    e_min = minimum.value
    e_sep = separatrix_energy(sym, minimum)
    if e_cap is None:
        if not math.isfinite(e_sep):
            raise ValueError("no separatrix found; pass e_cap explicitly")
        e_cap = 0.5 * (e_min + e_sep)
    if not (e_min < e_cap):
        raise ValueError("e_cap must exceed the minimum value")
    if math.isfinite(e_sep) and e_cap >= e_sep:
        raise ValueError(f"e_cap {e_cap} beyond the separatrix value {e_sep}")
    idx = np.arange(1, grid_size + 1)
    u = 0.5 * (1.0 - np.cos(math.pi * idx / grid_size))
    e_grid = e_min + (e_cap - e_min) * u
    calc = SublevelAreaCalculator(sym, norm, minimum)
    c0 = None
    for res in (resolution, 2 * resolution):
        samples = np.array([calc.area(e, res) for e in e_grid])
        if np.all(np.diff(samples) > 0):
            c0 = samples
            break
    if c0 is None:
        raise ArithmeticError("sublevel areas not strictly increasing; quadrature too coarse")
    f0 = c0 / TWO_PI
    c0p = action_derivative_at_min(sym, norm, minimum)
    slope = c0p / TWO_PI
    for e, f in zip(e_grid[:3], f0[:3]):
        linear = slope * (e - e_min)
        if abs(f - linear) > 0.25 * linear:
            raise ArithmeticError(
                "profile inconsistent with the harmonic slope near the minimum"
            )
    interp = PchipInterpolator(e_grid, f0)
    return ActionProfile(
        E_grid=e_grid,
        c0=c0,
        f0=f0,
        c0_prime_min=c0p,
        E_min=e_min,
        E_cap=float(e_cap),
        interpolant=interp,
    )


def predict(profile: ActionProfile, k: int, f1=None) -> PredictionSet:
    """All predictions with (j+1/2)/k within the range of f0 (shifted by f1/k if given)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    entries = []
    j = 0
    cap = profile.f0_cap
    if f1 is not None:
        cap += f1(float(profile.E_grid[-1])) / k
    while (j + 0.5) / k <= cap:
        e = profile.invert((j + 0.5) / k, k=k, f1=f1)
        entries.append((j, e))
        j += 1
    return PredictionSet(k=k, entries=tuple(entries), source=profile)


def near_minimum_predict(sym, norm, k, j, a1_at_min=0.0, minimum=None, c0_prime=None):
    """First-order law at the bottom: E_min + (a1 + 2*pi*(j+1/2)/c0'(E_min))/k."""
    if minimum is None:
        minimum = find_minimum(sym)
    if not minimum.nondegenerate:
        raise ValueError("degenerate minimum")
    if c0_prime is None:
        c0_prime = action_derivative_at_min(sym, norm, minimum)
    return minimum.value + (a1_at_min + TWO_PI * (j + 0.5) / c0_prime) / k


def verify(spectrum, predictions: PredictionSet, e_cap, count_levels=()) -> VerificationReport:
    """Pair eigenvalues with predictions under the window gate.

    A pair (j, lambda_j, E_j) is reported iff lambda_j <= e_cap or E_j <= e_cap.
    Gap ratios are k * (lambda_{j+1} - lambda_j) / (2*pi / c0'(E_min)); the
    counting defect compares #{lambda <= E} with k * f0(E).
    """
    lam = np.asarray(spectrum.eigenvalues)
    k = predictions.k
    if len(lam) != 2 * k:
        raise ValueError(f"spectrum dimension {len(lam)} does not match k={k}")
    profile = predictions.source
    gap_unit = TWO_PI / profile.c0_prime_min
    rows = []
    for j, e_pred in predictions.entries:
        if j >= len(lam):
            break
        if not (lam[j] <= e_cap or e_pred <= e_cap):
            continue
        gap_ratio = (
            k * (lam[j + 1] - lam[j]) / gap_unit if j + 1 < len(lam) else math.nan
        )
        rows.append(
            VerifyRow(
                j=j,
                lam=float(lam[j]),
                e_pred=float(e_pred),
                residual=float(abs(lam[j] - e_pred)),
                gap_ratio=float(gap_ratio),
            )
        )
    ratios = [r.gap_ratio for r in rows if math.isfinite(r.gap_ratio)]
    counts = []
    for level in count_levels:
        count = int(np.sum(lam <= level))
        weyl = k * profile.f0_of(level)
        counts.append(CountRow(level=float(level), count=count, weyl=weyl, defect=abs(count - weyl)))
    return VerificationReport(
        k=k,
        e_cap=float(e_cap),
        rows=tuple(rows),
        gap_ratio_mean=float(np.mean(ratios)) if ratios else math.nan,
        gap_ratio_min=float(np.min(ratios)) if ratios else math.nan,
        gap_ratio_max=float(np.max(ratios)) if ratios else math.nan,
        counts=tuple(counts),
    )


def _worker_count(n_tasks):
    env = os.environ.get("BS_SPECTRA_THREADS", "")
    try:
        cap = max(1, int(env)) if env else 1
    except ValueError:
        cap = 1
    return min(cap, n_tasks)


def sweep_spectra(sym, k_list):
    """Spectra of the quantized symbol for each k; parallel, deterministic order."""

    def job(k):
        op = torus_quant.weyl_quantize(sym, torus_quant.QuantumTorusParams(k))
        return spectral.eigh(op, want_vectors=False).eigenvalues

    workers = _worker_count(len(k_list))
    if workers == 1:
        return {k: job(k) for k in k_list}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(job, k_list))
    return dict(zip(k_list, results))


def decay_sweep(sym, norm, k_list, j_max, profile=None, a1_at_min=0.0, spectra=None):
    """Per-j decay exponents of |lambda_k^(j) - prediction| across the k sweep.

    Uses the near-minimum predictor by default, the full profile inversion if
    `profile` is given.  Residuals at the 1e-12 floor flag the fit as
    machine-limited.  `spectra` may inject precomputed eigenvalues per k.
    """
    k_list = list(k_list)
    if len(k_list) < 3 or any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ValueError("k_list must be ascending with at least 3 entries")
    minimum = find_minimum(sym)
    c0p = action_derivative_at_min(sym, norm, minimum)
    if spectra is None:
        spectra = sweep_spectra(sym, k_list)
    preds = {}
    if profile is not None:
        preds = {k: dict(predict(profile, k).entries) for k in k_list}
    fits = []
    for j in range(j_max + 1):
        residuals = []
        for k in k_list:
            lam = spectra[k][j]
            if profile is not None:
                if j not in preds[k]:
                    raise ValueError(f"no prediction for j={j} at k={k}")
                target = preds[k][j]
            else:
                target = near_minimum_predict(
                    sym, norm, k, j, a1_at_min, minimum=minimum, c0_prime=c0p
                )
            residuals.append(abs(lam - target))
        residuals = np.array(residuals)
        if np.any(residuals < RESIDUAL_FLOOR):
            fits.append(DecayFit(j=j, slope=math.nan, intercept=math.nan, machine_limited=True))
            continue
        slope, intercept = np.polyfit(np.log(np.asarray(k_list, float)), np.log(residuals), 1)
        fits.append(
            DecayFit(j=j, slope=float(slope), intercept=float(intercept), machine_limited=False)
        )
    return fits


# ── CSV surfaces ────────────────────────────────────────────────────


def dump_report_csv(report: VerificationReport, path):
    """CSV `k,j,lambda,E_pred,residual,gap_ratio` with header."""
    lines = ["k,j,lambda,E_pred,residual,gap_ratio"]
    for r in report.rows:
        lines.append(
            f"{report.k},{r.j},{r.lam:.17g},{r.e_pred:.17g},{r.residual:.17g},{r.gap_ratio:.17g}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def dump_sweep_csv(fits, path):
    """CSV `j,slope,intercept` with header; machine-limited rows carry nan."""
    lines = ["j,slope,intercept"]
    for f in fits:
        lines.append(f"{f.j},{f.slope:.17g},{f.intercept:.17g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
