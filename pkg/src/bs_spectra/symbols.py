"""Real trigonometric-polynomial Hamiltonians on the torus [0,1)^2.

A symbol is a finite Fourier sum  a(q,p) = sum c_{m,n} exp(2*pi*i*(m*q + n*p))
with the reality constraint c_{-m,-n} = conj(c_{m,n}).  Besides pointwise
evaluation and derivatives, this module locates the global minimum, certifies
its nondegeneracy, finds the separatrix energy (smallest critical value above
the minimum), and measures symplectic sublevel-set areas by flood fill with
Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

TWO_PI = 2.0 * math.pi

REALITY_TOL = 1e-10      # evaluation rejects symbols with larger imaginary part
FILE_SYMMETRY_TOL = 1e-12   # loader rejects files that symmetrization changes more
HESSIAN_DEGENERACY_TOL = 1e-8   # eigenvalue threshold certifying a nondegenerate minimum


@dataclass(frozen=True)
class FourierMode:
    """One Fourier mode c * exp(2*pi*i*(m*q + n*p))."""

    m: int
    n: int
    coeff: complex


@dataclass(frozen=True)
class SymplecticNormalization:
    """Density nu of the symplectic form omega = nu * dp ^ dq (area sign dropped)."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("symplectic density nu must be positive")


#: The torus normalization used throughout: symplectic volume 4*pi.
TORUS_NORMALIZATION = SymplecticNormalization(4.0 * math.pi)


class TrigSymbol:
    """Immutable real trigonometric polynomial (principal + optional subprincipal).

    The constructor symmetrizes the mode set, c_{m,n} <- (c_{m,n} +
    conj(c_{-m,-n}))/2, so every symbol built through it is real up to
    roundoff.  Duplicate (m, n) pairs are merged by summation.
    """

    def __init__(self, modes, sub_modes=()):
        self._modes = self._symmetrize(modes)
        self._sub = self._symmetrize(sub_modes)
        # flat arrays for vectorized evaluation
        self._m = np.array([mm.m for mm in self._modes], dtype=np.int64)
        self._n = np.array([mm.n for mm in self._modes], dtype=np.int64)
        self._c = np.array([mm.coeff for mm in self._modes], dtype=np.complex128)

    @staticmethod
    def _symmetrize(modes):
        table = {}
        for item in modes:
            if isinstance(item, FourierMode):
                m, n, c = item.m, item.n, item.coeff
            else:
                m, n, c = item
            key = (int(m), int(n))
            table[key] = table.get(key, 0.0) + complex(c)
        sym = {}
        for (m, n), c in table.items():
            sym[(m, n)] = 0.5 * (c + np.conj(table.get((-m, -n), 0.0)))
            sym.setdefault((-m, -n), 0.5 * (table.get((-m, -n), 0.0) + np.conj(c)))
        out = [FourierMode(m, n, c) for (m, n), c in sorted(sym.items()) if c != 0]
        return tuple(out)

    # -- constructors --------------------------------------------------

    @staticmethod
    def harper():
        """a0(q,p) = 2(cos(2*pi*p) + cos(2*pi*q))."""
        return TrigSymbol([(0, 1, 1.0), (0, -1, 1.0), (1, 0, 1.0), (-1, 0, 1.0)])

    @staticmethod
    def constant(c):
        return TrigSymbol([(0, 0, complex(c))])

    @staticmethod
    def cosine(m, n, amp=1.0):
        """amp * cos(2*pi*(m*q + n*p))."""
        return TrigSymbol([(m, n, 0.5 * amp), (-m, -n, 0.5 * amp)])

    def __add__(self, other):
        if not isinstance(other, TrigSymbol):
            return NotImplemented
        return TrigSymbol(self._modes + other._modes, self._sub + other._sub)

    def scaled(self, factor):
        f = float(factor)
        return TrigSymbol(
            [FourierMode(mm.m, mm.n, f * mm.coeff) for mm in self._modes],
            [FourierMode(mm.m, mm.n, f * mm.coeff) for mm in self._sub],
        )

    # -- accessors -----------------------------------------------------

    @property
    def modes(self):
        return self._modes

    @property
    def sub_modes(self):
        return self._sub

    def max_degree(self):
        if len(self._m) == 0:
            return 0
        return int(max(np.max(np.abs(self._m)), np.max(np.abs(self._n))))

    # -- evaluation ----------------------------------------------------

    def _raw(self, q, p, dm=0, dn=0):
        """Complex value of the (dm, dn)-th mixed derivative at (q, p)."""
        q = np.asarray(q, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        phase = np.exp(
            1j * TWO_PI * (np.multiply.outer(q, self._m) + np.multiply.outer(p, self._n))
        )
        deriv = (1j * TWO_PI * self._m) ** dm * (1j * TWO_PI * self._n) ** dn
        return phase @ (self._c * deriv)

    def value(self, q, p):
        """Evaluate a0; raises if the imaginary part exceeds the reality tolerance."""
        v = self._raw(q, p)
        if np.max(np.abs(np.imag(np.atleast_1d(v)))) > REALITY_TOL:
            raise ValueError("reality violation: symbol evaluates with imaginary part")
        out = np.real(v)
        return float(out) if out.ndim == 0 else out

    def sub_value(self, q, p):
        """Evaluate the subprincipal symbol a1 (zero if no sub modes)."""
        if not self._sub:
            z = np.zeros(np.broadcast(np.asarray(q), np.asarray(p)).shape)
            return float(z) if z.ndim == 0 else z
        return TrigSymbol(self._sub).value(q, p)

    def gradient(self, q, p):
        g = np.array([self._raw(q, p, dm=1), self._raw(q, p, dn=1)])
        return np.real(g)

    def hessian(self, q, p):
        """Analytic 2x2 Hessian in (q, p)."""
        hqq = self._raw(q, p, dm=2)
        hqp = self._raw(q, p, dm=1, dn=1)
        hpp = self._raw(q, p, dn=2)
        return np.real(np.array([[hqq, hqp], [hqp, hpp]]))

    def value_grid(self, resolution):
        """a0 on the corner grid (i/res, j/res), shape (res, res), q along axis 0."""
        idx = np.arange(resolution) / resolution
        return self._grid_on(idx, idx)

    def _grid_on(self, q_axis, p_axis):
        out = np.zeros((len(q_axis), len(p_axis)))
        for m, n, c in zip(self._m, self._n, self._c):
            eq = np.exp(1j * TWO_PI * m * q_axis)
            ep = np.exp(1j * TWO_PI * n * p_axis)
            out += np.real(c * np.outer(eq, ep))
        return out


# ── minimum and critical values ─────────────────────────────────────


@dataclass(frozen=True)
class Minimum:
    """Certified global minimum of a symbol."""

    q: float
    p: float
    value: float
    nondegenerate: bool
    hessian: np.ndarray
    grad_norm: float


def _newton_refine(sym, q, p, iterations=100, tol=1e-12):
    """Damped Newton iteration on the gradient; returns (q, p, converged)."""
    x = np.array([q, p], dtype=float)
    g = sym.gradient(x[0], x[1])
    for _ in range(iterations):
        gn = np.hypot(g[0], g[1])
        if gn < tol:
            return x[0] % 1.0, x[1] % 1.0, True
        h = sym.hessian(x[0], x[1])
        det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
        if abs(det) < 1e-14 * (1.0 + np.max(np.abs(h)) ** 2):
            return x[0] % 1.0, x[1] % 1.0, gn < tol
        step = np.linalg.solve(h, g)
        alpha = 1.0
        for _ in range(25):
            x_new = x - alpha * step
            g_new = sym.gradient(x_new[0], x_new[1])
            if np.hypot(g_new[0], g_new[1]) < gn:
                break
            alpha *= 0.5
        x = x - alpha * step
        g = sym.gradient(x[0], x[1])
    gn = np.hypot(g[0], g[1])
    return x[0] % 1.0, x[1] % 1.0, gn < tol


def find_minimum(sym, scan_resolution=256):
    """Locate the global minimum: coarse scan, then damped Newton on the gradient."""
    grid = sym.value_grid(scan_resolution)
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    q0, p0 = i / scan_resolution, j / scan_resolution
    q, p, _ = _newton_refine(sym, q0, p0)
    if sym.value(q, p) > grid[i, j] + 1e-12:
        q, p = q0, p0     # Newton wandered; keep the scan point
    h = sym.hessian(q, p)
    eigs = np.linalg.eigvalsh(h)
    g = sym.gradient(q, p)
    return Minimum(
        q=q,
        p=p,
        value=sym.value(q, p),
        nondegenerate=bool(np.min(eigs) > HESSIAN_DEGENERACY_TOL),
        hessian=h,
        grad_norm=float(np.hypot(g[0], g[1])),
    )


def separatrix_energy(sym, minimum=None, seed_resolution=64):
    """Smallest critical value strictly above the minimum (inf if none found).

    Critical points are located by batched Newton iterations from a seed grid;
    level sets are guaranteed connected only below this energy.
    """
    if minimum is None:
        minimum = find_minimum(sym)
    ax = np.arange(seed_resolution) / seed_resolution
    qs, ps = np.meshgrid(ax, ax, indexing="ij")
    x = np.stack([qs.ravel(), ps.ravel()], axis=1)
    for _ in range(60):
        g = np.stack([sym._raw(x[:, 0], x[:, 1], dm=1), sym._raw(x[:, 0], x[:, 1], dn=1)], axis=1)
        g = np.real(g)
        hqq = np.real(sym._raw(x[:, 0], x[:, 1], dm=2))
        hqp = np.real(sym._raw(x[:, 0], x[:, 1], dm=1, dn=1))
        hpp = np.real(sym._raw(x[:, 0], x[:, 1], dn=2))
        det = hqq * hpp - hqp * hqp
        ok = np.abs(det) > 1e-12
        step_q = np.where(ok, (hpp * g[:, 0] - hqp * g[:, 1]) / np.where(ok, det, 1.0), 0.0)
        step_p = np.where(ok, (hqq * g[:, 1] - hqp * g[:, 0]) / np.where(ok, det, 1.0), 0.0)
        # clip steps to keep the iteration on the torus scale
        step_q = np.clip(step_q, -0.2, 0.2)
        step_p = np.clip(step_p, -0.2, 0.2)
        x = x - np.stack([step_q, step_p], axis=1)
    x %= 1.0
    g = np.real(
        np.stack([sym._raw(x[:, 0], x[:, 1], dm=1), sym._raw(x[:, 0], x[:, 1], dn=1)], axis=1)
    )
    converged = np.hypot(g[:, 0], g[:, 1]) < 1e-10
    values = []
    seen = set()
    for q, p in x[converged]:
        key = (round(q % 1.0, 6) % 1.0, round(p % 1.0, 6) % 1.0)
        if key in seen:
            continue
        seen.add(key)
        values.append(sym.value(q, p))
    above = [v for v in values if v > minimum.value + 1e-9]
    return min(above) if above else math.inf


# ── sublevel-set area ───────────────────────────────────────────────


def _triangle_fraction(sa, sb, sc):
    """Fraction of a triangle where the linear interpolant of (sa, sb, sc) is <= 0."""
    ia, ib, ic = sa <= 0, sb <= 0, sc <= 0
    n_in = ia.astype(np.int8) + ib.astype(np.int8) + ic.astype(np.int8)
    frac = np.zeros(sa.shape)
    frac[n_in == 3] = 1.0

    def corner_patch(sv, s1, s2, vertex_in):
        with np.errstate(divide="ignore", invalid="ignore"):
            f = sv * sv / ((sv - s1) * (sv - s2))
        return np.where(vertex_in, f, 0.0)

    one = n_in == 1
    for sv, s1, s2, iv in ((sa, sb, sc, ia), (sb, sc, sa, ib), (sc, sa, sb, ic)):
        mask = one & iv
        if np.any(mask):
            frac[mask] = corner_patch(sv, s1, s2, iv)[mask]
    two = n_in == 2
    for sv, s1, s2, iv in ((sa, sb, sc, ia), (sb, sc, sa, ib), (sc, sa, sb, ic)):
        mask = two & ~iv
        if np.any(mask):
            frac[mask] = 1.0 - corner_patch(sv, s1, s2, ~iv)[mask]
    return frac


def _component_mask_periodic(inside, seed_ij):
    """Connected component of `inside` containing seed, with periodic stitching."""
    labels, nlab = ndimage.label(inside)
    if nlab == 0:
        return None
    parent = list(range(nlab + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    top, bottom = labels[0, :], labels[-1, :]
    for a, b in zip(top, bottom):
        if a and b:
            union(a, b)
    left, right = labels[:, 0], labels[:, -1]
    for a, b in zip(left, right):
        if a and b:
            union(a, b)
    seed_label = labels[seed_ij]
    if seed_label == 0:
        return None
    root = find(seed_label)
    roots = np.array([0] + [find(l) for l in range(1, nlab + 1)])
    return roots[labels] == root


def _masked_area(corner_values, e_level, comp, cell_size):
    """Sublevel area restricted to the component, triangle-exact boundary cells.

    `corner_values` is the tuple (v00, v10, v01, v11) of periodically rolled
    corner grids; `comp` the component corner mask.  Interior cells count as
    full squares; each boundary cell is split along its diagonal into two
    triangles with exact linear-interpolant areas.
    """
    v00, v10, v01, v11 = corner_values
    i00, i10 = v00 <= e_level, v10 <= e_level
    i01, i11 = v01 <= e_level, v11 <= e_level
    c00 = comp
    c10 = np.roll(comp, -1, axis=0)
    c01 = np.roll(comp, -1, axis=1)
    c11 = np.roll(c10, -1, axis=1)
    full = i00 & i10 & i01 & i11
    n_full = np.count_nonzero(full & c00)
    mixed = (i00 | i10 | i01 | i11) & ~full & (c00 | c10 | c01 | c11)
    idx = np.nonzero(mixed)
    s00 = v00[idx] - e_level
    s10 = v10[idx] - e_level
    s01 = v01[idx] - e_level
    s11 = v11[idx] - e_level
    fa = _triangle_fraction(s00, s10, s11)
    fb = _triangle_fraction(s00, s11, s01)
    gate_a = c00[idx] | c10[idx] | c11[idx]
    gate_b = c00[idx] | c11[idx] | c01[idx]
    total = 2.0 * n_full + np.sum(fa[gate_a]) + np.sum(fb[gate_b])
    return total * 0.5 * cell_size * cell_size


def _masked_area_window(values, e_level, seed_ij, cell_size):
    """Same as _masked_area but on a non-periodic local window."""
    comp = None
    inside = values <= e_level
    labels, nlab = ndimage.label(inside)
    if nlab == 0 or labels[seed_ij] == 0:
        return None, False
    comp = labels == labels[seed_ij]
    touches = (
        np.any(comp[0, :]) or np.any(comp[-1, :]) or np.any(comp[:, 0]) or np.any(comp[:, -1])
    )
    s00 = (values - e_level)[:-1, :-1]
    s10 = (values - e_level)[1:, :-1]
    s01 = (values - e_level)[:-1, 1:]
    s11 = (values - e_level)[1:, 1:]
    c00, c10, c01, c11 = comp[:-1, :-1], comp[1:, :-1], comp[:-1, 1:], comp[1:, 1:]
    fa = _triangle_fraction(s00, s10, s11)
    fb = _triangle_fraction(s00, s11, s01)
    total = np.sum(fa[c00 | c10 | c11]) + np.sum(fb[c00 | c11 | c01])
    return total * 0.5 * cell_size * cell_size, touches


class SublevelAreaCalculator:
    """Sublevel areas of one symbol, sharing corner grids across energy levels."""

    def __init__(self, sym, norm=TORUS_NORMALIZATION, minimum=None):
        self.sym = sym
        self.norm = norm
        self.minimum = minimum if minimum is not None else find_minimum(sym)
        self._grids = {}

    def _grid(self, resolution):
        if resolution not in self._grids:
            v00 = self.sym.value_grid(resolution)
            v10 = np.roll(v00, -1, axis=0)
            v01 = np.roll(v00, -1, axis=1)
            v11 = np.roll(v10, -1, axis=1)
            self._grids[resolution] = (v00, v10, v01, v11)
        return self._grids[resolution]

    def _harmonic_radius(self, e_level):
        eigs = np.linalg.eigvalsh(self.minimum.hessian)
        if np.min(eigs) <= 0:
            return math.inf
        return math.sqrt(2.0 * (e_level - self.minimum.value) / np.min(eigs))

    def _lebesgue_once(self, e_level, resolution):
        corner_values = self._grid(resolution)
        v00 = corner_values[0]
        i = int(round(self.minimum.q * resolution)) % resolution
        j = int(round(self.minimum.p * resolution)) % resolution
        if v00[i, j] > e_level:
            return None
        comp = _component_mask_periodic(v00 <= e_level, (i, j))
        if comp is None:
            return None
        return _masked_area(corner_values, e_level, comp, 1.0 / resolution)

    def _lebesgue_zoom_once(self, e_level, resolution):
        rho = self._harmonic_radius(e_level)
        half = 4.0 * rho
        for _ in range(4):
            ax_q = self.minimum.q + np.linspace(-half, half, resolution + 1)
            ax_p = self.minimum.p + np.linspace(-half, half, resolution + 1)
            values = self.sym._grid_on(ax_q, ax_p)
            seed = (resolution // 2, resolution // 2)
            area, touches = _masked_area_window(
                values, e_level, seed, 2.0 * half / resolution
            )
            if area is not None and not touches:
                return area
            half *= 2.0
        return None

    def lebesgue_area(self, e_level, resolution=1024):
        """Lebesgue area of the minimizer's sublevel component, Richardson-extrapolated."""
        if not e_level > self.minimum.value:
            raise ValueError("energy level must lie strictly above the minimum")
        rho = self._harmonic_radius(e_level)
        if rho * resolution < 20.0:
            coarse = self._lebesgue_zoom_once(e_level, resolution)
            fine = self._lebesgue_zoom_once(e_level, 2 * resolution)
            if coarse is None or fine is None:
                raise ValueError("sublevel component not resolved near the minimum")
            return (4.0 * fine - coarse) / 3.0
        coarse = self._lebesgue_once(e_level, resolution)
        fine = self._lebesgue_once(e_level, 2 * resolution)
        if coarse is None or fine is None:
            # component thinner than the grid: fall back to the local window
            coarse = self._lebesgue_zoom_once(e_level, resolution)
            fine = self._lebesgue_zoom_once(e_level, 2 * resolution)
            if coarse is None or fine is None:
                raise ValueError("sublevel component not resolved at this resolution")
        return (4.0 * fine - coarse) / 3.0

    def area(self, e_level, resolution=1024):
        """Symplectic area nu * Lebesgue area."""
        return self.norm.nu * self.lebesgue_area(e_level, resolution)


def sublevel_area(sym, e_level, norm=TORUS_NORMALIZATION, resolution=1024, minimum=None):
    """Symplectic area of the sublevel component {a0 <= E} containing the minimizer."""
    return SublevelAreaCalculator(sym, norm, minimum).area(e_level, resolution)


def action_derivative_at_min(sym, norm=TORUS_NORMALIZATION, minimum=None):
    """c0'(E_min) = 2*pi*nu / sqrt(det Hessian) from the harmonic approximation."""
    if minimum is None:
        minimum = find_minimum(sym)
    if not minimum.nondegenerate:
        raise ValueError("degenerate minimum: action derivative undefined")
    det = float(np.linalg.det(minimum.hessian))
    return TWO_PI * norm.nu / math.sqrt(det)


# ── symbol files ────────────────────────────────────────────────────


def load_symbol(path):
    """Read a symbol file: lines `m n re im`, '#' comments; symmetrization-checked."""
    raw = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{line_no}: expected 'm n re im', got {body!r}")
            m, n = int(parts[0]), int(parts[1])
            raw.append((m, n, float(parts[2]) + 1j * float(parts[3])))
    table = {}
    for m, n, c in raw:
        table[(m, n)] = table.get((m, n), 0.0) + c
    sym = TrigSymbol(raw)
    sym_table = {(mm.m, mm.n): mm.coeff for mm in sym.modes}
    keys = set(table) | set(sym_table)
    drift = max(
        (abs(sym_table.get(k, 0.0) - table.get(k, 0.0)) for k in keys), default=0.0
    )
    if drift > FILE_SYMMETRY_TOL:
        raise ValueError(
            f"{path}: symmetrization changed a coefficient by {drift:.3e} "
            f"(> {FILE_SYMMETRY_TOL}); file does not describe a real symbol"
        )
    return sym


def dump_symbol(sym, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# symbol modes: m n re im\n")
        for mm in sym.modes:
            fh.write(f"{mm.m} {mm.n} {mm.coeff.real:.17g} {mm.coeff.imag:.17g}\n")
