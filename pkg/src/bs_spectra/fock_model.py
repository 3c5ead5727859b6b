"""Polynomial Toeplitz calculus on truncated Bargmann space.

Symbols are polynomials in (z, zbar) graded by powers of hbar = 1/k.  The
multiplication-compression operator of the monomial z^a zbar^b has the exact
banded matrix T[m, n] = delta_{m, n+a-b} (n+a)! / (sqrt(m! n!) k^((a+b)/2)) in
the normalized basis; the covariant symbol is exp(Delta/k) applied to the
contravariant one, products compose through exp(-hbar d_z1 d_zbar2), and the
normalized symbol is (Id + hbar Delta / 2) of the contravariant.  All symbol
operations are exact finite sums (Delta is nilpotent on polynomials).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

class PolySymbol:
    """hbar-graded polynomial in z and zbar.

    Internally {hbar_order: {(a, b): coeff}}; value at (z, k) is
    sum_l k^(-l) sum_{a,b} c z^a zbar^b.
    """

    def __init__(self, terms=None):
        self._orders = {}
        if terms:
            if isinstance(terms, dict):
                items = list(terms.items())
            else:
                items = [((a, b), c) for a, b, c in terms]
            for (a, b), c in items:
                self._set(0, int(a), int(b), complex(c))

    @classmethod
    def from_orders(cls, orders):
        out = cls()
        for ell, table in orders.items():
            for (a, b), c in table.items():
                out._set(int(ell), int(a), int(b), complex(c))
        return out

    @classmethod
    def monomial(cls, a, b, coeff=1.0, order=0):
        out = cls()
        out._set(order, a, b, complex(coeff))
        return out

    def _set(self, ell, a, b, c):
        if a < 0 or b < 0 or ell < 0:
            raise ValueError("powers and hbar order must be nonnegative")
        table = self._orders.setdefault(ell, {})
        new = table.get((a, b), 0.0) + c
        if new == 0:
            table.pop((a, b), None)
            if not table:
                self._orders.pop(ell, None)
        else:
            table[(a, b)] = new

    # -- inspection ------------------------------------------------------

    @property
    def orders(self):
        return {ell: dict(tab) for ell, tab in sorted(self._orders.items())}

    def order_part(self, ell):
        return dict(self._orders.get(ell, {}))

    def is_zero(self, tol=0.0):
        return all(abs(c) <= tol for tab in self._orders.values() for c in tab.values())

    def max_power(self):
        """(max a, max b) over all terms; (0, 0) for the zero symbol."""
        amax = bmax = 0
        for tab in self._orders.values():
            for a, b in tab:
                amax, bmax = max(amax, a), max(bmax, b)
        return amax, bmax

    def degree(self):
        return max((a + b for tab in self._orders.values() for a, b in tab), default=0)

    def __repr__(self):
        bits = []
        for ell, tab in sorted(self._orders.items()):
            for (a, b), c in sorted(tab.items()):
                bits.append(f"h^{ell} z^{a} zb^{b} * {c:.6g}")
        return "PolySymbol(" + (" + ".join(bits) if bits else "0") + ")"

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        out = PolySymbol.from_orders(self._orders)
        for ell, tab in other._orders.items():
            for (a, b), c in tab.items():
                out._set(ell, a, b, c)
        return out

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, factor):
        out = PolySymbol()
        for ell, tab in self._orders.items():
            for (a, b), c in tab.items():
                out._set(ell, a, b, c * factor)
        return out

    def __mul__(self, other):
        out = PolySymbol()
        for l1, t1 in self._orders.items():
            for l2, t2 in other._orders.items():
                for (a1, b1), c1 in t1.items():
                    for (a2, b2), c2 in t2.items():
                        out._set(l1 + l2, a1 + a2, b1 + b2, c1 * c2)
        return out

    def shifted(self, d_order):
        """Multiply by hbar^d_order."""
        out = PolySymbol()
        for ell, tab in self._orders.items():
            for (a, b), c in tab.items():
                out._set(ell + d_order, a, b, c)
        return out

    def dz(self):
        out = PolySymbol()
        for ell, tab in self._orders.items():
            for (a, b), c in tab.items():
                if a > 0:
                    out._set(ell, a - 1, b, c * a)
        return out

    def dzbar(self):
        out = PolySymbol()
        for ell, tab in self._orders.items():
            for (a, b), c in tab.items():
                if b > 0:
                    out._set(ell, a, b - 1, c * b)
        return out

    def laplacian(self):
        """Delta = d_z d_zbar (holomorphic Laplacian)."""
        return self.dz().dzbar()

    def value(self, z, k):
        zb = np.conj(z)
        total = 0.0 + 0.0j
        for ell, tab in self._orders.items():
            part = sum(c * z**a * zb**b for (a, b), c in tab.items())
            total += part * float(k) ** (-ell)
        return total

    def at_k(self, k):
        """Fold the hbar grading numerically into an order-0 symbol."""
        out = PolySymbol()
        for ell, tab in self._orders.items():
            scale = float(k) ** (-ell)
            for (a, b), c in tab.items():
                out._set(0, a, b, c * scale)
        return out

    def max_abs_coeff(self):
        return max((abs(c) for tab in self._orders.values() for c in tab.values()), default=0.0)


def heat_flow(sym: PolySymbol, sign=1.0) -> PolySymbol:
    """exp(sign * hbar * Delta) applied termwise; finite sum by nilpotency."""
    out = PolySymbol.from_orders(sym._orders)
    term = sym
    ell = 0
    while True:
        term = term.laplacian()
        ell += 1
        if term.is_zero():
            return out
        out = out + term.scaled(sign**ell / math.factorial(ell)).shifted(ell)


def covariant_from_contravariant(sym: PolySymbol, k=None) -> PolySymbol:
    """exp(Delta/k) of the contravariant symbol; graded result, folded if k given."""
    out = heat_flow(sym, sign=1.0)
    return out.at_k(k) if k is not None else out


def contravariant_from_covariant(sym: PolySymbol, k=None) -> PolySymbol:
    """Inverse heat flow exp(-Delta/k); exact on polynomials."""
    out = heat_flow(sym, sign=-1.0)
    return out.at_k(k) if k is not None else out


def compose_symbols(a: PolySymbol, b: PolySymbol, k=None) -> PolySymbol:
    """Contravariant symbol of the operator product.

    exp(-hbar d_z1 d_zbar2) a(z1) b(z2) restricted to the diagonal: the r-th
    term is (-1)^r/r! hbar^r (d_z^r a)(d_zbar^r b).
    """
    out = PolySymbol()
    da, db = a, b
    r = 0
    while True:
        term = da * db
        if not term.is_zero():
            out = out + term.scaled((-1.0) ** r / math.factorial(r)).shifted(r)
        da, db = da.dz(), db.dzbar()
        r += 1
        if da.is_zero() or db.is_zero():
            break
    return out.at_k(k) if k is not None else out


def normalized_symbol(sym: PolySymbol, direction="to_normalized") -> PolySymbol:
    """(Id + hbar Delta / 2) of a contravariant symbol, or its exact inverse.

    direction='to_normalized' maps contravariant -> normalized;
    direction='to_contravariant' applies the Neumann inverse, which terminates
    because Delta is nilpotent on polynomials.
    """
    if direction == "to_normalized":
        return sym + sym.laplacian().scaled(0.5).shifted(1)
    if direction == "to_contravariant":
        out = PolySymbol.from_orders(sym._orders)
        term = sym
        r = 0
        while True:
            term = term.laplacian().scaled(-0.5).shifted(1)
            r += 1
            if term.is_zero():
                return out
            out = out + term
    raise ValueError("direction must be 'to_normalized' or 'to_contravariant'")


def poisson_bracket(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """{f, g} in the plane coordinates with z = (x - i xi)/sqrt(2).

    Equals i (d_zbar f d_z g - d_z f d_zbar g), the complex form of
    d_xi f d_x g - d_x f d_xi g.
    """
    out = f.dzbar() * g.dz() - f.dz() * g.dzbar()
    return out.scaled(1j)


# ── truncated operators ───────────────────────────────────────────────


@dataclass(frozen=True)
class FockOperator:
    """Matrix on the truncated basis phi_0..phi_N; top `interior_band` rows/cols
    are boundary-contaminated by the truncation."""

    k: int
    N: int
    matrix: np.ndarray
    interior_band: int

    def interior(self, extra=0):
        cut = self.N + 1 - self.interior_band - extra
        return self.matrix[:cut, :cut]


def _factorial_ratio_entry(m, n, a, b, k):
    """(n+a)! / (sqrt(m! n!) k^((a+b)/2)) for m = n + a - b, overflow-safe.

    Since n + a = m + b, the ratio equals sqrt(prod_{i<=a}(n+i) * prod_{i<=b}(m+i));
    the products are exact Python integers, so the entry is correct to ~1 ulp.
    Falls back to log-gamma when the product cannot be held in a float.
    """
    prod = 1
    for i in range(1, a + 1):
        prod *= n + i
    for i in range(1, b + 1):
        prod *= m + i
    if prod < 2**1022:
        return math.sqrt(prod) / float(k) ** ((a + b) / 2.0)
    log_entry = (
        math.lgamma(n + a + 1)
        - 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1))
        - 0.5 * (a + b) * math.log(k)
    )
    return math.exp(log_entry)


def quantize_monomial(a: int, b: int, k: int, N: int) -> FockOperator:
    """Berezin-Toeplitz matrix of z^a zbar^b on the truncated basis.

    Entries live on the single diagonal m - n = a - b; the factorial ratios
    are exact-integer products under a square root (log-gamma accumulation
    only for powers too large to hold), so entries stay ~1 ulp accurate for
    n up to 1000 with no overflow.
    """
    if a < 0 or b < 0:
        raise ValueError("monomial powers must be nonnegative")
    if N < a + b:
        raise ValueError("truncation too small for this monomial")
    mat = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        m = n + a - b
        if 0 <= m <= N:
            mat[m, n] = _factorial_ratio_entry(m, n, a, b, k)
    return FockOperator(k=k, N=N, matrix=mat, interior_band=max(a, b))


def quantize(sym: PolySymbol, k: int, N: int) -> FockOperator:
    """Operator of an hbar-graded polynomial symbol: sum k^-l c_ab T_ab."""
    mat = np.zeros((N + 1, N + 1), dtype=np.complex128)
    band = 0
    for ell, tab in sym.orders.items():
        for (a, b), c in tab.items():
            mono = quantize_monomial(a, b, k, N)
            mat += (c * float(k) ** (-ell)) * mono.matrix
            band = max(band, mono.interior_band)
    return FockOperator(k=k, N=N, matrix=mat, interior_band=band)


def harmonic_oscillator(k: int, N: int) -> FockOperator:
    """diag(k^-1 (n + 1/2)); the local model with spectrum {k^-1 (n+1/2)}."""
    n = np.arange(N + 1)
    return FockOperator(k=k, N=N, matrix=np.diag((n + 0.5) / k), interior_band=1)


def verify_composition(a: PolySymbol, b: PolySymbol, k: int, N: int) -> float:
    """Max interior defect between quantize(compose(a, b)) and the matrix product."""
    if N < a.degree() + b.degree() + 2:
        raise ValueError("truncation too small: need N >= combined degree + 2")
    op_a = quantize(a, k, N)
    op_b = quantize(b, k, N)
    op_ab = quantize(compose_symbols(a, b), k, N)
    band = max(op_a.interior_band + op_b.interior_band, op_ab.interior_band)
    cut = N + 1 - band
    product = op_a.matrix @ op_b.matrix
    return float(np.max(np.abs(op_ab.matrix[:cut, :cut] - product[:cut, :cut])))


@dataclass(frozen=True)
class StarBracketReport:
    """Defect sigma_norm(AB) - a0*b0 - (hbar/2i){a0, b0} and its k-scaling."""

    defect: PolySymbol
    evals: dict
    probes: tuple


STAR_PROBES = (0.7 + 0.3j, -0.45 + 0.85j, 1.1 - 0.2j)


def star_bracket_check(a0: PolySymbol, b0: PolySymbol, k_list, probes=STAR_PROBES):
    """Check sigma_norm(AB) = a0 b0 + (hbar/2i){a0,b0} + O(hbar^2).

    a0, b0 are hbar-independent normalized symbols; their operators have
    contravariant symbols (Id + hbar Delta/2)^-1 a0 and likewise for b0.  The
    returned defect has identically vanishing hbar^0 and hbar^1 parts (asserted),
    and its evaluations at the probe points scale as k^-2 across k_list.
    """
    if any(ell > 0 for ell in a0.orders) or any(ell > 0 for ell in b0.orders):
        raise ValueError("star_bracket_check expects hbar-independent inputs")
    cont_a = normalized_symbol(a0, direction="to_contravariant")
    cont_b = normalized_symbol(b0, direction="to_contravariant")
    norm_ab = normalized_symbol(compose_symbols(cont_a, cont_b), direction="to_normalized")
    bracket_term = poisson_bracket(a0, b0).scaled(1.0 / 2.0j).shifted(1)
    defect = norm_ab - (a0 * b0) - bracket_term
    for ell in (0, 1):
        part = defect.order_part(ell)
        worst = max((abs(c) for c in part.values()), default=0.0)
        if worst > 1e-12 * max(1.0, a0.max_abs_coeff() * b0.max_abs_coeff()):
            raise ArithmeticError(
                f"normalized-product expansion broken at hbar order {ell}: {part}"
            )
    evals = {
        int(k): max(abs(defect.value(z, k)) for z in probes) for k in k_list
    }
    return StarBracketReport(defect=defect, evals=evals, probes=tuple(probes))


# ── text format ───────────────────────────────────────────────────────


def load_poly_symbol(path) -> PolySymbol:
    """Lines `hbar_order a b re im`, '#' comments."""
    out = PolySymbol()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{line_no}: expected 'hbar_order a b re im'")
            out._set(
                int(parts[0]), int(parts[1]), int(parts[2]),
                float(parts[3]) + 1j * float(parts[4]),
            )
    return out


def dump_poly_symbol(sym: PolySymbol, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# poly symbol: hbar_order a b re im\n")
        for ell, tab in sorted(sym.orders.items()):
            for (a, b), c in sorted(tab.items()):
                fh.write(f"{ell} {a} {b} {c.real:.17g} {c.imag:.17g}\n")
