"""Clock-and-shift quantization of trigonometric symbols on the torus.

The quantum space at inverse Planck parameter k has dimension 2k.  The clock
matrix M = diag(w^l) with w = exp(i*pi/k) and the cyclic shift L satisfy
M L = w L M; a Fourier mode exp(2*pi*i*(m*q + n*p)) maps to the symmetrized
word w^(m*n/2) L^m M^n, the unique single-phase ordering under which real
symbols quantize to Hermitian matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symbols import TrigSymbol

HERMITICITY_TOL = 1e-13


@dataclass(frozen=True)
class QuantumTorusParams:
    """k with hbar = 1/k, dimension 2k, and the root of unity w = exp(i*pi/k)."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")

    @property
    def dim(self):
        return 2 * self.k

    @property
    def hbar(self):
        return 1.0 / self.k

    @property
    def w(self):
        return complex(np.exp(1j * math.pi / self.k))


@dataclass(frozen=True)
class TorusOperator:
    """A dim x dim matrix on the invariant-section basis, tagged by its symbol."""

    params: QuantumTorusParams
    matrix: np.ndarray
    symbol_tag: TrigSymbol | None = None

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def clock(params: QuantumTorusParams) -> TorusOperator:
    """M = diag(w^0, ..., w^(2k-1)); eigenbasis of the order-2k clock rotation."""
    ell = np.arange(params.dim)
    diag = np.exp(1j * math.pi * ell / params.k)
    return TorusOperator(params, np.diag(diag))


def shift(params: QuantumTorusParams) -> TorusOperator:
    """L with L e_l = e_(l+1 mod 2k); unitary cyclic permutation."""
    d = params.dim
    mat = np.zeros((d, d), dtype=np.complex128)
    mat[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    return TorusOperator(params, mat)


def _mode_word(params: QuantumTorusParams, m: int, n: int) -> np.ndarray:
    """w^(m*n/2) L^m M^n, built entrywise: column l carries w^(m*n/2 + n*l) at row l+m."""
    d = params.dim
    ell = np.arange(d)
    # phases in units of pi/(2k): exact integers, so entries are exact roots of unity
    phase = np.exp(1j * math.pi * (m * n + 2 * n * ell) / (2 * params.k))
    mat = np.zeros((d, d), dtype=np.complex128)
    mat[(ell + m) % d, ell] = phase
    return mat


def weyl_quantize(sym: TrigSymbol, params: QuantumTorusParams) -> TorusOperator:
    """Quantize a real symbol: sum of c_{m,n} w^(m*n/2) L^m M^n over its modes."""
    d = params.dim
    out = np.zeros((d, d), dtype=np.complex128)
    for mode in sym.modes:
        out += mode.coeff * _mode_word(params, mode.m, mode.n)
    op = TorusOperator(params, out, symbol_tag=sym)
    defect = op.hermiticity_defect()
    if defect > HERMITICITY_TOL * max(1.0, float(np.max(np.abs(out)))):
        raise ValueError(f"quantization of a non-real symbol (hermiticity defect {defect:.3e})")
    return op


def harper(params: QuantumTorusParams) -> TorusOperator:
    """The 2k x 2k matrix with diagonal 2 cos(l*pi/k), sub/super-diagonal and corner ones.

    For k = 1 the sub/super-diagonal and the corners coincide and the entries
    add, matching M + M* + L + L*.
    """
    d = params.dim
    mat = np.zeros((d, d), dtype=np.complex128)
    ell = np.arange(d)
    mat[ell, ell] = 2.0 * np.cos(ell * math.pi / params.k)
    for l in range(d):
        mat[(l + 1) % d, l] += 1.0
        mat[(l - 1) % d, l] += 1.0
    return TorusOperator(params, mat, symbol_tag=TrigSymbol.harper())


def dump_operator_csv(op: TorusOperator, path):
    """CSV dump `row,col,re,im` of the nonzero entries, row-major, with header."""
    lines = ["row,col,re,im"]
    mat = op.matrix
    rows, cols = np.nonzero(mat)
    for r, c in zip(rows, cols):
        v = mat[r, c]
        lines.append(f"{r},{c},{v.real:.17g},{v.imag:.17g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
