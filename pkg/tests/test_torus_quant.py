import math

import numpy as np
import pytest

from bs_spectra import symbols as S
from bs_spectra import torus_quant as TQ

from test_symbols import random_symbol


def params(k):
    return TQ.QuantumTorusParams(k)


# ── clock ───────────────────────────────────────────────────────────


def test_clock_k2_explicit():
    m = TQ.clock(params(2)).matrix
    assert np.allclose(m, np.diag([1, 1j, -1, -1j]), atol=1e-15)


@pytest.mark.parametrize("k", [1, 3, 7])
def test_clock_order(k):
    m = TQ.clock(params(k)).matrix
    assert np.allclose(np.linalg.matrix_power(m, 2 * k), np.eye(2 * k), atol=1e-13)


def test_clock_unitary():
    m = TQ.clock(params(3)).matrix
    assert np.max(np.abs(m @ m.conj().T - np.eye(6))) <= 1e-15


def test_clock_shift_unitary_large_k():
    for op in (TQ.clock(params(1000)), TQ.shift(params(1000))):
        m = op.matrix
        assert np.max(np.abs(m @ m.conj().T - np.eye(2000))) <= 1e-14


# ── shift ───────────────────────────────────────────────────────────


def test_shift_k1_explicit():
    assert np.array_equal(TQ.shift(params(1)).matrix, np.array([[0, 1], [1, 0]], dtype=complex))


@pytest.mark.parametrize("k", [1, 2, 5])
def test_shift_cyclic_order(k):
    ell = TQ.shift(params(k)).matrix
    assert np.allclose(np.linalg.matrix_power(ell, 2 * k), np.eye(2 * k), atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 9, 40])
def test_clock_shift_commutation(k):
    # direct matrix-multiplication oracle for M L = w L M
    p = params(k)
    m, ell = TQ.clock(p).matrix, TQ.shift(p).matrix
    assert np.max(np.abs(m @ ell - p.w * (ell @ m))) <= 1e-14


# ── quantization ────────────────────────────────────────────────────


def test_quantize_constant():
    op = TQ.weyl_quantize(S.TrigSymbol.constant(2.5), params(4))
    assert np.allclose(op.matrix, 2.5 * np.eye(8), atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 10, 100])
def test_quantize_harper_equals_display(k):
    quantized = TQ.weyl_quantize(S.TrigSymbol.harper(), params(k)).matrix
    display = TQ.harper(params(k)).matrix
    assert np.max(np.abs(quantized - display)) <= 1e-14


def test_mixed_mode_word_adjoint():
    # S(1,1)* = S(-1,-1), checked by direct multiplication of the factor matrices
    p = params(6)
    m, ell = TQ.clock(p).matrix, TQ.shift(p).matrix
    w_half = np.exp(1j * math.pi / (2 * p.k))
    s11 = w_half * (ell @ m)
    s_m1m1 = w_half * (ell.conj().T @ m.conj().T)
    assert np.max(np.abs(s11.conj().T - s_m1m1)) <= 1e-14
    word = TQ.weyl_quantize(S.TrigSymbol([(1, 1, 1.0), (-1, -1, 1.0)]), p).matrix
    assert np.max(np.abs(word - (s11 + s11.conj().T))) <= 1e-14


@pytest.mark.parametrize("k", [5, 50])
def test_quantize_hermitian_random_symbols(k, rng):
    p = params(k)
    for _ in range(50):
        sym = random_symbol(rng, degree=3)
        op = TQ.weyl_quantize(sym, p)
        assert op.hermiticity_defect() <= 1e-13 * max(1.0, np.max(np.abs(op.matrix)))


def test_quantize_matches_word_calculus(rng):
    # quantization of a single mode pair is the clock/shift word built by hand
    p = params(7)
    m_mat, l_mat = TQ.clock(p).matrix, TQ.shift(p).matrix
    for m, n in ((2, 1), (1, -2), (-3, 2)):
        sym = S.TrigSymbol([(m, n, 0.4 + 0.9j), (-m, -n, 0.4 - 0.9j)])
        op = TQ.weyl_quantize(sym, p).matrix
        lm = np.linalg.matrix_power(l_mat if m >= 0 else l_mat.conj().T, abs(m))
        mn = np.linalg.matrix_power(m_mat if n >= 0 else m_mat.conj().T, abs(n))
        word = p.w ** (m * n / 2.0) * (lm @ mn)
        expected = (0.4 + 0.9j) * word + ((0.4 + 0.9j) * word).conj().T
        assert np.max(np.abs(op - expected)) <= 1e-13


# ── harper matrix ───────────────────────────────────────────────────


def test_harper_k1_degenerate_dimension():
    # dim 2: sub/superdiagonal and corners collide and entries add
    mat = TQ.harper(params(1)).matrix
    assert np.allclose(mat, np.array([[2.0, 2.0], [2.0, -2.0]]), atol=1e-14)
    oracle = (
        TQ.clock(params(1)).matrix
        + TQ.clock(params(1)).matrix.conj().T
        + TQ.shift(params(1)).matrix
        + TQ.shift(params(1)).matrix.conj().T
    )
    assert np.allclose(mat, oracle, atol=1e-14)


def test_harper_entries():
    mat = TQ.harper(params(2)).matrix
    assert mat[0, 0] == pytest.approx(2.0)
    assert TQ.harper(params(50)).matrix.trace() == pytest.approx(0.0, abs=1e-12)


def test_operator_csv_roundtrip(tmp_path):
    op = TQ.harper(params(3))
    path = tmp_path / "op.csv"
    TQ.dump_operator_csv(op, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "row,col,re,im"
    rebuilt = np.zeros((6, 6), dtype=complex)
    for line in lines[1:]:
        r, c, re, im = line.split(",")
        rebuilt[int(r), int(c)] = float(re) + 1j * float(im)
    assert np.array_equal(rebuilt, op.matrix)
