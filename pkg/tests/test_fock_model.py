import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bs_spectra import fock_model as F


def mono(a, b, c=1.0):
    return F.PolySymbol.monomial(a, b, c)


# ── Gaussian moment oracle for matrix elements ──────────────────────
#
# <z^a zbar^b phi_n, phi_m> with phi_n ~ z^n against the weight exp(-k|z|^2):
# angular integration forces n + a = m + b and leaves ratios of radial
# integrals; the overall measure constant cancels after normalizing
# <phi_n, phi_n> = 1, so the oracle is a pure ratio of quadratures.


def radial_moment(alpha, k):
    # integrand is negligible beyond r_cut; finite interval keeps quad's
    # error estimate honest
    r_cut = math.sqrt((2 * alpha + 100.0) / k)
    val, err = quad(
        lambda r: r ** (2 * alpha + 1) * math.exp(-k * r * r),
        0.0,
        r_cut,
        limit=400,
        epsabs=1e-14,
        epsrel=1e-14,
    )
    assert err < 1e-11 * val
    return val


def oracle_entry(m, n, a, b, k):
    if n + a != m + b:
        return 0.0
    return radial_moment((n + a + m + b) // 2, k) / math.sqrt(
        radial_moment(n, k) * radial_moment(m, k)
    )


def test_quantize_monomial_against_moment_oracle():
    k, big_n = 3, 12
    for a in range(3):
        for b in range(3):
            mat = F.quantize_monomial(a, b, k, big_n).matrix
            for n in range(big_n + 1):
                m = n + a - b
                if 0 <= m <= big_n:
                    assert mat[m, n] == pytest.approx(oracle_entry(m, n, a, b, k), rel=1e-10)


def test_creation_annihilation_entries():
    k, big_n = 10, 8
    create = F.quantize_monomial(1, 0, k, big_n).matrix
    destroy = F.quantize_monomial(0, 1, k, big_n).matrix
    n = np.arange(big_n)
    assert np.allclose(create[n + 1, n], np.sqrt((n + 1) / k), atol=1e-14)
    assert np.allclose(destroy[n, n + 1], np.sqrt((n + 1) / k), atol=1e-14)
    diag = F.quantize_monomial(1, 1, k, big_n).matrix
    assert np.allclose(np.diag(diag), (np.arange(big_n + 1) + 1) / k, atol=1e-14)


def test_quantize_identity():
    assert np.array_equal(F.quantize_monomial(0, 0, 5, 6).matrix, np.eye(7))


def test_adjoint_symmetry_exact():
    for a, b in ((1, 0), (2, 1), (3, 0), (2, 2)):
        ta = F.quantize_monomial(a, b, 7, 40).matrix
        tb = F.quantize_monomial(b, a, 7, 40).matrix
        assert np.array_equal(ta.T, tb)


def test_log_space_large_n():
    # relative accuracy of the factorial ratios up to n = 1000
    mat = F.quantize_monomial(1, 0, 2, 1000).matrix
    n = 999
    assert mat[n + 1, n] == pytest.approx(math.sqrt((n + 1) / 2.0), rel=1e-12)


# ── harmonic oscillator ─────────────────────────────────────────────


def test_harmonic_oscillator_spectrum():
    h = F.harmonic_oscillator(1, 2)
    assert np.allclose(np.diag(h.matrix), [0.5, 1.5, 2.5])
    vals = np.linalg.eigvalsh(F.harmonic_oscillator(9, 30).matrix)
    assert np.allclose(np.sort(vals), (np.arange(31) + 0.5) / 9.0, atol=1e-15)


def test_harmonic_oscillator_is_shifted_number_operator():
    # identity is exact in real arithmetic; floats differ by rounding ulps
    k, big_n = 6, 20
    t11 = F.quantize_monomial(1, 1, k, big_n).matrix
    h = F.harmonic_oscillator(k, big_n).matrix
    assert np.max(np.abs(h - (t11 - np.eye(big_n + 1) / (2 * k)))) <= 1e-13


def test_harmonic_oscillator_positive_selfadjoint():
    h = F.harmonic_oscillator(4, 15).matrix
    assert np.array_equal(h, h.conj().T)
    assert np.min(np.diag(h)) > 0


# ── symbol calculus vs sympy oracle ─────────────────────────────────


def sympy_heat(expr, z, zb, order=6):
    """exp(hbar * d_z d_zb) as a truncated sympy series (exact on polynomials)."""
    h = sympy.symbols("hbar")
    total = sympy.S.Zero
    term = expr
    for ell in range(order):
        total += h**ell / sympy.factorial(ell) * term
        term = sympy.diff(term, z, 1, zb, 1)
    return sympy.expand(total)


def poly_to_sympy(sym, z, zb):
    h = sympy.symbols("hbar")
    total = sympy.S.Zero
    for ell, tab in sym.orders.items():
        for (a, b), c in tab.items():
            total += sympy.nsimplify(c, rational=True) * h**ell * z**a * zb**b
    return sympy.expand(total)


@pytest.mark.parametrize(
    "a,b", [(1, 1), (1, 0), (2, 2), (3, 1), (2, 3)]
)
def test_covariant_against_sympy(a, b):
    z, zb = sympy.symbols("z zbar")
    ours = poly_to_sympy(F.covariant_from_contravariant(mono(a, b)), z, zb)
    reference = sympy_heat(z**a * zb**b, z, zb)
    assert sympy.simplify(ours - reference) == 0


def test_covariant_examples():
    assert F.covariant_from_contravariant(mono(1, 1)).orders == {
        0: {(1, 1): 1.0 + 0j},
        1: {(0, 0): 1.0 + 0j},
    }
    assert F.covariant_from_contravariant(mono(1, 0)).orders == {0: {(1, 0): 1.0 + 0j}}
    assert F.covariant_from_contravariant(mono(2, 2)).orders == {
        0: {(2, 2): 1.0 + 0j},
        1: {(1, 1): 4.0 + 0j},
        2: {(0, 0): 2.0 + 0j},
    }


def test_heat_round_trip_exact(rng):
    for _ in range(20):
        sym = F.PolySymbol(
            [(int(rng.integers(0, 4)), int(rng.integers(0, 4)), complex(rng.normal(), rng.normal()))
             for _ in range(4)]
        )
        back = F.contravariant_from_covariant(F.covariant_from_contravariant(sym))
        assert (back - sym).is_zero(tol=1e-12)


def test_compose_examples():
    assert F.compose_symbols(mono(0, 1), mono(1, 0)).orders == {0: {(1, 1): 1.0 + 0j}}
    assert F.compose_symbols(mono(1, 0), mono(0, 1)).orders == {
        0: {(1, 1): 1.0 + 0j},
        1: {(0, 0): -1.0 + 0j},
    }
    anything = F.PolySymbol([(2, 1, 0.3 + 1j), (0, 2, -2.0)])
    assert (F.compose_symbols(mono(0, 0), anything) - anything).is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
def test_composition_matrix_oracle(a1, b1, a2, b2):
    # brute-force matrix product oracle, interior indices only
    defect = F.verify_composition(mono(a1, b1), mono(a2, b2), k=7, N=40)
    assert defect <= 1e-12


def test_composition_all_pairs_degree_3():
    pairs = [(a, b) for a in range(4) for b in range(4) if a + b <= 3]
    for a1, b1 in pairs:
        for a2, b2 in pairs:
            defect = F.verify_composition(mono(a1, b1), mono(a2, b2), k=10, N=60)
            assert defect <= 1e-12, (a1, b1, a2, b2)


def test_composition_truncation_guard():
    with pytest.raises(ValueError, match="truncation"):
        F.verify_composition(mono(2, 1), mono(1, 2), k=5, N=7)


def test_commutator_ladder():
    k, big_n = 10, 60
    zq = F.quantize_monomial(1, 0, k, big_n).matrix
    zbq = F.quantize_monomial(0, 1, k, big_n).matrix
    comm = zq @ zbq - zbq @ zq
    cut = big_n - 1
    assert np.max(np.abs(comm[:cut, :cut] + np.eye(cut) / k)) <= 1e-12
    # matches the compose-symbol prediction (z zbar - hbar) - (zbar z)
    pred = F.compose_symbols(mono(1, 0), mono(0, 1)) - F.compose_symbols(mono(0, 1), mono(1, 0))
    assert pred.orders == {1: {(0, 0): -1.0 + 0j}}


# ── normalized symbol ───────────────────────────────────────────────


def test_normalized_symbol_oscillator():
    cont = F.PolySymbol.from_orders({0: {(1, 1): 1.0}, 1: {(0, 0): -0.5}})
    norm = F.normalized_symbol(cont, direction="to_normalized")
    assert norm.orders == {0: {(1, 1): 1.0 + 0j}}


def test_normalized_symbol_constant():
    c = mono(0, 0, 3.25)
    assert F.normalized_symbol(c, "to_normalized").orders == c.orders
    assert F.normalized_symbol(c, "to_contravariant").orders == c.orders


def test_normalized_round_trip(rng):
    for _ in range(15):
        sym = F.PolySymbol(
            [(int(rng.integers(0, 3)), int(rng.integers(0, 3)), complex(rng.normal()))
             for _ in range(3)]
        )
        there = F.normalized_symbol(sym, "to_normalized")
        back = F.normalized_symbol(there, "to_contravariant")
        assert (back - sym).is_zero(tol=1e-12)


def test_normalized_symbol_bad_direction():
    with pytest.raises(ValueError):
        F.normalized_symbol(mono(1, 1), "sideways")


# ── star bracket ────────────────────────────────────────────────────


def test_poisson_bracket_canonical_pair():
    x = F.PolySymbol([(1, 0, 2**-0.5), (0, 1, 2**-0.5)])
    xi = F.PolySymbol([(1, 0, 1j * 2**-0.5), (0, 1, -1j * 2**-0.5)])
    bracket = F.poisson_bracket(x, xi)
    assert bracket.order_part(0) == pytest.approx({(0, 0): -1.0})


def test_star_bracket_canonical_pair_reproduces_commutator():
    # sigma_norm(X Xi) - sigma_norm(Xi X) = (hbar/i){x, xi} = i hbar,
    # the symbol side of [quantize(z), quantize(zbar)] = -1/k
    x = F.PolySymbol([(1, 0, 2**-0.5), (0, 1, 2**-0.5)])
    xi = F.PolySymbol([(1, 0, 1j * 2**-0.5), (0, 1, -1j * 2**-0.5)])
    rep_a = F.star_bracket_check(x, xi, [10])
    rep_b = F.star_bracket_check(xi, x, [10])
    assert rep_a.defect.is_zero(tol=1e-13) and rep_b.defect.is_zero(tol=1e-13)
    cont_x = F.normalized_symbol(x, "to_contravariant")
    cont_xi = F.normalized_symbol(xi, "to_contravariant")
    comm = F.compose_symbols(cont_x, cont_xi) - F.compose_symbols(cont_xi, cont_x)
    assert comm.order_part(1) == pytest.approx({(0, 0): 1j})


def test_star_bracket_equal_arguments():
    rep = F.star_bracket_check(mono(1, 1), mono(1, 1), [10, 100])
    assert rep.defect.order_part(0) == {}
    assert rep.defect.order_part(1) == {}
    assert rep.evals[10] / rep.evals[100] == pytest.approx(100.0, rel=1e-9)


def test_star_bracket_k2_scaling():
    rep = F.star_bracket_check(mono(1, 1), mono(1, 0), [10, 100])
    # this pair has identically zero defect (verified symbolically)
    assert rep.defect.is_zero(tol=1e-13)
    for a0, b0 in ((mono(1, 1), mono(1, 1)), (mono(2, 1), mono(1, 1)), (mono(2, 2), mono(1, 1))):
        rep = F.star_bracket_check(a0, b0, [10, 100])
        ratio = rep.evals[10] / rep.evals[100]
        assert 80.0 <= ratio <= 120.0


def test_star_bracket_rejects_graded_input():
    graded = F.PolySymbol.from_orders({1: {(1, 1): 1.0}})
    with pytest.raises(ValueError, match="hbar-independent"):
        F.star_bracket_check(graded, mono(1, 0), [10])


# ── text format ─────────────────────────────────────────────────────


def test_poly_symbol_file_roundtrip(tmp_path):
    sym = F.PolySymbol.from_orders({0: {(2, 1): 1.5 - 0.5j}, 2: {(0, 0): 3.0}})
    path = tmp_path / "poly.txt"
    F.dump_poly_symbol(sym, path)
    back = F.load_poly_symbol(path)
    assert (back - sym).is_zero(tol=1e-15)
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 1 0.5\n")
    with pytest.raises(ValueError, match="expected"):
        F.load_poly_symbol(bad)
