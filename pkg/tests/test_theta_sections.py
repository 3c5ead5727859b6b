import math

import numpy as np
import pytest

from bs_spectra import symbols as S
from bs_spectra import theta_sections as T
from bs_spectra import torus_quant as TQ


@pytest.fixture(scope="module")
def basis_k10():
    return T.build_basis(10, resolution=512)


# ── construction and relations ──────────────────────────────────────


def test_basis_k1_two_sections_orthonormal():
    basis = T.build_basis(1, resolution=256)
    assert basis.dim == 2
    assert T.gram_defect(basis) <= 1e-6


def test_relations_random_points(rng):
    # defining relations at 100 random points, all sections
    lattice, clock, shift = T._relation_residuals(10, rng, n_points=100)
    assert lattice <= 1e-10
    assert clock <= 1e-10
    assert shift <= 1e-10


def test_shift_relation_closes_cyclically(rng):
    # the half-step p-translation maps section l to section l+1; iterating it
    # 2k times lands back on psi_0 with global phase 1
    k = 4
    q = rng.random(50)
    p = rng.random(50)
    for ell in range(2 * k):
        stepped = np.exp(-1j * math.pi * q) * T.theta_section_values(
            k, ell, q, p - 0.5 / k
        )
        succ = T.theta_section_values(k, (ell + 1) % (2 * k), q, p)
        assert np.max(np.abs(stepped - succ)) <= 1e-9
    # full composition in closed form: accumulated phase times p -> p - 1
    chain = np.exp(-1j * 2 * math.pi * k * q) * T.theta_section_values(k, 0, q, p - 1.0)
    base = T.theta_section_values(k, 0, q, p)
    assert np.max(np.abs(chain - base)) <= 1e-9


def test_basis_rejects_large_k():
    with pytest.raises(ValueError, match="cap"):
        T.build_basis(51)


def test_relation_gate_rejects_broken_construction(monkeypatch, rng):
    original = T.theta_section_values

    def broken(k, ell, q, p):
        return original(k, ell, q, p) + 1e-4

    monkeypatch.setattr(T, "theta_section_values", broken)
    with pytest.raises(ArithmeticError, match="rejected"):
        T.build_basis(2, resolution=64)


# ── orthonormality ──────────────────────────────────────────────────


def test_gram_defect_resolution_512(basis_k10):
    assert T.gram_defect(basis_k10) <= 1e-6


def test_gram_defect_k20():
    basis = T.build_basis(20, resolution=512)
    assert T.gram_defect(basis) <= 1e-6


def test_gram_defect_halves_or_at_floor():
    # quadrature is spectrally exact here, so past the Nyquist cliff the
    # defect sits at the roundoff floor; halving is only demanded above it
    d1 = T.gram_defect(T.build_basis(6, resolution=256))
    d2 = T.gram_defect(T.build_basis(6, resolution=512))
    assert d2 <= max(0.5 * d1, 1e-10)


# ── eigenfunction fields ────────────────────────────────────────────


def test_basis_vector_field_mass(basis_k10):
    v = np.zeros(20, dtype=complex)
    v[0] = 1.0
    field = T.eigenfunction_modulus(basis_k10, v)
    assert np.max(field) > 0
    mass = float(np.sum(field**2) * 4 * math.pi / 512**2)
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_zero_vector_zero_field(basis_k10):
    field = T.eigenfunction_modulus(basis_k10, np.zeros(20))
    assert np.max(field) == 0.0


def test_dimension_mismatch(basis_k10):
    with pytest.raises(ValueError, match="length"):
        T.eigenfunction_modulus(basis_k10, np.ones(7))
    with pytest.raises(ValueError, match="length"):
        T.eigenfunction_field(5, np.ones(3), resolution=32)


def test_streaming_matches_basis(basis_k10, rng):
    v = rng.normal(size=20) + 1j * rng.normal(size=20)
    a = T.eigenfunction_modulus(basis_k10, v)
    b = T.eigenfunction_field(10, v, resolution=512)
    assert np.max(np.abs(a - b)) <= 1e-11 * np.max(a)


def test_harper_ground_state_localizes_at_minimum(harper_spectrum):
    spec = harper_spectrum(20, vectors=True)
    basis = T.build_basis(20, resolution=256)
    field = T.eigenfunction_modulus(basis, spec.eigenvectors[:, 0])
    i, j = np.unravel_index(np.argmax(field), field.shape)
    q, p = i / 256, j / 256
    dist = math.hypot(
        min(abs(q - 0.5), 1 - abs(q - 0.5)), min(abs(p - 0.5), 1 - abs(p - 0.5))
    )
    assert dist <= 0.1


# ── concentration on level sets ─────────────────────────────────────


def test_concentration_uniform_field_full_tube(harper_symbol):
    field = np.ones((64, 64))
    # delta large enough that the tube covers the whole torus, floored
    # gradient scale included
    frac = T.mass_concentration(field, harper_symbol, 0.0, delta=1e4)
    assert frac == pytest.approx(1.0)


def test_concentration_empty_tube(harper_symbol):
    with pytest.raises(ValueError, match="empty tube"):
        T.mass_concentration(np.ones((32, 32)), harper_symbol, 50.0, delta=1e-6)


def test_concentration_harper_level(harper_symbol, harper_spectrum):
    e_level = harper_symbol.value(0.7, 0.6)
    spec = harper_spectrum(100, vectors=True)
    idx = int(np.argmin(np.abs(spec.eigenvalues - e_level)))
    field = T.eigenfunction_field(100, spec.eigenvectors[:, idx], resolution=256)
    frac = T.mass_concentration(field, harper_symbol, e_level, delta=0.1)
    assert frac >= 0.7


def test_concentration_monotone_in_k(harper_symbol, harper_spectrum):
    e_level = harper_symbol.value(0.7, 0.6)
    fracs = []
    for k in (50, 100, 200):
        spec = harper_spectrum(k, vectors=True)
        idx = int(np.argmin(np.abs(spec.eigenvalues - e_level)))
        field = T.eigenfunction_field(k, spec.eigenvectors[:, idx], resolution=256)
        fracs.append(T.mass_concentration(field, harper_symbol, e_level, delta=0.03))
    assert fracs[0] <= fracs[1] <= fracs[2]


# ── CSV ─────────────────────────────────────────────────────────────


def test_field_csv(tmp_path, basis_k10):
    v = np.zeros(20, dtype=complex)
    v[3] = 1.0
    field = T.eigenfunction_modulus(basis_k10, v)[:16, :16]
    path = tmp_path / "field.csv"
    T.dump_field_csv(field, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "q,p,value"
    assert len(lines) == 16 * 16 + 1
