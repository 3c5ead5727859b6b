import numpy as np
import pytest

from bs_spectra import bohr_sommerfeld as bs
from bs_spectra import spectral, symbols, torus_quant


@pytest.fixture(scope="session")
def harper_spectrum():
    """Cached Harper spectra keyed by (k, with_vectors); vectors imply values."""
    cache = {}

    def get(k, vectors=False):
        if (k, True) in cache:
            return cache[(k, True)]
        if (k, vectors) not in cache:
            op = torus_quant.harper(torus_quant.QuantumTorusParams(k))
            cache[(k, vectors)] = spectral.eigh(op, want_vectors=vectors)
        return cache[(k, vectors)]

    return get


@pytest.fixture(scope="session")
def harper_symbol():
    return symbols.TrigSymbol.harper()


@pytest.fixture(scope="session")
def harper_profile(harper_symbol):
    """Action profile up to E_cap = -1, production resolution."""
    return bs.build_action_profile(
        harper_symbol, e_cap=-1.0, grid_size=200, resolution=1024
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260811)
