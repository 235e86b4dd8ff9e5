"""Shared fixtures."""

import numpy as np
import pytest

from jt_cqed.dynamics import DissipationParams, build_liouvillian, steady_state
from jt_cqed.model import ScaledParams, build_scaled_hamiltonian
from jt_cqed.operators import make_space


@pytest.fixture
def space22():
    return make_space(2, 2)


@pytest.fixture
def default_rates():
    return DissipationParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scaled_system():
    """Build (L, rho_ss) for the scaled model at given (k_eff, Delta, dims, rates)."""

    def _build(k_eff, delta, dims=(2, 2), rates=None):
        space = make_space(*dims)
        H = build_scaled_hamiltonian(ScaledParams(k_eff=k_eff, Delta=delta), space)
        L = build_liouvillian(H, rates or DissipationParams())
        return L, steady_state(L)

    return _build


@pytest.fixture
def random_rho(rng):
    """Random full-rank density matrices of a given size."""

    def _make(n):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = x @ x.conj().T
        return rho / np.trace(rho).real

    return _make
