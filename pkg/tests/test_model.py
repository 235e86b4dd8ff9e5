import math
from fractions import Fraction

import numpy as np
import pytest

from jt_cqed.errors import ParameterError
from jt_cqed.model import (
    CircuitParams,
    HardwareParams,
    JTParams,
    ScaledParams,
    build_circuit_hamiltonian,
    build_effective_hamiltonian,
    build_eta,
    build_interaction_hamiltonian,
    build_jt_hamiltonian,
    build_scaled_hamiltonian,
    circuit_to_jt,
    condition_residual,
    coupling_from_hardware,
    effective_mode_decomposition,
    eigen_bands,
    frequency_ratio,
    jt_to_circuit,
    lowest_eigenvalues,
    moments,
    scaled_to_circuit,
    scaled_to_jt,
)
from jt_cqed.operators import (
    Operator,
    annihilation,
    commutator,
    identity,
    make_space,
    number,
    pauli,
)

EPS = np.finfo(float).eps


def _all_eigs(H):
    return np.sort(np.linalg.eigvalsh(H.matrix))


def _interior(space, mode=1):
    """Basis indices whose occupation of `mode` is below the truncation edge."""
    d = space.mode_dims[mode - 1]
    return [space.index(*lab) for lab in space.labels() if lab[mode] < d - 1]


def test_decoupled_circuit_spectrum(space22):
    p = CircuitParams(Omega=1, Omega1=1, Omega2=1, lambda1=0, lambda2=0, J=0)
    vals = _all_eigs(build_circuit_hamiltonian(p, space22))
    assert vals == pytest.approx([-0.5, 0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 2.5], abs=1e-12)


def test_weak_rabi_doublet(space22):
    p = CircuitParams(Omega=1, Omega1=1, Omega2=1, lambda1=0.05, lambda2=0, J=0)
    vals = lowest_eigenvalues(build_circuit_hamiltonian(p, space22), 4)
    assert vals[1] == pytest.approx(0.45, abs=3e-3)
    assert vals[3] == pytest.approx(0.55, abs=3e-3)


def test_circuit_hamiltonian_is_hermitian(space22):
    p = CircuitParams(Omega=0.9, Omega1=1.1, Omega2=0.7, lambda1=0.8, lambda2=-0.3, J=-0.25)
    assert build_circuit_hamiltonian(p, space22).hermiticity_error() == 0.0


def test_scaled_matches_circuit(space22):
    p = ScaledParams(k_eff=0.7, Delta=0.6)
    H1 = build_scaled_hamiltonian(p, space22)
    H2 = build_circuit_hamiltonian(scaled_to_circuit(p), space22)
    assert np.max(np.abs(H1.matrix - H2.matrix)) == 0.0


def test_scaled_ground_energy(space22):
    H = build_scaled_hamiltonian(ScaledParams(k_eff=0, Delta=0), space22)
    assert lowest_eigenvalues(H, 1) == pytest.approx([-0.5])
    assert lowest_eigenvalues(H, 5) == pytest.approx([-0.5, 0.5, 0.5, 0.5, 1.5], abs=1e-12)


def test_pure_rabi_triple(space22):
    k_eff = 0.1
    vals = lowest_eigenvalues(build_scaled_hamiltonian(ScaledParams(k_eff, 0.0), space22), 5)
    # truncated closed forms of the parity sectors
    assert vals[0] == pytest.approx(0.5 - math.sqrt(1 + k_eff ** 2), abs=1e-12)
    assert vals[1] == pytest.approx(0.5 - k_eff, abs=1e-12)
    assert vals[2] == pytest.approx(1.5 - math.sqrt(1 + k_eff ** 2), abs=1e-12)
    assert vals[3] == pytest.approx(0.5 + k_eff, abs=1e-12)
    assert vals[2] == pytest.approx(0.5, abs=5e-3)


def test_rabi_triple_spreads_with_delta(space22):
    deltas = np.linspace(0.05, 0.5, 10)
    bands = eigen_bands(
        lambda d: build_scaled_hamiltonian(ScaledParams(0.1, d), space22), deltas, 4
    )
    spread = bands[:, 3] - bands[:, 1]
    assert np.all(np.diff(spread) > 0)
    # triple stays separated from the ground state and the next manifold
    assert np.all(bands[:, 1] > bands[:, 0] + 0.5)


def test_scaled_params_validation():
    with pytest.raises(ParameterError):
        ScaledParams(k_eff=0.1, Delta=2.0)
    with pytest.raises(ParameterError):
        ScaledParams(k_eff=-0.1, Delta=0.0)
    assert ScaledParams(k_eff=0.1, Delta=1.0).J == 0.5


def test_jt_decoupled_spectrum(space22):
    p = JTParams(omega1=1.5, omega2=0.5, k1=0, k2=0)
    expected = sorted(n1 * 1.5 + n2 * 0.5 + s for n1 in (0, 1) for n2 in (0, 1) for s in (0.5, -0.5))
    assert _all_eigs(build_jt_hamiltonian(p, space22)) == pytest.approx(expected, abs=1e-12)


def test_jt_hamiltonian_is_hermitian(space22):
    p = JTParams(omega1=1.3, omega2=0.4, k1=0.6, k2=0.2)
    assert build_jt_hamiltonian(p, space22).hermiticity_error() == 0.0


def test_degenerate_jt_converges_to_scaled_form():
    k = 0.5 / math.sqrt(2)
    jt = JTParams(omega1=1, omega2=1, k1=k, k2=k)
    sc = ScaledParams(k_eff=math.sqrt(2) * k, Delta=0)
    gaps = []
    for d in (2, 3, 4):
        space = make_space(d, d)
        e_jt = lowest_eigenvalues(build_jt_hamiltonian(jt, space), 1)[0]
        e_sc = lowest_eigenvalues(build_scaled_hamiltonian(sc, space), 1)[0]
        gaps.append(abs(e_jt - e_sc))
    assert gaps[2] < gaps[1] < gaps[0]


def test_three_to_one_jt_converges_to_scaled_form():
    k = 1 / math.sqrt(2)
    jt = JTParams(omega1=1.5, omega2=0.5, k1=k, k2=k)
    sc = ScaledParams(k_eff=1.0, Delta=1.0)
    assert scaled_to_jt(sc).omega1 == pytest.approx(jt.omega1)
    gaps = []
    # d = 2 agrees by accident; the trend starts at d = 3
    for d in (3, 4, 5):
        space = make_space(d, d)
        e_jt = lowest_eigenvalues(build_jt_hamiltonian(jt, space), 1)[0]
        e_sc = lowest_eigenvalues(build_scaled_hamiltonian(sc, space), 1)[0]
        gaps.append(abs(e_jt - e_sc))
    assert gaps[2] < gaps[1] < gaps[0]
    assert gaps[2] < 0.01


def test_jt_params_validation():
    with pytest.raises(ParameterError):
        JTParams(omega1=0, omega2=1, k1=0.1, k2=0.1)
    with pytest.raises(ParameterError):
        JTParams(omega1=1, omega2=1, k1=-0.1, k2=0.1)


def test_effective_mode_symmetric_case():
    em = effective_mode_decomposition(JTParams(omega1=1.5, omega2=0.5, k1=1, k2=1))
    assert em.k_eff == pytest.approx(math.sqrt(2))
    assert em.omega_eff == pytest.approx(1.0)
    assert em.omega_prime == pytest.approx(1.0)
    assert em.c2 == pytest.approx(0.5)
    assert em.A == pytest.approx(np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_effective_mode_asymmetric_case():
    p = JTParams(omega1=1, omega2=2, k1=2, k2=1)
    em = effective_mode_decomposition(p)
    assert em.k_eff == pytest.approx(math.sqrt(5))
    assert em.omega_eff == pytest.approx(6 / 5)
    assert em.omega_prime == pytest.approx(9 / 5)
    assert em.c2 == pytest.approx(-2 / 5)
    assert em.c2 ** 2 == pytest.approx(moments(p, 2) - moments(p, 1) ** 2)


def test_effective_mode_degenerate_frequencies():
    em = effective_mode_decomposition(JTParams(omega1=0.8, omega2=0.8, k1=0.3, k2=1.1))
    assert em.c2 == 0.0
    assert em.omega_eff == pytest.approx(0.8)
    assert em.omega_prime == pytest.approx(0.8)


def test_effective_mode_rejects_zero_coupling():
    with pytest.raises(ParameterError):
        effective_mode_decomposition(JTParams(omega1=1, omega2=0.5, k1=0, k2=0))


def test_effective_mode_identities_random(rng):
    for _ in range(200):
        w1, w2 = rng.uniform(0.1, 3.0, size=2)
        k1, k2 = rng.uniform(0.01, 2.0, size=2)
        p = JTParams(omega1=w1, omega2=w2, k1=k1, k2=k2)
        em = effective_mode_decomposition(p)
        assert em.k_eff ** 2 == pytest.approx(k1 ** 2 + k2 ** 2, rel=1e-12)
        assert em.A.T @ em.A == pytest.approx(np.eye(2), abs=1e-12)
        assert em.c2 ** 2 == pytest.approx(moments(p, 2) - moments(p, 1) ** 2, abs=1e-12)


def test_scaled_specialisation(rng):
    for _ in range(50):
        p = ScaledParams(k_eff=rng.uniform(0.01, 2), Delta=rng.uniform(-1.9, 1.9))
        jt = scaled_to_jt(p)
        em = effective_mode_decomposition(jt)
        assert em.k_eff == pytest.approx(math.sqrt(2) * jt.k1, rel=1e-12)
        assert em.omega_eff == pytest.approx((jt.omega1 + jt.omega2) / 2, abs=1e-12)
        assert em.c2 == pytest.approx(p.Delta / 2, abs=1e-12)


def test_jt_to_circuit_symmetric():
    k, w1, w2 = 0.4, 1.3, 0.7
    c = jt_to_circuit(JTParams(omega1=w1, omega2=w2, k1=k, k2=k))
    delta = w1 - w2
    assert c.lambda1 == pytest.approx((w1 + w2) * k / math.sqrt(2))
    assert c.lambda2 == pytest.approx(delta * k / math.sqrt(2))
    assert c.J == pytest.approx(delta / 2)


def test_jt_to_circuit_degenerate():
    c = jt_to_circuit(JTParams(omega1=1, omega2=1, k1=0.3, k2=0.2))
    assert c.J == 0.0
    assert c.lambda2 == 0.0
    assert condition_residual(c) == 0.0


def test_jt_to_circuit_condition_identity(rng):
    for _ in range(200):
        w1, w2 = rng.uniform(0.1, 3.0, size=2)
        k1, k2 = rng.uniform(0.01, 2.0, size=2)
        c = jt_to_circuit(JTParams(omega1=w1, omega2=w2, k1=k1, k2=k2))
        scale = max(abs(c.Omega1 * c.lambda2), abs(c.lambda1 * c.J), 1e-300)
        assert abs(c.Omega1 * c.lambda2 - c.lambda1 * c.J) <= 8 * EPS * scale
        # sign of c2 lands on both J and lambda2
        assert math.copysign(1, c.J) == math.copysign(1, c.lambda2)


def test_circuit_to_jt_recovers_example():
    p = JTParams(omega1=1.5, omega2=0.5, k1=1, k2=1)
    back = circuit_to_jt(jt_to_circuit(p))
    for name in ("omega1", "omega2", "k1", "k2", "qubit_frequency"):
        assert getattr(back, name) == pytest.approx(getattr(p, name), abs=1e-12)


def test_round_trip_random(rng):
    for _ in range(1000):
        w1, w2 = rng.uniform(0.1, 3.0, size=2)
        k1, k2 = rng.uniform(0.05, 2.0, size=2)
        p = JTParams(omega1=w1, omega2=w2, k1=k1, k2=k2, qubit_frequency=rng.uniform(0.5, 1.5))
        back = circuit_to_jt(jt_to_circuit(p))
        for name in ("omega1", "omega2", "k1", "k2", "qubit_frequency"):
            assert getattr(back, name) == pytest.approx(getattr(p, name), rel=1e-9)


def test_circuit_to_jt_rejects_inconsistent_circuit():
    p = CircuitParams(Omega=1, Omega1=1, Omega2=1, lambda1=1, lambda2=0.25, J=0.5)
    assert condition_residual(p) == pytest.approx(-1.0)
    with pytest.raises(ParameterError, match="residual -1"):
        circuit_to_jt(p)


def test_circuit_to_jt_degenerate_case():
    p = CircuitParams(Omega=1, Omega1=1, Omega2=1, lambda1=0.2, lambda2=0, J=0)
    jt = circuit_to_jt(p)
    assert jt.omega1 == pytest.approx(1.0)
    assert jt.omega2 == pytest.approx(1.0)
    assert jt.k1 == pytest.approx(jt.k2)
    assert jt.k_eff == pytest.approx(0.2)


def test_circuit_to_jt_uncoupled_circuit():
    p = CircuitParams(Omega=1, Omega1=1.2, Omega2=0.8, lambda1=0, lambda2=0, J=0)
    jt = circuit_to_jt(p)
    assert (jt.omega1, jt.omega2) == pytest.approx((1.2, 0.8))
    assert (jt.k1, jt.k2) == (0.0, 0.0)

    hopping = CircuitParams(Omega=1, Omega1=1, Omega2=1, lambda1=0, lambda2=0, J=0.25)
    jt = circuit_to_jt(hopping)
    assert (jt.omega1, jt.omega2) == pytest.approx((1.25, 0.75))
    assert jt.k_eff == 0.0


def test_frequency_ratio_exact():
    assert frequency_ratio(Fraction(1)) == 3
    assert frequency_ratio(Fraction(2, 3)) == 2
    assert frequency_ratio(Fraction(0)) == 1
    # J = 1/2 and J = 1/3 expressed through Delta = 2J
    assert frequency_ratio(2 * Fraction(1, 2)) == Fraction(3)
    assert frequency_ratio(2 * Fraction(1, 3)) == Fraction(2)
    with pytest.raises(ParameterError):
        frequency_ratio(Fraction(2))


def test_eta_reduces_to_a1_without_coupling(space22):
    eta = build_eta(JTParams(omega1=1, omega2=1, k1=0, k2=0), space22)
    assert eta.allclose(annihilation(space22, 1), atol=0)


def test_eta_bosonic_on_interior():
    space = make_space(4, 2)
    eta = build_eta(JTParams(omega1=1.2, omega2=0.6, k1=0.5, k2=0.3), space)
    comm = commutator(eta, eta.dag()).matrix
    idx = _interior(space)
    assert comm[np.ix_(idx, idx)] == pytest.approx(np.eye(len(idx)), abs=1e-12)


def test_eta_has_no_diagonal_elements_in_effective_hamiltonian():
    space = make_space(4, 2)
    p = JTParams(omega1=1.2, omega2=0.6, k1=0.5, k2=0.3, qubit_frequency=0.9)
    em = effective_mode_decomposition(p)
    H_eff = build_effective_hamiltonian(p, space)
    residual = (commutator(H_eff, annihilation(space, 1)) + build_eta(p, space) * em.omega_eff).matrix
    idx = _interior(space)
    assert np.max(np.abs(residual[np.ix_(idx, idx)])) < 1e-12


def test_effective_hamiltonian_in_terms_of_eta():
    space = make_space(3, 3)
    p = JTParams(omega1=1.4, omega2=0.7, k1=0.8, k2=0.35, qubit_frequency=1.1)
    em = effective_mode_decomposition(p)
    eta = build_eta(p, space)
    expected = (
        pauli(space, "z") * (0.5 * p.qubit_frequency)
        + (eta.dag() @ eta) * em.omega_eff
        - identity(space) * (em.omega_eff * em.k_eff ** 2)
    )
    assert build_effective_hamiltonian(p, space).allclose(expected, atol=1e-12)


def test_interaction_hamiltonian_in_terms_of_eta():
    space = make_space(3, 3)
    p = JTParams(omega1=1.4, omega2=0.7, k1=0.8, k2=0.35)
    em = effective_mode_decomposition(p)
    eta = build_eta(p, space)
    a2 = annihilation(space, 2)
    expected = (eta @ a2.dag() + eta.dag() @ a2) * em.c2
    assert build_interaction_hamiltonian(p, space).allclose(expected, atol=1e-12)


def test_interaction_vanishes_for_degenerate_modes(space22):
    p = JTParams(omega1=0.9, omega2=0.9, k1=0.4, k2=0.7)
    assert np.max(np.abs(build_interaction_hamiltonian(p, space22).matrix)) == 0.0


def test_lowest_eigenvalues_diagonal(space22):
    H = Operator(space22, np.diag([3.0, 1.0, 2.0, 7.0, 6.0, 5.0, 4.0, 8.0]))
    assert lowest_eigenvalues(H, 2) == pytest.approx([1.0, 2.0])


def test_lowest_eigenvalues_rejects_non_hermitian(space22):
    with pytest.raises(ParameterError):
        lowest_eigenvalues(annihilation(space22, 1), 2)


@pytest.mark.parametrize("m", [0, 9])
def test_lowest_eigenvalues_rejects_bad_count(space22, m):
    with pytest.raises(ParameterError):
        lowest_eigenvalues(number(space22, 1), m)


def test_eigen_bands_zero_coupling(space22):
    bands = eigen_bands(
        lambda d: build_scaled_hamiltonian(ScaledParams(0.0, d), space22),
        np.linspace(-1.5, 1.5, 7),
        3,
    )
    assert bands.shape == (7, 3)
    assert bands[:, 0] == pytest.approx(np.full(7, -0.5), abs=1e-12)


def test_hardware_frequency():
    h = HardwareParams(L1=0.9e-9, L2=0.9e-9, Lc1=0.1e-9, Lc2=0.1e-9, C1=1e-12, C2=1e-12, Cc=0)
    w1, w2, J = coupling_from_hardware(h)
    assert w1 == pytest.approx(1e9 * math.sqrt(1000), rel=1e-12)
    assert w2 == pytest.approx(w1)
    assert J == 0.0


def test_hardware_symmetric_hopping():
    h = HardwareParams(L1=1e-9, L2=1e-9, Lc1=2e-10, Lc2=2e-10, C1=5e-13, C2=5e-13, Cc=1e-13)
    w1, _, J = coupling_from_hardware(h)
    assert J == pytest.approx(h.Cc * w1 / (2 * h.C1), rel=1e-12)
    h2 = HardwareParams(**{**h.to_dict(), "Cc": 2e-13})
    assert coupling_from_hardware(h2)[2] == pytest.approx(2 * J, rel=1e-12)


def test_hardware_validation():
    with pytest.raises(ParameterError):
        HardwareParams(L1=0, L2=1e-9, Lc1=1e-10, Lc2=1e-10, C1=1e-12, C2=1e-12, Cc=1e-13)
    with pytest.raises(ParameterError):
        HardwareParams(L1=1e-9, L2=1e-9, Lc1=1e-10, Lc2=1e-10, C1=1e-12, C2=1e-12, Cc=-1e-13)
