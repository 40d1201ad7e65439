import numpy as np
import pytest

from qfichain import oracle


def random_state(rng, L, rank=None):
    dim = 2 ** L
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return oracle.DenseState(L, rho / np.trace(rho))


def test_majoranas_anticommute():
    L = 3
    maj = [oracle.majorana(L, m) for m in range(2 * L)]
    for i, a in enumerate(maj):
        for j, b in enumerate(maj):
            np.testing.assert_allclose(a @ b + b @ a, 2 * (i == j) * np.eye(8), atol=1e-14)


def test_pure_state_qfi_is_variance():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    rho = oracle.pure_state(psi)
    x = oracle.order_parameter(4, range(4))
    assert oracle.qfi_exact(rho, x) == pytest.approx(oracle.variance_exact(rho, x))
    assert oracle.wydi_exact(rho, x, 0.5) == pytest.approx(oracle.variance_exact(rho, x))


def test_commuting_observable_has_no_skew_information():
    rho = oracle.thermal_state(oracle.build_hamiltonian(4, 0.5), 1.0)
    H = oracle.build_hamiltonian(4, 0.5)
    assert oracle.qfi_exact(rho, H) == pytest.approx(0.0, abs=1e-10)
    assert oracle.wydi_exact(rho, H, 1 / 3) == pytest.approx(0.0, abs=1e-10)


def test_reduce_partial_trace():
    rng = np.random.default_rng(1)
    rho = random_state(rng, 3)
    red = oracle.reduce(rho, [0, 2])
    op = np.kron(oracle.PAULI["x"], oracle.PAULI["z"])
    full = oracle.pauli_string(3, {0: "x", 2: "z"})
    assert red.expect(op) == pytest.approx(rho.expect(full))


def test_reduced_pure_state_keeps_schmidt_spectrum():
    rho = oracle.thermal_state(oracle.build_hamiltonian(8, 0.2), np.inf)
    red = oracle.reduce(rho, range(4))
    p = red.eigenvalues
    assert p.sum() == pytest.approx(1.0)
    assert np.all(p >= 0)


def test_evolution_preserves_energy():
    H = oracle.build_hamiltonian(4, 0.8)
    rho = oracle.apply_unitary(oracle.thermal_state(H, np.inf), oracle.site_operator(4, 1, "z"))
    later = oracle.evolve_exact(rho, H, 1.7)
    assert later.expect(H) == pytest.approx(rho.expect(H))


def test_gaussian_density_roundtrip():
    rho = oracle.thermal_state(oracle.build_hamiltonian(4, 0.9), 0.8)
    _, gamma = oracle.correlations_from_operator(rho.matrix)
    np.testing.assert_allclose(oracle.gaussian_density(gamma), rho.matrix, atol=1e-12)


def test_input_validation():
    with pytest.raises(ValueError):
        oracle.DenseState(1, np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        oracle.build_hamiltonian(13, 0.5)
    with pytest.raises(ValueError):
        oracle.build_hamiltonian(4, 0.5, boundary="twisted")
