import numpy as np
import pytest

from qfichain import oracle
from qfichain.model import (ChainModel, QuenchPair, bogoliubov_angle_difference, c_ff,
                            coupling_matrix, dispersion, ground_magnetization,
                            group_velocity, max_velocity, symbol)


@pytest.mark.parametrize("h", [0.3, 0.5, 1.2])
def test_ising_velocity_is_twice_min_h_one(h):
    assert max_velocity(ChainModel(h)) == pytest.approx(2 * min(h, 1.0), rel=1e-10)


def test_critical_velocity_supremum():
    assert max_velocity(ChainModel(1.0)) == pytest.approx(2.0, rel=1e-6)


def test_group_velocity_is_derivative():
    m = ChainModel(0.7, 0.6)
    k = np.linspace(0.2, 2.9, 7)
    step = 1e-6
    fd = (dispersion(m, k + step) - dispersion(m, k - step)) / (2 * step)
    np.testing.assert_allclose(group_velocity(m, k), fd, rtol=1e-7)


def test_dispersion_matches_symbol_spectrum():
    m = ChainModel(0.4, 0.8)
    k = np.linspace(-np.pi, np.pi, 11)
    ev = np.linalg.eigvalsh(1j * symbol(m, k))
    np.testing.assert_allclose(ev[:, 1], dispersion(m, k), atol=1e-12)


@pytest.mark.parametrize("h,gamma", [(0.5, 1.0), (1.3, 0.4)])
def test_coupling_matrix_reproduces_spin_hamiltonian(h, gamma):
    # H = (i/4) a^T A a built from dense Majoranas
    L = 4
    a = coupling_matrix(ChainModel(h, gamma), L)
    maj = [oracle.majorana(L, m) for m in range(2 * L)]
    H = sum(0.25j * a[i, j] * maj[i] @ maj[j] for i in range(2 * L) for j in range(2 * L))
    np.testing.assert_allclose(H, oracle.build_hamiltonian(L, h, gamma), atol=1e-12)


def test_ground_magnetization_and_cff():
    m = ChainModel(0.6)
    assert ground_magnetization(m) == pytest.approx(0.64 ** 0.125)
    assert ground_magnetization(ChainModel(1.5)) == 0.0
    assert c_ff(QuenchPair.ising(0.6, 0.6)) == pytest.approx(0.64 ** 0.25)
    with pytest.raises(ValueError):
        c_ff(QuenchPair.ising(0.3, 1.4))


def test_angle_difference_is_one_without_quench():
    q = QuenchPair.ising(0.4, 0.4)
    np.testing.assert_allclose(bogoliubov_angle_difference(q, np.linspace(0, 3, 5)), 1.0)


def test_model_flags():
    assert ChainModel(0.5).ferromagnetic and not ChainModel(1.0).ferromagnetic
    assert ChainModel(1.0).critical
    assert not ChainModel(0.5, 0.3).is_ising
    with pytest.raises(ValueError):
        ChainModel(np.nan)
    with pytest.raises(ValueError):
        c_ff(QuenchPair(ChainModel(0.1, 0.5), ChainModel(0.2)))
