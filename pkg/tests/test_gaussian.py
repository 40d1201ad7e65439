import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfichain import dynamics, gaussian, oracle
from qfichain.model import ChainModel, QuenchPair


def random_gamma(rng, n_sites, purity=0.9):
    """Physical Gamma = i O diag(g blocks) O^T with |g| <= purity."""
    n2 = 2 * n_sites
    q, _ = np.linalg.qr(rng.normal(size=(n2, n2)))
    g = rng.uniform(-purity, purity, n_sites)
    blk = np.zeros((n2, n2))
    for k, v in enumerate(g):
        blk[2 * k, 2 * k + 1], blk[2 * k + 1, 2 * k] = v, -v
    return gaussian.CorrelationMatrix(1j * q @ blk @ q.T)


@pytest.mark.parametrize("h", [0.3, 1.2])
@pytest.mark.parametrize("beta", [0.7, np.inf])
def test_finite_chain_matches_dense(h, beta):
    L = 6
    g = gaussian.finite_chain_correlations(ChainModel(h), L, beta)
    rho = oracle.thermal_state(oracle.build_hamiltonian(L, h), beta)
    _, ref = oracle.correlations_from_operator(rho.matrix)
    np.testing.assert_allclose(g.data, ref, atol=1e-12)


@pytest.mark.parametrize("beta", [1.0, np.inf])
def test_infinite_chain_is_bulk_of_long_chain(beta):
    m = ChainModel(0.6)
    big = gaussian.finite_chain_correlations(m, 200, beta)
    window = gaussian.thermal_correlations(m, beta, 6)
    mid = 2 * 97
    np.testing.assert_allclose(window.data, big.data[mid: mid + 12, mid: mid + 12], atol=1e-12)


def test_quench_matches_evolved_long_chain():
    q = QuenchPair.ising(0.2, 0.7)
    t = 3.0
    g0 = gaussian.finite_chain_correlations(q.pre, 120)
    gt = dynamics.evolve(g0, q.post, t)
    window = gaussian.quench_correlations(q, t, 5)
    mid = 2 * 58
    np.testing.assert_allclose(window.data, gt.data[mid: mid + 10, mid: mid + 10], atol=1e-10)


def test_infinite_temperature_is_zero():
    g = gaussian.thermal_correlations(ChainModel(0.5), 0.0, 4)
    assert not np.any(g.data)


def test_two_point_x_matches_dense():
    L, h = 7, 0.45
    g = gaussian.finite_chain_correlations(ChainModel(h), L, 1.5)
    rho = oracle.thermal_state(oracle.build_hamiltonian(L, h), 1.5)
    rows = gaussian.two_point_rows(np.asarray(g.data)).real
    for s in range(L):
        for u in range(s + 1, L):
            ref = rho.expect(oracle.site_operator(L, s, "x") @ oracle.site_operator(L, u, "x")).real
            assert gaussian.two_point_x(g, s, u) == pytest.approx(ref, abs=1e-12)
            assert rows[s, u] == pytest.approx(ref, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), alpha=st.sampled_from([1 / 3, 0.5, 2.0]))
def test_gamma_power_matches_matrix_power(seed, alpha):
    rng = np.random.default_rng(seed)
    g = random_gamma(rng, 3)
    rho = oracle.gaussian_density(g)
    fac = gaussian.gamma_power(g, alpha)
    p, v = np.linalg.eigh(rho)
    ref = (v * np.clip(p, 0, None).astype(complex) ** alpha) @ v.conj().T
    np.testing.assert_allclose(fac.prefactor * oracle.gaussian_density(fac.gamma.data), ref,
                               atol=1e-10)


@pytest.mark.parametrize("alpha", [0.5 + 0.7j, 1 / 3 - 0.2j])
def test_complex_power_prefactor_is_trace(alpha):
    g = random_gamma(np.random.default_rng(2), 3)
    p = np.linalg.eigvalsh(oracle.gaussian_density(g))
    fac = gaussian.gamma_power(g, alpha)
    assert fac.prefactor == pytest.approx(np.sum(np.clip(p, 0, None).astype(complex) ** alpha),
                                          abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_product_matches_dense(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_gamma(rng, 3), random_gamma(rng, 3)
    r1, r2 = oracle.gaussian_density(g1), oracle.gaussian_density(g2)
    assert gaussian.product_weight(g1, g2) == pytest.approx(np.trace(r1 @ r2), abs=1e-12)
    fac = gaussian.gaussian_product(g1, g2)
    tr, ref = oracle.correlations_from_operator(r1 @ r2)
    assert fac.prefactor == pytest.approx(tr, abs=1e-12)
    np.testing.assert_allclose(fac.gamma.data, ref, atol=1e-9)


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_product_weight_sign_branch():
    # orthogonal-ish pure states: sqrt(det) branch must follow the Pfaffian
    g1 = gaussian.CorrelationMatrix(1j * np.kron(np.eye(2), [[0, 1.0], [-1.0, 0]]))
    g2 = gaussian.CorrelationMatrix(-np.asarray(g1.data))
    assert gaussian.product_weight(g1, g2) == pytest.approx(0.0, abs=1e-15)
    assert gaussian.product_weight(g1, g1) == pytest.approx(1.0)
    with pytest.raises(gaussian.OrthogonalStatesError):
        gaussian.gaussian_product(g1, g2)


def test_sign_conjugation_and_restrict():
    g = random_gamma(np.random.default_rng(1), 4)
    d = gaussian.x_string_signs(8, 1)
    np.testing.assert_array_equal(d, [-1, -1, -1, 1, 1, 1, 1, 1])
    out = gaussian.conjugate_by_signs(g, d)
    np.testing.assert_allclose(out.data, d[:, None] * g.data * d[None, :])
    sub = gaussian.restrict(g, (2, 6))
    np.testing.assert_array_equal(sub.data, np.asarray(g.data)[2:6, 2:6])
    with pytest.raises(IndexError):
        gaussian.restrict(g, (4, 10))
    with pytest.raises(ValueError):
        gaussian.conjugate_by_signs(g, np.ones(7))


def test_validation_and_purity():
    with pytest.raises(ValueError):
        gaussian.CorrelationMatrix(3j * np.kron(np.eye(2), [[0, 1.0], [-1.0, 0]]))
    with pytest.raises(ValueError):
        gaussian.CorrelationMatrix(np.zeros((3, 3)))
    g = gaussian.ground_state_correlations(ChainModel(0.5), 1)
    pure = gaussian.finite_chain_correlations(ChainModel(0.5), 6)
    assert pure.is_pure() and not g.is_pure()
    assert np.all(g.spectrum() <= 1 + 1e-12)


def test_save_load_roundtrip(tmp_path):
    g = random_gamma(np.random.default_rng(5), 3)
    path = tmp_path / "g.bin"
    gaussian.save(g, path)
    back = gaussian.load(path)
    np.testing.assert_array_equal(back.data, g.data)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ValueError):
        gaussian.load(path)
