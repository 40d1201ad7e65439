import numpy as np
import pytest
from scipy import integrate, optimize

from qfichain import beyond_sc as bsc
from qfichain.model import ChainModel


@pytest.fixture(scope="module")
def sector():
    return bsc.TwoParticleSector.ising(ChainModel(0.5))


def quad_oracle(sector, t, l, r, n, kind):
    """Independent adaptive quadrature with breakpoints at the cone edges."""
    v = lambda k: float(sector.velocity(k))
    grid = np.linspace(-np.pi, np.pi, 997)
    cuts = []
    for c in (l, r):
        vals = np.array([v(k) * t - c for k in grid])
        for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
            cuts.append(optimize.brentq(lambda k: v(k) * t - c, grid[i], grid[i + 1], xtol=1e-14))
    edges = sorted({-np.pi, np.pi, *cuts})

    def f(k, part):
        x = v(k) * t
        inside = float(l <= x <= r)
        lever = (r + l) / t - 2 * v(k)
        weight = {"L": float(x <= l), "A": inside, "O": inside * lever,
                  "O2": inside * lever ** 2}[kind]
        return (np.cos(n * k) if part == 0 else np.sin(n * k)) * weight / (2 * np.pi)

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        re, _ = integrate.quad(f, a, b, args=(0,), epsabs=1e-13, epsrel=1e-13, limit=200)
        im, _ = integrate.quad(f, a, b, args=(1,), epsabs=1e-13, epsrel=1e-13, limit=200)
        total += re + 1j * im
    return total


@pytest.mark.parametrize("l,r", [(-50.0, 50.0), (-20.0, 70.0), (30.0, 90.0)])
def test_window_integrals_match_quadrature(sector, l, r):
    t = 100.0
    w = bsc.window_integrals(sector, t, l, r)
    for n in bsc.ORDERS:
        for kind in ("L", "A", "O", "O2"):
            ref = quad_oracle(sector, t, l, r, n, kind)
            assert getattr(w, kind)[n] == pytest.approx(ref, abs=1e-10), (n, kind)


def test_window_integrals_match_riemann_sum(sector):
    # the midpoint sum has its own O(1/N) error at the indicator jumps
    t, l, r = 100.0, -50.0, 50.0
    w = bsc.window_integrals(sector, t, l, r)
    n_pts = 10 ** 6
    k = -np.pi + 2 * np.pi * (np.arange(n_pts) + 0.5) / n_pts
    v = np.asarray(sector.velocity(k))
    inside = (r - v * t >= 0) & (v * t - l >= 0)
    lever = (r + l) / t - 2 * v
    for n in bsc.ORDERS:
        ph = np.exp(1j * n * k) / n_pts
        assert abs(np.sum(ph * inside) - w.A[n]) < 2e-6
        assert abs(np.sum(ph * inside * lever ** 2) - w.O2[n]) < 2e-6
        assert abs(np.sum(ph * (l - v * t >= 0)) - w.L[n]) < 2e-6


def test_rank_two_form_equals_printed():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        p = p @ p.conj().T
        o = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        o = o + o.conj().T
        assert bsc.rank_two_chi(p, o, o @ o) == pytest.approx(bsc.printed_chi(p, o, o @ o),
                                                              rel=1e-12, abs=1e-10)


def test_rank_two_form_survives_degenerate_p():
    o = np.array([[1.0, 0.3], [0.3, -0.5]])
    # the printed form loses all digits to cancellation this close to degeneracy
    val = bsc.rank_two_chi(0.4 * np.eye(2), o, o @ o)
    assert val == pytest.approx(bsc.rank_two_chi(np.diag([0.4, 0.4 + 1e-9]), o, o @ o), abs=1e-8)
    split = np.diag([0.4, 0.41])
    assert bsc.rank_two_chi(split, o, o @ o) == pytest.approx(bsc.printed_chi(split, o, o @ o),
                                                              abs=1e-10)


def test_diagonal_part_is_first_line(sector):
    for rt in (0.1, 0.5, 0.9):
        r = rt * 100.0
        diag = bsc.chi_one_particle(sector, 100.0, -r, r, diagonal=True)
        assert diag == pytest.approx(bsc.semiclassical_first_line(sector, 100.0, -r, r),
                                     abs=1e-10)


def test_vanishes_outside_velocity_support(sector):
    assert bsc.chi_one_particle(sector, 100.0, -120.0, 120.0) == pytest.approx(0.0, abs=1e-12)


def test_interacting_phase_rejected():
    sec = bsc.TwoParticleSector(velocity=np.sin, scattering=lambda k, p: 1.0)
    with pytest.raises(NotImplementedError):
        bsc.chi_one_particle(sec, 10.0, -1.0, 1.0)


def test_parallel_states_detected():
    w = bsc.WindowIntegrals(1.0, 0.0, 1.0, L={n: 0.1 for n in bsc.ORDERS},
                            A={0: 0.2, 1: 0.2, -1: 0.2}, O={n: 0.0 for n in bsc.ORDERS},
                            O2={n: 0.0 for n in bsc.ORDERS})
    with pytest.raises(bsc.DegenerateBasisError):
        bsc.p_o_matrices(w)


@pytest.mark.parametrize("n_sites", [4, 6, 8])
def test_bethe_states_reproduce_kick_overlaps(n_sites):
    worst, weight = bsc.perturbation_overlaps(n_sites, 0.7)
    assert worst < 1e-12
    assert weight == pytest.approx(1.0, abs=1e-12)


def test_bethe_momenta_count():
    assert len(bsc.bethe_momenta(6, 1)) == 15
    with pytest.raises(ValueError):
        bsc.bethe_momenta(6, 0)
    with pytest.raises(ValueError):
        bsc.bethe_state(5, 0.1, 0.2, 1)
