import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfichain.pfaffian import leading_pfaffians, pfaffian


def random_antisymmetric(rng, n, complex_=True):
    a = rng.normal(size=(n, n))
    if complex_:
        a = a + 1j * rng.normal(size=(n, n))
    return a - a.T


@settings(max_examples=60, deadline=None)
@given(half=st.integers(1, 8), seed=st.integers(0, 2 ** 32 - 1), complex_=st.booleans())
def test_square_equals_determinant(half, seed, complex_):
    a = random_antisymmetric(np.random.default_rng(seed), 2 * half, complex_)
    pf = pfaffian(a)
    det = np.linalg.det(a)
    assert abs(pf ** 2 - det) <= 1e-9 * max(1.0, abs(det))


def test_known_values():
    assert pfaffian(np.zeros((0, 0))) == 1
    assert pfaffian(np.array([[0, 3.0], [-3.0, 0]])) == pytest.approx(3.0)
    # pf of the standard symplectic form is (+1) with this block ordering
    j = np.kron(np.eye(3), np.array([[0, 1.0], [-1.0, 0]]))
    assert pfaffian(j) == pytest.approx(1.0)


def test_sign_under_row_swap():
    rng = np.random.default_rng(3)
    a = random_antisymmetric(rng, 6)
    p = np.eye(6)[[1, 0, 2, 3, 4, 5]]
    assert pfaffian(p @ a @ p.T) == pytest.approx(-pfaffian(a))


@settings(max_examples=40, deadline=None)
@given(half=st.integers(1, 10), seed=st.integers(0, 2 ** 32 - 1))
def test_leading_match_independent(half, seed):
    a = random_antisymmetric(np.random.default_rng(seed), 2 * half)
    lead = leading_pfaffians(a)
    ref = [pfaffian(a[: 2 * k, : 2 * k]) for k in range(1, half + 1)]
    np.testing.assert_allclose(lead, ref, rtol=1e-8, atol=1e-10)


def test_leading_with_zero_pivot():
    # first leading block singular forces the growth guard
    a = np.zeros((6, 6))
    a[0, 2], a[1, 3], a[4, 5], a[1, 4] = 1.0, 2.0, 3.0, 0.5
    a = a - a.T
    lead = leading_pfaffians(a)
    ref = [pfaffian(a[: 2 * k, : 2 * k]) for k in (1, 2, 3)]
    np.testing.assert_allclose(lead, ref, atol=1e-12)


def test_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        pfaffian(np.ones((2, 2)))
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
