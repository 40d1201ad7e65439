"""Pfaffians of complex antisymmetric matrices.

Parlett-Reid elimination (skew-symmetric LTL^T) in numba. Two entry points:

* :func:`pfaffian` -- one Pfaffian with partial pivoting.
* :func:`leading_pfaffians` -- Pfaffians of all leading 2m x 2m blocks of a
  matrix from a single unpivoted sweep, with a growth guard that falls back
  to independent pivoted evaluations when elimination becomes unstable.
"""

from __future__ import annotations

import numba
import numpy as np

PIVOT_THRESHOLD = 1e-13
# Largest multiplier tolerated in the unpivoted sweep before it is abandoned.
GROWTH_LIMIT = 8.0


@numba.njit(cache=True)
def _pfaffian_pivoted(a):
    # Works on the strict lower triangle only; a[i, j] with i > j.
    n = a.shape[0]
    a = a.copy()
    scale = 0.0
    for i in range(n):
        for j in range(i):
            v = abs(a[i, j])
            if v > scale:
                scale = v
    if scale == 0.0:
        return 0.0j
    result = 1.0 + 0.0j
    tau = np.empty(n, dtype=a.dtype)
    col = np.empty(n, dtype=a.dtype)
    for k in range(0, n - 1, 2):
        p = k + 1
        q = p
        best = abs(a[p, k])
        for i in range(k + 2, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                q = i
        if q != p:
            _swap_lower(a, p, q, n)
            result = -result
        if best <= PIVOT_THRESHOLD * scale:
            return 0.0j
        piv = -a[p, k]  # upper entry a[k, k+1]
        result *= piv
        m = n - k - 2
        for i in range(m):
            # row k of the full matrix: a[k, j] = -a[j, k]
            tau[i] = -a[k + 2 + i, k] / piv
            col[i] = a[k + 2 + i, k + 1]
        for i in range(m):
            ti = tau[i]
            ci = col[i]
            r = k + 2 + i
            for j in range(i):
                a[r, k + 2 + j] += ti * col[j] - ci * tau[j]
    return result


@numba.njit(cache=True)
def _swap_lower(a, p, q, n):
    """Symmetric swap of rows/columns p < q in lower-triangular storage."""
    for j in range(p):
        tmp = a[p, j]
        a[p, j] = a[q, j]
        a[q, j] = tmp
    for i in range(q + 1, n):
        tmp = a[i, p]
        a[i, p] = a[i, q]
        a[i, q] = tmp
    for i in range(p + 1, q):
        tmp = a[i, p]
        a[i, p] = -a[q, i]
        a[q, i] = -tmp
    a[q, p] = -a[q, p]


@numba.njit(cache=True)
def _eliminate(a, k, piv, n):
    # rank-2 update that zeroes row/column k beyond k+1
    m = n - k - 2
    tau = np.empty(m, dtype=a.dtype)
    col = np.empty(m, dtype=a.dtype)
    for i in range(m):
        tau[i] = a[k, k + 2 + i] / piv
        col[i] = a[k + 2 + i, k + 1]
    for i in range(m):
        ti = tau[i]
        ci = col[i]
        for j in range(m):
            a[k + 2 + i, k + 2 + j] += ti * col[j] - ci * tau[j]


@numba.njit(cache=True)
def _leading_unpivoted(a, out):
    """Fill ``out[m]`` with pf(a[:2m+2, :2m+2]).

    Returns the number of steps completed and the largest multiplier used.
    """
    n = a.shape[0]
    a = a.copy()
    running = 1.0 + 0.0j
    growth = 0.0
    for k in range(0, n - 1, 2):
        piv = a[k, k + 1]
        if piv == 0.0:
            return k // 2, growth
        # the multipliers used below must stay bounded
        worst = 0.0
        for j in range(k + 1, n):
            v = abs(a[k, j])
            if v > worst:
                worst = v
        ratio = worst / abs(piv)
        if ratio > GROWTH_LIMIT:
            return k // 2, growth
        if ratio > growth:
            growth = ratio
        running *= piv
        out[k // 2] = running
        if k + 2 < n:
            _eliminate(a, k, piv, n)
    return n // 2, growth


def _as_antisymmetric(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("pfaffian needs a square matrix")
    if m.shape[0] % 2:
        raise ValueError("pfaffian of an odd-dimensional matrix is undefined")
    scale = max(np.abs(m).max(initial=0.0), 1.0)
    if np.abs(m + m.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not antisymmetric")
    return np.ascontiguousarray(m)


def pfaffian(m) -> complex:
    """Pfaffian of an even-dimensional complex antisymmetric matrix.

    Parameters
    ----------
    m : array_like
        Square antisymmetric matrix of even dimension.

    Returns
    -------
    complex
        ``pf(m)``, with ``pf(m)**2 == det(m)``. The empty matrix has Pfaffian 1.
    """
    m = _as_antisymmetric(m)
    if m.shape[0] == 0:
        return 1.0 + 0.0j
    return complex(_pfaffian_pivoted(m))


def leading_pfaffians(m, check: bool = True) -> np.ndarray:
    """Pfaffians of the leading ``2k x 2k`` blocks for ``k = 1 .. n/2``.

    One unpivoted Parlett-Reid sweep yields every nested Pfaffian at the cost
    of a single elimination. Steps whose multipliers exceed ``GROWTH_LIMIT``
    are handed over to independent pivoted evaluations. With ``check``, and
    if any multiplier exceeded one, the largest block is also recomputed with
    pivoting and the whole sequence is redone pivoted if the two disagree.
    """
    m = _as_antisymmetric(m)
    half = m.shape[0] // 2
    out = np.zeros(half, dtype=np.complex128)
    if half == 0:
        return out
    done, growth = _leading_unpivoted(m, out)
    for k in range(done, half):
        out[k] = _pfaffian_pivoted(np.ascontiguousarray(m[: 2 * k + 2, : 2 * k + 2]))
    # with all multipliers <= 1 the sweep coincides with partial pivoting
    if check and done == half and growth > 1.0:
        ref = _pfaffian_pivoted(m)
        if abs(out[-1] - ref) > 1e-9 * max(abs(ref), 1e-300) and abs(ref) > 1e-200:
            for k in range(half):
                out[k] = _pfaffian_pivoted(np.ascontiguousarray(m[: 2 * k + 2, : 2 * k + 2]))
    return out
