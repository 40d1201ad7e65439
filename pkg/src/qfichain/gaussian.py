"""Fermionic Gaussian states in the Majorana correlation-matrix picture.

A state is stored through ``Gamma = I - <a a^T>`` on ``2n`` Majoranas, with
``a[2s]`` the x-type and ``a[2s+1]`` the y-type operator on site ``s``
(0-based). For states of real density matrices ``Gamma`` is purely imaginary
and Hermitian. Products and complex powers of Gaussian density matrices
produce general complex antisymmetric matrices; those are represented by the
same class with ``check=False``.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .model import ChainModel, QuenchPair, coupling_matrix, dispersion, symbol
from .pfaffian import leading_pfaffians, pfaffian

__all__ = [
    "CorrelationMatrix", "GaussianFactor", "OrthogonalStatesError",
    "pfaffian", "leading_pfaffians",
    "ground_state_correlations", "thermal_correlations", "quench_correlations",
    "finite_chain_correlations", "gamma_power", "mode_data", "ModeData", "gaussian_product",
    "conjugate_by_signs", "restrict", "two_point_x", "two_point_rows",
    "x_string_signs", "save", "load",
]

log = logging.getLogger(__name__)

MAGIC = b"GFQF"
FORMAT_VERSION = 1
K_POINTS = 4096
K_POINTS_CRITICAL = 65536
ZERO_MODE_TOL = 1e-9


class OrthogonalStatesError(ArithmeticError):
    """``I + Gamma1 Gamma2`` is singular, so the product has zero trace."""


class CorrelationMatrix:
    """Majorana correlation matrix of ``n_sites`` sites.

    Parameters
    ----------
    data : array_like
        ``2n x 2n`` matrix. It is antisymmetrized on construction.
    check : bool
        Verify physicality (singular values at most ``1 + 1e-10``). Algebra
        intermediates such as complex powers are built with ``check=False``.
    """

    __slots__ = ("data", "n_sites")

    def __init__(self, data, check: bool = True):
        m = np.array(data, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError("correlation matrix must be square with even size")
        m = 0.5 * (m - m.T)
        if check and m.size:
            top = np.linalg.norm(m, 2)
            if top > 1.0 + 1e-10:
                raise ValueError(f"unphysical correlation matrix (norm {top:.3g})")
        m.setflags(write=False)
        self.data = m
        self.n_sites = m.shape[0] // 2

    def __repr__(self):
        return f"CorrelationMatrix(n_sites={self.n_sites})"

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def shape(self):
        return self.data.shape

    def spectrum(self) -> np.ndarray:
        """Nonnegative mode occupations ``|g_k|`` (one per mode, descending).

        Only meaningful for Hermitian Gamma.
        """
        ev = np.linalg.eigvalsh(self.data)
        return np.sort(np.abs(ev))[::-1][::2]

    def is_pure(self, tol: float = 1e-10) -> bool:
        if self.n_sites == 0:
            return True
        return bool(np.all(self.spectrum() > 1.0 - tol))


def _mat(g) -> np.ndarray:
    return g.data if isinstance(g, CorrelationMatrix) else np.asarray(g, dtype=np.complex128)


@dataclass(frozen=True)
class GaussianFactor:
    """``prefactor * rho[gamma]`` with ``rho[gamma]`` of unit trace."""

    prefactor: complex
    gamma: CorrelationMatrix
    clipped: int = 0


# ---------------------------------------------------------------- equilibrium

def _toeplitz(symbol_values: np.ndarray, window: int) -> np.ndarray:
    """Block Toeplitz matrix from samples of a 2x2 symbol on ``k = 2 pi j / N``."""
    n_k = symbol_values.shape[0]
    blocks = np.fft.ifft(symbol_values, axis=0)
    sites = np.arange(window)
    offsets = (sites[:, None] - sites[None, :]) % n_k
    full = blocks[offsets]  # (W, W, 2, 2)
    return full.transpose(0, 2, 1, 3).reshape(2 * window, 2 * window)


def _k_grid(model: ChainModel, n_k: int | None) -> np.ndarray:
    if n_k is None:
        n_k = K_POINTS_CRITICAL if model.critical else K_POINTS
    return 2.0 * np.pi * np.arange(n_k) / n_k


def _thermal_symbol(model: ChainModel, beta: float, k: np.ndarray) -> np.ndarray:
    a_k = symbol(model, k)
    eps = dispersion(model, k)
    if np.isinf(beta):
        weight = np.ones_like(eps)
    else:
        weight = np.tanh(0.5 * beta * eps)
    safe = np.where(eps > 0, eps, 1.0)
    coef = np.where(eps > 0, weight / safe, 0.0)
    return -1j * coef[:, None, None] * a_k


def ground_state_correlations(model: ChainModel, window: int,
                              n_k: int | None = None) -> CorrelationMatrix:
    """Infinite-chain ground state restricted to ``window`` contiguous sites.

    The block Toeplitz entries come from a periodic trapezoid rule on the
    Bloch symbol ``-sign(i A(k))``; at a gap-closing momentum the sign is
    taken as zero, the average of its one-sided values.
    """
    return thermal_correlations(model, np.inf, window, n_k=n_k)


def thermal_correlations(model: ChainModel, beta: float, window: int,
                         n_k: int | None = None) -> CorrelationMatrix:
    """Infinite-chain Gibbs state at inverse temperature ``beta`` on ``window`` sites."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if window < 1:
        raise ValueError("window must contain at least one site")
    if beta == 0:
        return CorrelationMatrix(np.zeros((2 * window, 2 * window)))
    k = _k_grid(model, n_k)
    g = _toeplitz(_thermal_symbol(model, beta, k), window)
    return CorrelationMatrix(1j * g.imag)


def quench_correlations(q: QuenchPair, t: float, window: int,
                        n_k: int | None = None) -> CorrelationMatrix:
    """Infinite chain prepared in the ground state of ``q.pre`` and evolved with ``q.post``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    n_k = n_k or (K_POINTS_CRITICAL if (q.pre.critical or q.post.critical) else K_POINTS)
    k = _k_grid(q.pre, n_k)
    g0 = _thermal_symbol(q.pre, np.inf, k)
    a_post = symbol(q.post, k)
    eps = dispersion(q.post, k)
    # exp(A t) for a 2x2 anti-Hermitian symbol with A^2 = -eps^2
    safe = np.where(eps > 0, eps, 1.0)
    c = np.cos(eps * t)[:, None, None]
    s = np.where(eps > 0, np.sin(eps * t) / safe, t)[:, None, None]
    eye = np.eye(2)[None]
    fwd = c * eye + s * a_post
    bwd = c * eye - s * a_post
    gt = fwd @ g0 @ bwd
    g = _toeplitz(gt, window)
    return CorrelationMatrix(1j * g.imag)


def finite_chain_correlations(model: ChainModel, n_sites: int, beta: float = np.inf,
                              periodic: bool = False) -> CorrelationMatrix:
    """Gibbs state of an open (fermion-periodic if requested) finite chain.

    At ``beta = inf`` fermionic zero modes are left unoccupied on average,
    giving the equal-weight mixture over the degenerate ground space.
    """
    a = coupling_matrix(model, n_sites, periodic=periodic)
    e, v = np.linalg.eigh(1j * a)
    if np.isinf(beta):
        f = np.where(np.abs(e) < ZERO_MODE_TOL, 0.0, np.sign(e))
    else:
        f = np.tanh(0.5 * beta * e)
    g = -(v * f) @ v.conj().T
    return CorrelationMatrix(1j * g.imag)


# ------------------------------------------------------------------- algebra

def conjugate_by_signs(g, signs) -> CorrelationMatrix:
    """``D Gamma D`` for a diagonal matrix ``D`` of signs."""
    m = _mat(g)
    d = np.asarray(signs, dtype=float)
    if d.shape != (m.shape[0],) or not np.all(np.abs(d) == 1):
        raise ValueError("signs must be a vector of +-1 matching Gamma")
    return CorrelationMatrix(d[:, None] * m * d[None, :], check=False)


def x_string_signs(n_majoranas: int, site: int) -> np.ndarray:
    """Signs of ``X_site`` conjugation: -1 on Majoranas ``0 .. 2*site``."""
    d = np.ones(n_majoranas)
    d[: 2 * site + 1] = -1.0
    return d


def restrict(g, index_range) -> CorrelationMatrix:
    """Principal submatrix on a contiguous Majorana range ``(start, stop)``."""
    m = _mat(g)
    if isinstance(index_range, slice):
        start, stop, _ = index_range.indices(m.shape[0])
    else:
        start, stop = index_range
    if not (0 <= start <= stop <= m.shape[0]):
        raise IndexError("Majorana range out of bounds")
    sub = m[start:stop, start:stop]
    return CorrelationMatrix(sub, check=False)


@dataclass(frozen=True)
class ModeData:
    """Eigen-decomposition ``Gamma = V diag(lam) V^dagger`` of a Hermitian Gamma.

    ``low`` holds ``(1 - |lam|) / 2`` for every eigenvector, computed to full
    relative precision when the complement coupling of a pure state is known.
    """

    vectors: np.ndarray
    lam: np.ndarray
    low: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.lam.size // 2

    def power(self, alpha: complex):
        """``(kappa_alpha, Gamma^(alpha))`` with ``rho^alpha = kappa * rho[Gamma^(alpha)]``."""
        low = self.low
        high = 1.0 - low
        la, ha = _pow(low, alpha), _pow(high, alpha)
        sign = np.sign(self.lam)
        new = sign * (ha - la) / (ha + la)
        # each mode appears twice (eigenvalues +-g); keep one of each pair
        order = np.argsort(-self.lam, kind="stable")[: self.n_modes]
        pref = np.prod(ha[order] + la[order])
        mat = (self.vectors * new) @ self.vectors.conj().T
        return complex(pref), 0.5 * (mat - mat.T)


def _pow(x: np.ndarray, alpha: complex) -> np.ndarray:
    out = np.zeros(x.shape, dtype=complex)
    pos = x > 0
    out[pos] = x[pos].astype(complex) ** alpha
    return out


def mode_data(g, coupling=None, cluster_tol: float = 1e-6) -> ModeData:
    """Mode decomposition of a Hermitian Gamma.

    Parameters
    ----------
    g : CorrelationMatrix or array
        Correlation matrix of a block of sites.
    coupling : array, optional
        Off-diagonal block ``Gamma[block, complement]`` of a pure state that
        contains the block. Then ``I - Gamma^2 = C C^dagger`` and the
        singular values of ``C`` fix the distance of each occupation from 1
        with full relative accuracy, which matters for nearly pure modes.
    """
    m = _mat(g)
    if coupling is None:
        lam, vec = np.linalg.eigh(m)
        lam = np.clip(lam, -1.0, 1.0)
        return ModeData(vec, lam, 0.5 * (1.0 - np.abs(lam)))
    n2 = m.shape[0]
    u, sv, _ = np.linalg.svd(np.asarray(coupling), full_matrices=True)
    sig = np.zeros(n2)
    sig[: sv.size] = sv[:n2]
    rotated = u.conj().T @ m @ u
    vec = np.empty((n2, n2), dtype=complex)
    lam = np.empty(n2)
    low = np.empty(n2)
    start = 0
    # U columns with (numerically) equal singular values span invariant subspaces
    while start < n2:
        stop = start + 1
        while stop < n2 and abs(sig[stop] - sig[start]) <= cluster_tol * sig[start] + 1e-15:
            stop += 1
        blk = rotated[start:stop, start:stop]
        lb, wb = np.linalg.eigh(0.5 * (blk + blk.conj().T))
        s2 = np.mean(sig[start:stop] ** 2)
        lb = np.clip(lb, -1.0, 1.0)
        vec[:, start:stop] = u[:, start:stop] @ wb
        lam[start:stop] = lb
        low[start:stop] = 0.5 * s2 / (1.0 + np.abs(lb))
        start = stop
    return ModeData(vec, lam, low)


def gamma_power(g, alpha: complex, coupling=None) -> GaussianFactor:
    """``rho[Gamma]**alpha = prefactor * rho[Gamma^(alpha)]``.

    ``Gamma^(alpha) = tanh(alpha artanh Gamma)``, evaluated per mode as
    ``(p^alpha - q^alpha) / (p^alpha + q^alpha)`` with ``p, q = (1 +- g)/2`` so
    that pure modes (``q = 0``) need no regularization. Occupations are
    clipped to ``[-1, 1]``; ``clipped`` counts modes within 1e-12 of purity.
    """
    m = _mat(g)
    if alpha == 1:
        return GaussianFactor(1.0 + 0j, g if isinstance(g, CorrelationMatrix) else CorrelationMatrix(m))
    n = m.shape[0] // 2
    if alpha == 0:
        return GaussianFactor(complex(2.0 ** n), CorrelationMatrix(np.zeros_like(m)))
    modes = mode_data(m, coupling)
    pref, mat = modes.power(alpha)
    clipped = int(np.count_nonzero(modes.low < 0.5e-12)) // 2
    return GaussianFactor(pref, CorrelationMatrix(mat, check=False), clipped)


def product_weight(g1, g2) -> complex:
    """``tr(rho[G1] rho[G2]) = sqrt(det((I + G1 G2)/2))`` on its analytic branch.

    The square root is ``2^-n (-1)^n pf([[G1, -I], [I, G2]])``: both sides are
    polynomials in the matrix entries that agree at ``G1 = G2 = 0``.
    """
    a, b = _mat(g1), _mat(g2)
    n2 = a.shape[0]
    k = np.empty((2 * n2, 2 * n2), dtype=np.complex128)
    eye = np.eye(n2)
    k[:n2, :n2] = a
    k[:n2, n2:] = -eye
    k[n2:, :n2] = eye
    k[n2:, n2:] = b
    n = n2 // 2
    return (-1) ** n * pfaffian(k) / 2.0 ** n


def gaussian_product(g1, g2) -> GaussianFactor:
    """``rho[G1] rho[G2] = w * rho[G1 x G2]`` with ``w = tr(rho[G1] rho[G2])``."""
    a, b = _mat(g1), _mat(g2)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    n2 = a.shape[0]
    eye = np.eye(n2)
    m = eye + a @ b
    lu, piv = lu_factor(m, check_finite=False)
    diag = np.abs(np.diag(lu))
    if diag.min(initial=np.inf) <= 1e-14 * max(diag.max(initial=0.0), 1.0):
        raise OrthogonalStatesError("I + G1 G2 is singular")
    prod = eye - (eye - b) @ lu_solve((lu, piv), eye - a, check_finite=False)
    return GaussianFactor(product_weight(a, b), CorrelationMatrix(prod, check=False))


# --------------------------------------------------------------- spin strings

def two_point_x(g, site_l: int, site_n: int) -> float:
    """``<X_l X_n>`` via ``i^(n-l) pf(Gamma[2l+1 : 2n+1])`` (0-based sites)."""
    m = _mat(g)
    if site_l > site_n:
        site_l, site_n = site_n, site_l
    if site_l == site_n:
        return 1.0
    val = 1j ** (site_n - site_l) * pfaffian(m[2 * site_l + 1: 2 * site_n + 1,
                                              2 * site_l + 1: 2 * site_n + 1])
    return float(val.real)


def two_point_rows(m: np.ndarray, check: bool = True) -> np.ndarray:
    """Complex matrix ``T[s, u] = i^(u-s) pf(M[2s+1 : 2u+1])`` for ``s < u``.

    Diagonal entries are 1 and the lower triangle is left at zero. One nested
    Pfaffian sweep per row.
    """
    n = m.shape[0] // 2
    out = np.zeros((n, n), dtype=np.complex128)
    phases = 1j ** np.arange(n)
    for s in range(n):
        out[s, s] = 1.0
        if s + 1 < n:
            sec = m[2 * s + 1: 2 * n - 1, 2 * s + 1: 2 * n - 1]
            out[s, s + 1:] = phases[1: n - s] * leading_pfaffians(sec, check=check)
    return out


# --------------------------------------------------------------------- binary

def save(g, path) -> None:
    """Write ``Gamma`` as a 16-byte header and little-endian complex128 data."""
    m = np.ascontiguousarray(_mat(g), dtype="<c16")
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC + struct.pack("<III", FORMAT_VERSION, m.shape[0] // 2, 0))
        fh.write(m.tobytes(order="C"))


def load(path) -> CorrelationMatrix:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError("not a correlation-matrix file")
    version, n_sites, _ = struct.unpack("<III", raw[4:16])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    n = 2 * n_sites
    data = np.frombuffer(raw[16:], dtype="<c16")
    if data.size != n * n:
        raise ValueError("truncated correlation-matrix file")
    return CorrelationMatrix(data.reshape(n, n), check=False)
