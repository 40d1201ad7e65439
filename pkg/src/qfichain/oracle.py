"""Exact diagonalization on small spin chains.

Reference implementation for every quantity computed through Gaussian
algebra: dense Hamiltonians, Gibbs states, partial traces, the
eigen-decomposition formulas for the quantum Fisher information and the
Wigner-Yanase-Dyson skew information, kicks and unitary evolution.

Site 0 is the leftmost tensor factor. Majoranas follow the Jordan-Wigner map
``a[2s] = Z_0 ... Z_{s-1} X_s`` and ``a[2s+1] = Z_0 ... Z_{s-1} Y_s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce as _fold

import numpy as np
from scipy.linalg import schur

MAX_SITES = 14
# dense density matrices above this size do not fit comfortably in memory
MAX_DENSE_SITES = 12
DEGENERACY_TOL = 1e-9

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": _X, "y": _Y, "z": _Z, "i": _I2}


@dataclass
class DenseState:
    """Density matrix of ``L`` spins.

    Pure states keep their state vector and reduced states of pure states
    keep their Schmidt spectrum, so that tiny eigenvalues stay accurate.
    """

    L: int
    matrix: np.ndarray
    vector: np.ndarray | None = field(default=None, repr=False)
    spectral: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2 ** self.L, 2 ** self.L):
            raise ValueError("matrix size does not match L")
        if np.abs(m - m.conj().T).max(initial=0) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-12:
            raise ValueError("density matrix is not normalized")
        self.matrix = m

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigh()[0]

    def eigh(self):
        """Eigenvalues (clipped at zero) and eigenvectors."""
        if self.spectral is not None:
            return self.spectral
        if self.vector is not None:
            v = self.vector / np.linalg.norm(self.vector)
            q, _ = np.linalg.qr(np.column_stack([v, np.eye(v.size)[:, :-1]]))
            p = np.zeros(v.size)
            p[0] = 1.0
            q[:, 0] = v
            return p, q
        p, v = np.linalg.eigh(self.matrix)
        return np.clip(p, 0.0, None), v

    def expect(self, op) -> complex:
        return complex(np.trace(self.matrix @ op))


def _check_size(L: int, limit: int = MAX_SITES):
    if L < 1 or L > limit:
        raise ValueError(f"exact diagonalization limited to 1 <= L <= {limit}, got {L}")


def site_operator(L: int, site: int, pauli: str) -> np.ndarray:
    """Pauli matrix on one site of an ``L``-spin chain."""
    _check_size(L, MAX_DENSE_SITES)
    ops = [_I2] * L
    ops[site] = PAULI[pauli]
    return _fold(np.kron, ops)


def pauli_string(L: int, paulis: dict[int, str]) -> np.ndarray:
    _check_size(L, MAX_DENSE_SITES)
    ops = [PAULI[paulis.get(s, "i")] for s in range(L)]
    return _fold(np.kron, ops)


@lru_cache(maxsize=16)
def _majoranas(L: int) -> tuple:
    out = []
    for s in range(L):
        string = {j: "z" for j in range(s)}
        out.append(pauli_string(L, {**string, s: "x"}))
        out.append(pauli_string(L, {**string, s: "y"}))
    return tuple(out)


def majorana(L: int, m: int) -> np.ndarray:
    """Dense Majorana operator ``a[m]`` (0-based)."""
    return _majoranas(L)[m]


def order_parameter(L: int, sites) -> np.ndarray:
    """``sum_{s in sites} X_s``."""
    return sum(site_operator(L, s, "x") for s in sites)


def build_hamiltonian(L: int, h: float, gamma: float = 1.0,
                      boundary: str = "open") -> np.ndarray:
    """Dense XY Hamiltonian on ``L`` spins."""
    _check_size(L, MAX_DENSE_SITES)
    if boundary not in ("open", "periodic"):
        raise ValueError("boundary must be 'open' or 'periodic'")
    dim = 2 ** L
    H = np.zeros((dim, dim), dtype=complex)
    bonds = L if boundary == "periodic" and L > 2 else L - 1
    for s in range(bonds):
        u = (s + 1) % L
        H -= 0.5 * (1 + gamma) * pauli_string(L, {s: "x", u: "x"})
        H -= 0.5 * (1 - gamma) * pauli_string(L, {s: "y", u: "y"})
    for s in range(L):
        H -= h * site_operator(L, s, "z")
    return H


def thermal_state(H: np.ndarray, beta: float, tol: float = DEGENERACY_TOL) -> DenseState:
    """Gibbs state; ``beta = inf`` gives the uniform mixture over the ground space."""
    L = int(round(np.log2(H.shape[0])))
    e, v = np.linalg.eigh(H)
    if np.isinf(beta):
        w = (e - e[0] < tol).astype(float)
    else:
        w = np.exp(-beta * (e - e[0]))
    w /= w.sum()
    if np.count_nonzero(w) == 1:
        return pure_state(v[:, 0])
    rho = (v * w) @ v.conj().T
    return DenseState(L, 0.5 * (rho + rho.conj().T))


def pure_state(psi: np.ndarray) -> DenseState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    L = int(round(np.log2(psi.size)))
    return DenseState(L, np.outer(psi, psi.conj()), vector=psi)


def reduce(rho: DenseState, sites) -> DenseState:
    """Partial trace onto ``sites`` (kept in increasing order)."""
    keep = sorted(set(int(s) for s in sites))
    if not keep:
        raise ValueError("subsystem must be nonempty")
    L = rho.L
    if keep == list(range(L)):
        return rho
    drop = [s for s in range(L) if s not in keep]
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    if rho.vector is not None:
        psi = rho.vector.reshape([2] * L).transpose(keep + drop).reshape(dk, dd)
        u, sv, _ = np.linalg.svd(psi, full_matrices=True)
        p = np.zeros(dk)
        p[: sv.size] = sv[:dk] ** 2
        red = (u * p) @ u.conj().T
        return DenseState(len(keep), 0.5 * (red + red.conj().T), spectral=(p, u))
    t = rho.matrix.reshape([2] * (2 * L))
    perm = keep + drop + [L + s for s in keep] + [L + s for s in drop]
    t = t.transpose(perm)
    t = t.reshape(dk, dd, dk, dd)
    red = np.einsum("ajbj->ab", t)
    return DenseState(len(keep), 0.5 * (red + red.conj().T))


def apply_unitary(rho: DenseState, U: np.ndarray) -> DenseState:
    if rho.vector is not None:
        return pure_state(U @ rho.vector)
    m = U @ rho.matrix @ U.conj().T
    return DenseState(rho.L, 0.5 * (m + m.conj().T))


def evolve_exact(rho: DenseState, H: np.ndarray, t: float) -> DenseState:
    """``rho -> exp(-iHt) rho exp(iHt)``."""
    if t == 0:
        return rho
    e, v = np.linalg.eigh(H)
    U = (v * np.exp(-1j * e * t)) @ v.conj().T
    return apply_unitary(rho, U)


def _weights(rho: DenseState, O: np.ndarray):
    p, v = rho.eigh()
    o = v.conj().T @ O @ v
    return p, np.abs(o) ** 2


def qfi_exact(rho: DenseState, O: np.ndarray) -> float:
    """Quarter of the quantum Fisher information from the eigen-decomposition."""
    p, o2 = _weights(rho, O)
    s = p[:, None] + p[None, :]
    d = (p[:, None] - p[None, :]) ** 2
    mask = s > 1e-14
    return float(0.5 * np.sum(d[mask] / s[mask] * o2[mask]))


def wydi_exact(rho: DenseState, O: np.ndarray, alpha: complex) -> float:
    """``tr(rho O^2) - tr(rho^alpha O rho^(1-alpha) O)``, with ``0^alpha = 0``."""
    p, o2 = _weights(rho, O)
    with np.errstate(divide="ignore", invalid="ignore"):
        pa = np.where(p > 0, p.astype(complex) ** alpha, 0)
        pb = np.where(p > 0, p.astype(complex) ** (1 - alpha), 0)
    second = np.sum(pa[:, None] * pb[None, :] * o2)
    first = np.sum(p[:, None] * o2)
    val = first - second
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise ArithmeticError("skew information has an imaginary part")
    return float(val.real)


def variance_exact(rho: DenseState, O: np.ndarray) -> float:
    m1 = rho.expect(O).real
    return float(rho.expect(O @ O).real - m1 ** 2)


# ------------------------------------------------------ Gaussian <-> dense

def gaussian_density(gamma) -> np.ndarray:
    """Dense ``rho[Gamma]`` for a physical (Hermitian, purely imaginary) Gamma.

    Real Schur form of ``G = -i Gamma`` gives canonical Majorana pairs
    ``b = Q^T a`` with ``rho = prod_k (1 + i g_k b_{2k} b_{2k+1}) / 2``.
    """
    g = np.asarray(getattr(gamma, "data", gamma))
    n2 = g.shape[0]
    L = n2 // 2
    _check_size(L, 10)
    G = (-1j * g).real
    G = 0.5 * (G - G.T)
    T, Q = schur(G, output="real")
    a = _majoranas(L)
    dim = 2 ** L
    rho = np.eye(dim, dtype=complex)
    for k in range(L):
        b0 = sum(Q[m, 2 * k] * a[m] for m in range(n2))
        b1 = sum(Q[m, 2 * k + 1] * a[m] for m in range(n2))
        lam = T[2 * k, 2 * k + 1]
        rho = rho @ (0.5 * (np.eye(dim) + 1j * lam * (b0 @ b1)))
    rho = 0.5 * (rho + rho.conj().T)
    return rho


def correlations_from_operator(X: np.ndarray):
    """Read ``(tr X, Gamma)`` of a Gaussian operator ``X = c * rho[Gamma]``."""
    L = int(round(np.log2(X.shape[0])))
    a = _majoranas(L)
    tr = np.trace(X)
    n2 = 2 * L
    g = np.zeros((n2, n2), dtype=complex)
    for m in range(n2):
        for n in range(n2):
            if m != n:
                g[m, n] = -np.trace(X @ a[m] @ a[n]) / tr
    return tr, g
