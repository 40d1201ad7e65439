"""Quantum XY chain: parameters, dispersion and quench spectral data.

The chain is

    H = -sum_l [ (1+gamma)/2 X_l X_{l+1} + (1-gamma)/2 Y_l Y_{l+1} + h Z_l ]

and its quasiparticles have energy ``eps_k = 2 sqrt((h - cos k)^2 + gamma^2 sin^2 k)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_GRID = 4096


class CriticalMomentumWarning(RuntimeWarning):
    """Group velocity requested at a momentum where the gap closes."""


@dataclass(frozen=True)
class ChainModel:
    """XY chain with transverse field ``h`` and anisotropy ``gamma``."""

    h: float
    gamma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.h) and np.isfinite(self.gamma)):
            raise ValueError("h and gamma must be finite")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def ferromagnetic(self) -> bool:
        return abs(self.h) < 1 and self.gamma != 0

    @property
    def critical(self) -> bool:
        return abs(self.h) == 1.0

    @property
    def is_ising(self) -> bool:
        return self.gamma == 1.0


@dataclass(frozen=True)
class QuenchPair:
    """Sudden change of the transverse field from ``pre.h`` to ``post.h``."""

    pre: ChainModel
    post: ChainModel

    @classmethod
    def ising(cls, h0: float, h: float) -> "QuenchPair":
        return cls(ChainModel(h0, 1.0), ChainModel(h, 1.0))

    def _require_ising(self):
        if self.pre.gamma != 1.0 or self.post.gamma != 1.0:
            raise ValueError("this quench formula is only available for gamma = 1")


def dispersion(model: ChainModel, k):
    """Quasiparticle energy ``eps_k`` (even in k, nonnegative)."""
    k = np.asarray(k, dtype=float)
    h, g = model.h, model.gamma
    return 2.0 * np.sqrt((h - np.cos(k)) ** 2 + (g * np.sin(k)) ** 2)


def group_velocity(model: ChainModel, k):
    """Group velocity ``d eps_k / dk``.

    At gap-closing momenta the one-sided limits differ in sign; the symmetric
    limit (zero) is returned and a :class:`CriticalMomentumWarning` is issued.
    """
    k = np.asarray(k, dtype=float)
    h, g = model.h, model.gamma
    s, c = np.sin(k), np.cos(k)
    num = 2.0 * h * s + 2.0 * (g * g - 1.0) * s * c
    den = np.sqrt((h - c) ** 2 + (g * s) ** 2)
    zero = den == 0.0
    if np.any(zero):
        warnings.warn("group velocity evaluated at a critical momentum",
                      CriticalMomentumWarning, stacklevel=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(zero, 0.0, num / np.where(zero, 1.0, den))
    return v if v.ndim else float(v)


def max_velocity(model: ChainModel, n_grid: int = DEFAULT_GRID) -> float:
    """Largest ``|v_k|`` over the Brillouin zone.

    Dense grid scan on ``[0, pi]`` (|v| is even) followed by a bounded
    golden-section refinement around the best grid point.
    """
    ks = np.linspace(0.0, np.pi, n_grid + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CriticalMomentumWarning)
        speed = np.abs(group_velocity(model, ks))
        i = int(np.argmax(speed))
        lo, hi = ks[max(i - 1, 0)], ks[min(i + 1, n_grid)]
        best = float(speed[i])
        if hi > lo:
            res = minimize_scalar(lambda k: -abs(group_velocity(model, k)),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-13})
            best = max(best, -float(res.fun))
    # sup at a gap-closing momentum is a one-sided limit, not attained
    if model.critical and model.gamma != 0:
        eps = 1e-9
        k0 = 0.0 if model.h > 0 else np.pi
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CriticalMomentumWarning)
            best = max(best, abs(float(group_velocity(model, k0 + eps))))
    return best


def bogoliubov_angle_difference(q: QuenchPair, k):
    """``cos Delta_k`` between pre- and post-quench Bogoliubov angles (Ising only)."""
    q._require_ising()
    k = np.asarray(k, dtype=float)
    h0, h = q.pre.h, q.post.h
    c = np.cos(k)
    num = h * h0 - (h + h0) * c + 1.0
    den = np.sqrt(1.0 + h0 * h0 - 2.0 * h0 * c) * np.sqrt(1.0 + h * h - 2.0 * h * c)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = num / den
    if np.any(np.abs(val) > 1.0 + 1e-12):
        raise ValueError("cos Delta_k outside [-1, 1]")
    val = np.clip(val, -1.0, 1.0)
    return val if val.ndim else float(val)


def c_ff(q: QuenchPair) -> float:
    """Amplitude of the late-time order-parameter two-point function."""
    q._require_ising()
    h0, h = q.pre.h, q.post.h
    if not (abs(h0) < 1 and abs(h) < 1 and h0 * h < 1):
        raise ValueError("amplitude defined only for quenches within the ordered phase")
    num = 1.0 - h0 * h + np.sqrt((1 - h0 * h0) * (1 - h * h))
    return float(num / (2.0 * np.sqrt(1 - h0 * h) * (1 - h0 * h0) ** 0.25))


def ground_magnetization(model: ChainModel) -> float:
    """Spontaneous magnetization ``<+|X|+>`` of the Ising chain, ``(1-h^2)^(1/8)``."""
    if not model.is_ising:
        raise ValueError("closed form only for gamma = 1")
    return float((1.0 - model.h ** 2) ** 0.125) if abs(model.h) < 1 else 0.0


def coupling_matrix(model: ChainModel, n_sites: int, periodic: bool = False) -> np.ndarray:
    """Real antisymmetric ``A`` with ``H = (i/4) a^T A a`` on an open chain.

    Majorana ``a[2s]`` is the x-type (string times X_s), ``a[2s+1]`` the y-type.
    ``periodic`` closes the fermion chain without the parity twist and is
    only meant for bulk-symbol comparisons.
    """
    n = 2 * n_sites
    a = np.zeros((n, n))
    h, g = model.h, model.gamma
    for s in range(n_sites):
        a[2 * s, 2 * s + 1] = 2.0 * h
    bonds = n_sites if periodic and n_sites > 2 else n_sites - 1
    for s in range(bonds):
        u = (s + 1) % n_sites
        a[2 * s + 1, 2 * u] += 1.0 + g
        a[2 * s, 2 * u + 1] += -(1.0 - g)
    return a - a.T


def symbol_blocks(model: ChainModel) -> dict[int, np.ndarray]:
    """Translation-invariant 2x2 blocks ``A[site l, site l+d]`` for d in {-1, 0, 1}."""
    h, g = model.h, model.gamma
    b0 = np.array([[0.0, 2.0 * h], [-2.0 * h, 0.0]])
    b1 = np.array([[0.0, -(1.0 - g)], [1.0 + g, 0.0]])
    return {-1: -b1.T, 0: b0, 1: b1}


def symbol(model: ChainModel, k) -> np.ndarray:
    """Bloch symbol ``sum_d A_d e^{ikd}``, shape ``(len(k), 2, 2)``, anti-Hermitian."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    blocks = symbol_blocks(model)
    out = np.zeros((k.size, 2, 2), dtype=complex)
    for d, b in blocks.items():
        out += np.exp(1j * k * d)[:, None, None] * b
    return out
