"""Skew information and quantum Fisher information of ``X_A = sum_{s in A} X_s``.

All quantities are evaluated on the restriction of a Gaussian state to a
contiguous block of sites ``A`` (a Python ``range``). The central object is

    T_alpha(s, u) = tr(rho^alpha X_s rho^(1-alpha) X_u),   s <= u,

obtained from one Gaussian product per ``s`` (the conjugation by ``X_s``
acts on ``rho^(1-alpha)`` by a sign pattern) and one nested Pfaffian sweep
over ``u``.  The quarter QFI follows from the sech-weighted integral of
``J_beta = I_{1/2 + i beta}``.
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import curve_fit

from .gaussian import (ModeData, _mat, gaussian_product, mode_data,
                       product_weight, two_point_rows, x_string_signs)
from .pfaffian import leading_pfaffians

log = logging.getLogger(__name__)

IMAG_TOL = 1e-9


@dataclass(frozen=True)
class QFIConfig:
    """Settings of the J_beta sampling, nested integration and saturation fit."""

    beta_max: float = 3.0
    beta_step: float = 0.1
    n_domains: int = 12
    domain_step: float = 0.25
    fit_window: int = 3

    def __post_init__(self):
        if self.beta_step <= 0 or self.beta_max <= 0:
            raise ValueError("beta grid must have positive extent and spacing")
        if self.n_domains < 3:
            raise ValueError("the saturation fit needs at least three domains")
        if not 3 <= self.fit_window <= self.n_domains:
            raise ValueError("fit window must hold between 3 and n_domains points")
        if self.n_domains * self.domain_step > self.beta_max + 1e-12:
            raise ValueError("nested domains exceed the sampled beta range")

    @property
    def betas(self) -> np.ndarray:
        n = int(round(self.beta_max / self.beta_step))
        return self.beta_step * np.arange(n + 1)

    @property
    def domains(self) -> np.ndarray:
        return self.domain_step * np.arange(1, self.n_domains + 1)


@dataclass
class FitDiagnostics:
    amplitude: float = 0.0
    rate: float = 0.0
    residual: float = 0.0
    converged: bool = True
    partial_integrals: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class MeasureReport:
    """Measures of one subsystem at one time."""

    subsystem: range
    variance: float
    wydi_grid: list
    qfi_over_4: float
    qfi_err: float
    lower_bound: float
    upper_bound: float
    chi: float
    fit: FitDiagnostics
    i_half: float = 0.0
    i_third: float = 0.0
    time: float = 0.0

    def row(self) -> dict:
        return {
            "time": self.time,
            "subsystem_left": self.subsystem.start,
            "subsystem_right": self.subsystem.stop - 1,
            "variance": self.variance,
            "I_half": self.i_half,
            "I_third": self.i_third,
            "qfi_over4": self.qfi_over_4,
            "qfi_err": self.qfi_err,
            "chi": self.chi,
            "lower": self.lower_bound,
            "upper": self.upper_bound,
        }


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("QFI_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Map preserving input order; threads capped by ``QFI_THREADS``."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass
class Block:
    """Restriction of a state to a subsystem, with its mode decomposition."""

    sites: range
    gamma: np.ndarray
    modes: ModeData
    total: float
    pure: bool


def _block(g, sites: range) -> np.ndarray:
    m = _mat(g)
    if not isinstance(sites, range) or sites.step != 1:
        raise TypeError("subsystem must be a contiguous range of sites")
    if sites.start < 0 or sites.stop > m.shape[0] // 2 or len(sites) == 0:
        raise IndexError("subsystem outside the window")
    lo, hi = 2 * sites.start, 2 * sites.stop
    return np.ascontiguousarray(m[lo:hi, lo:hi])


def prepare(g, sites: range, pure_tol: float = 1e-10) -> Block:
    """Restrict ``g`` to ``sites`` and decompose it into modes.

    If the whole window is in a pure state the block's coupling to the rest
    of the window is used to resolve nearly pure modes accurately.
    """
    full = _mat(g)
    m = _block(full, sites)
    lo, hi = 2 * sites.start, 2 * sites.stop
    coupling = None
    if hi - lo < full.shape[0]:
        ev = np.linalg.eigvalsh(full)
        if np.all(np.abs(ev) > 1.0 - pure_tol):
            coupling = np.concatenate([full[lo:hi, :lo], full[lo:hi, hi:]], axis=1)
    modes = mode_data(m, coupling)
    total = _sum_two_point(two_point_rows(m))
    pure = bool(np.all(modes.low < 0.5 * pure_tol))
    return Block(sites, m, modes, total, pure)


def _sum_two_point(t: np.ndarray) -> float:
    """``sum_{s,u} <X_s X_u>`` from the upper-triangular table of two_point_rows."""
    n = t.shape[0]
    return float(n + 2.0 * np.triu(t, 1).real.sum())


def variance_x(g, sites: range) -> float:
    """Variance of ``X_A``; the one-point term vanishes for parity-even Gamma."""
    m = _block(g, sites)
    return _sum_two_point(two_point_rows(m))


def cross_terms(block: Block, alpha: complex) -> np.ndarray:
    """Upper-triangular ``T_alpha(s, u)`` for a prepared block."""
    n = block.gamma.shape[0] // 2
    _, ga = block.modes.power(alpha)
    _, gb = block.modes.power(1 - alpha)
    base = product_weight(ga, gb)
    out = np.zeros((n, n), dtype=np.complex128)
    phases = 1j ** np.arange(n)
    for s in range(n):
        d = x_string_signs(2 * n, s)
        f = gaussian_product(ga, d[:, None] * gb * d[None, :])
        ratio = f.prefactor / base
        out[s, s] = ratio
        if s + 1 < n:
            sec = f.gamma.data[2 * s + 1: 2 * n - 1, 2 * s + 1: 2 * n - 1]
            out[s, s + 1:] = ratio * phases[1: n - s] * leading_pfaffians(sec)
    return out


def _skew_from_terms(total: float, ta: np.ndarray, tb: np.ndarray) -> complex:
    second = np.trace(ta) + np.triu(ta, 1).sum() + np.triu(tb, 1).sum()
    return total - second


def block_wydi(block: Block, alpha: complex) -> float:
    """Skew information of a prepared block (variance if the block is pure)."""
    if block.pure:
        return block.total
    ta = cross_terms(block, alpha)
    if np.imag(alpha) == 0:
        tb = ta.conj()
    else:
        tb = cross_terms(block, 1 - alpha)
    val = _skew_from_terms(block.total, ta, tb)
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(block.total)):
        raise ArithmeticError(f"skew information has imaginary part {val.imag:.3e}")
    return float(val.real)


def wydi(g, sites: range, alpha: complex) -> float:
    """Wigner-Yanase-Dyson skew information ``I_alpha(rho_A, X_A)``.

    ``alpha`` may be complex with real part in (0, 1). Pure restrictions
    return the variance.
    """
    if not 0 < np.real(alpha) < 1:
        raise ValueError("Re(alpha) must lie in (0, 1)")
    return block_wydi(prepare(g, sites), alpha)


def rotated_wydi(g, sites: range, betas) -> np.ndarray:
    """``J_beta = I_{1/2 + i beta}`` on a list of ``beta`` values."""
    block = g if isinstance(g, Block) else prepare(g, sites)
    betas = np.asarray(betas, dtype=float)
    return np.array(ordered_map(lambda b: block_wydi(block, 0.5 + 1j * b), betas))


def _sech_weighted_integrals(betas, values, domains):
    """``int_{-B}^{B} J(b)/cosh(pi b) db`` of the even cubic interpolant, per B."""
    full_b = np.concatenate([-betas[:0:-1], betas])
    full_v = np.concatenate([values[:0:-1], values])
    spline = CubicSpline(full_b, full_v)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    cuts = np.unique(np.concatenate([betas, domains]))
    lo, hi = cuts[:-1], cuts[1:]
    x = lo[:, None] + 0.5 * (hi - lo)[:, None] * (nodes + 1.0)
    pieces = (weights * spline(x) / np.cosh(np.pi * x)).sum(axis=1) * 0.5 * (hi - lo)
    running = np.concatenate([[0.0], np.cumsum(pieces)])
    idx = np.searchsorted(cuts, domains - 1e-12)
    return 2.0 * running[idx]


def _saturation(b, c, a, rate):
    return c - a * np.exp(-rate * b)


def _three_point(domains, partial):
    """Exact ``c - a exp(-rate B)`` through the last three nested integrals."""
    y1, y2, y3 = partial[-3:]
    h = domains[-1] - domains[-2]
    d1, d2 = y2 - y1, y3 - y2
    r = d2 / d1
    rate = -np.log(r) / h
    a = d1 / (np.exp(-rate * domains[-3]) * (1 - r))
    return y3 + d2 * r / (1 - r), a, rate


def saturation_fit(domains: np.ndarray, partial: np.ndarray, window: int = 3):
    """Fit ``c - a exp(-rate B)`` to the last ``window`` nested integrals.

    The least-squares fit is seeded by the exact solution through the last
    three points. The reported uncertainty is the larger of the fit residual
    and the shift of ``c`` when one more domain enters the fit.

    Returns ``(c, uncertainty, diagnostics)``.
    """
    domains = np.asarray(domains, dtype=float)
    partial = np.asarray(partial, dtype=float)
    y3 = float(partial[-1])
    d1, d2 = partial[-2] - partial[-3], partial[-1] - partial[-2]
    diag = FitDiagnostics(partial_integrals=partial.copy())
    scale = max(abs(y3), 1e-300)
    if abs(d2) < 1e-14 * scale:
        # saturated below round-off
        diag.residual = abs(d2)
        return y3, float(abs(d2)), diag
    if not 0 < d2 / d1 < 1:
        diag.converged = False
        diag.residual = abs(d2)
        log.warning("nested integrals are not saturating; using the widest domain")
        return y3, float(abs(d2)), diag

    def fit(n):
        seed = _three_point(domains, partial)
        if n <= 3:
            return seed, 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            popt, _ = curve_fit(_saturation, domains[-n:], partial[-n:], p0=seed, maxfev=5000)
        resid = partial[-n:] - _saturation(domains[-n:], *popt)
        return tuple(popt), float(np.sqrt(np.mean(resid ** 2)))

    try:
        (c, a, rate), resid = fit(window)
        (c_more, _, _), _ = fit(min(window + 1, len(domains)))
    except (RuntimeError, ValueError, FloatingPointError):
        diag.converged = False
        diag.residual = abs(d2)
        log.warning("saturation fit failed; using the widest domain")
        return y3, float(abs(d2)), diag
    if not (np.isfinite(c) and rate > 0):
        diag.converged = False
        diag.residual = abs(d2)
        return y3, float(abs(d2)), diag
    diag.amplitude, diag.rate, diag.residual = float(a), float(rate), resid
    return float(c), float(max(resid, abs(c - c_more))), diag


def qfi_from_rotated(betas, values, cfg: QFIConfig):
    partial = _sech_weighted_integrals(np.asarray(betas), np.asarray(values), cfg.domains)
    return saturation_fit(cfg.domains, partial, cfg.fit_window)


def qfi_estimate(g, sites: range, cfg: QFIConfig | None = None):
    """Quarter QFI from the sech-weighted integral of ``J_beta``.

    Returns ``(qfi_over_4, uncertainty, diagnostics)``.
    """
    cfg = cfg or QFIConfig()
    block = g if isinstance(g, Block) else prepare(g, sites)
    if block.pure:
        return block.total, 0.0, FitDiagnostics()
    betas = cfg.betas
    values = rotated_wydi(block, sites, betas)
    return qfi_from_rotated(betas, values, cfg)


def renyi_inf_factor(modes: ModeData) -> float:
    """``exp(S_inf) = 1 / (largest eigenvalue of rho)``."""
    high = 1.0 - modes.low
    order = np.argsort(-modes.lam, kind="stable")[: modes.n_modes]
    return float(1.0 / np.prod(high[order]))


def squared_state(block: Block):
    """``(tr rho^2, block of rho^2 / tr rho^2)``."""
    pref, mat = block.modes.power(2)
    low, high = block.modes.low, 1.0 - block.modes.low
    low2 = low ** 2 / (low ** 2 + high ** 2)
    lam2 = np.sign(block.modes.lam) * (1.0 - 2.0 * low2)
    modes = ModeData(block.modes.vectors, lam2, low2)
    total = _sum_two_point(two_point_rows(mat))
    sq = Block(block.sites, mat, modes, total, bool(np.all(low2 < 0.5e-10)))
    return pref.real, sq


def qfi_bounds(g, sites: range):
    """``(I, 2I, 10 I - 9 I_{1/3}, exp(S_inf) I(rho^2) / 4)``.

    ``I(rho^2)`` uses the unnormalized square, ``tr(rho^2) I(rho^2/tr rho^2)``.
    """
    block = g if isinstance(g, Block) else prepare(g, sites)
    if not np.any(block.gamma):
        return 0.0, 0.0, 0.0, 0.0
    i_half = block_wydi(block, 0.5)
    i_third = block_wydi(block, 1.0 / 3.0)
    purity, sq = squared_state(block)
    lower_rho2 = 0.25 * renyi_inf_factor(block.modes) * purity * block_wydi(sq, 0.5)
    return i_half, 2 * i_half, 10 * i_half - 9 * i_third, lower_rho2


def chi(qfi_over_4: float, sites) -> float:
    """Normalized QFI, using ``||X_A|| = |A|``."""
    return float(qfi_over_4) / len(sites) ** 2


def measure(g, sites: range, cfg: QFIConfig | None = None, time: float = 0.0,
            alphas=(0.5, 1.0 / 3.0)) -> MeasureReport:
    """Full report: variance, skew informations, QFI estimate, bounds and chi."""
    cfg = cfg or QFIConfig()
    block = prepare(g, sites)
    grid = [(a, block_wydi(block, a)) for a in alphas]
    lookup = dict(grid)
    i_half = lookup[0.5] if 0.5 in lookup else block_wydi(block, 0.5)
    third = 1.0 / 3.0
    i_third = lookup[third] if third in lookup else block_wydi(block, third)
    if block.pure:
        q, err, diag = block.total, 0.0, FitDiagnostics()
    else:
        betas = cfg.betas
        values = rotated_wydi(block, sites, betas)
        grid.extend((0.5 + 1j * b, v) for b, v in zip(betas, values))
        q, err, diag = qfi_from_rotated(betas, values, cfg)
    upper = min(2 * i_half, 10 * i_half - 9 * i_third)
    return MeasureReport(subsystem=sites, variance=block.total, wydi_grid=grid,
                         qfi_over_4=q, qfi_err=err, lower_bound=i_half,
                         upper_bound=upper, chi=chi(q, sites), fit=diag,
                         i_half=i_half, i_third=i_third, time=time)
