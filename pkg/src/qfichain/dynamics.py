"""Unitary evolution and localized kicks of Gaussian states on a finite window.

Positions are window indices ``0 .. W-1``. The window is an open chain; it
has to be padded so that neither boundary reflections nor the light cones
of the kicks reach the region of interest (see :func:`window_layout`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gaussian import CorrelationMatrix, _mat, conjugate_by_signs, x_string_signs
from .model import ChainModel, coupling_matrix, max_velocity

KICK_KINDS = ("spin_flip_z", "majorana_odd", "majorana_even", "sigma_x_string")
DEFAULT_PAD = 16


class LightconeOverflowWarning(RuntimeWarning):
    """A light cone came closer to the window edge than the requested padding."""


@dataclass(frozen=True)
class KickEvent:
    """Local unitary applied at ``time`` on ``site``.

    ``majorana_odd`` is the x-type Majorana of the site (wall on its left),
    ``majorana_even`` the y-type one (wall on its right).
    """

    time: float
    site: int
    kind: str = "spin_flip_z"

    def __post_init__(self):
        if self.kind not in KICK_KINDS:
            raise ValueError(f"unknown kick kind {self.kind!r}")
        if self.time < 0:
            raise ValueError("kick times must be nonnegative")

    def wall_positions(self) -> list[float]:
        """Domain-wall positions created by the kick (half-integer lattice)."""
        j = self.site
        if self.kind == "spin_flip_z":
            return [j - 0.5, j + 0.5]
        if self.kind == "majorana_odd":
            return [j - 0.5]
        if self.kind == "majorana_even":
            return [j + 0.5]
        return []


@dataclass(frozen=True)
class KickSchedule:
    events: tuple = field(default_factory=tuple)
    horizon: float = 0.0

    def __post_init__(self):
        ev = tuple(self.events)
        object.__setattr__(self, "events", ev)
        times = [e.time for e in ev]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("kick times must be non-decreasing")
        if times and times[-1] > self.horizon:
            raise ValueError("kick after the schedule horizon")

    @classmethod
    def periodic(cls, site: int, period: float, horizon: float,
                 kind: str = "spin_flip_z", start: float = 0.0) -> "KickSchedule":
        """Kicks at ``start, start + period, ...`` up to ``horizon``."""
        if period <= 0:
            raise ValueError("period must be positive")
        n = int(math.floor((horizon - start) / period + 1e-12)) + 1
        events = [KickEvent(start + i * period, site, kind) for i in range(max(n, 0))]
        return cls(tuple(events), horizon)


@dataclass(frozen=True)
class WindowLayout:
    n_sites: int
    offset: int  # window index of lattice position 0

    def index(self, position: int) -> int:
        return position + self.offset


def window_layout(region: tuple[int, int], horizon: float, vmax: float,
                  pad: int = DEFAULT_PAD) -> WindowLayout:
    """Window covering lattice positions ``region = (first, last)`` plus cones.

    ``W = (last - first + 1) + 2 ceil(vmax T) + pad``.
    """
    first, last = region
    reach = int(math.ceil(vmax * horizon))
    margin = reach + pad // 2
    n = (last - first + 1) + 2 * reach + pad
    return WindowLayout(n, margin - first)


@lru_cache(maxsize=32)
def _spectral(model: ChainModel, n_sites: int):
    a = coupling_matrix(model, n_sites)
    e, v = np.linalg.eigh(1j * a)
    return e, v


def rotation(model: ChainModel, n_sites: int, dt: float) -> np.ndarray:
    """Orthogonal ``R = exp(A dt)`` acting on the Majoranas of the window."""
    e, v = _spectral(model, n_sites)
    # A = -i (iA) so exp(A dt) = V exp(-i e dt) V^dagger
    r = (v * np.exp(-1j * e * dt)) @ v.conj().T
    return np.ascontiguousarray(r.real)


def evolve(g, model: ChainModel, dt: float) -> CorrelationMatrix:
    """``Gamma -> R Gamma R^T`` with ``R = exp(A dt)``."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    m = _mat(g)
    if dt == 0:
        return g if isinstance(g, CorrelationMatrix) else CorrelationMatrix(m)
    r = rotation(model, m.shape[0] // 2, dt)
    if not np.any(m.real):
        out = 1j * (r @ m.imag @ r.T)
    else:
        out = r @ m @ r.T
    return CorrelationMatrix(out, check=False)


def apply_spin_flip(g, site: int) -> CorrelationMatrix:
    """Conjugation by ``Z_site``: both Majoranas of the site change sign."""
    m = _mat(g)
    d = np.ones(m.shape[0])
    d[2 * site: 2 * site + 2] = -1.0
    return conjugate_by_signs(m, d)


def apply_majorana(g, index: int) -> CorrelationMatrix:
    """Conjugation ``a_m rho a_m``: every Majorana except ``a_m`` changes sign."""
    m = _mat(g)
    if not 0 <= index < m.shape[0]:
        raise IndexError("Majorana index outside the window")
    d = -np.ones(m.shape[0])
    d[index] = 1.0
    return conjugate_by_signs(m, d)


def apply_kick(g, event: KickEvent, layout: WindowLayout | None = None) -> CorrelationMatrix:
    site = layout.index(event.site) if layout else event.site
    m = _mat(g)
    if not 0 <= site < m.shape[0] // 2:
        raise IndexError("kick outside the window")
    if event.kind == "spin_flip_z":
        return apply_spin_flip(m, site)
    if event.kind == "majorana_odd":
        return apply_majorana(m, 2 * site)
    if event.kind == "majorana_even":
        return apply_majorana(m, 2 * site + 1)
    return conjugate_by_signs(m, x_string_signs(m.shape[0], site))


def _check_cones(schedule: KickSchedule, t: float, n_sites: int, vmax: float,
                 layout: WindowLayout | None, pad: int):
    for ev in schedule.events:
        if ev.time > t:
            break
        site = layout.index(ev.site) if layout else ev.site
        reach = vmax * (t - ev.time)
        if min(site, n_sites - 1 - site) - reach < pad // 2:
            warnings.warn(f"light cone of kick at site {ev.site} (t={ev.time}) "
                          f"reaches the window edge by t={t}",
                          LightconeOverflowWarning, stacklevel=3)
            return


def run_schedule(g0, model: ChainModel, schedule: KickSchedule, sample_times,
                 layout: WindowLayout | None = None, pad: int = DEFAULT_PAD) -> list:
    """Interleave evolution and kicks; return Gamma at each sample time.

    At a time where both a sample and a kick occur the sample is taken first.
    """
    times = [float(t) for t in sample_times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("sample times must be sorted")
    if times and (times[0] < 0 or times[-1] > max(schedule.horizon, times[-1])):
        raise ValueError("sample times outside the schedule")
    m = _mat(g0)
    n_sites = m.shape[0] // 2
    vmax = max_velocity(model)
    g = g0 if isinstance(g0, CorrelationMatrix) else CorrelationMatrix(m)
    now = 0.0
    pending = list(schedule.events)
    out = []
    for t in times:
        # kicks strictly before the sample time
        while pending and pending[0].time < t:
            ev = pending.pop(0)
            g = evolve(g, model, ev.time - now)
            now = ev.time
            g = apply_kick(g, ev, layout)
        g = evolve(g, model, t - now)
        now = t
        _check_cones(schedule, t, n_sites, vmax, layout, pad)
        out.append(g)
    return out
