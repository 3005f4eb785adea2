"""Error functional, stopping times and energy monitors on the time grid.

Time integrals use the left-endpoint rule, I(t_m) = sum_{j<m} dt f(t_j), so
that every running integral is adapted to the discrete filtration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import spectral_sum


def running_integral(f: np.ndarray, dt: float) -> np.ndarray:
    """Left-endpoint cumulative integral along the last axis, starting at 0."""
    f = np.asarray(f, dtype=float)
    out = np.zeros(f.shape)
    np.cumsum(dt * f[..., :-1], axis=-1, out=out[..., 1:])
    return out


@dataclass
class ErrorSeries:
    """Running parts of eps(t) = sup_{s<=t} |delta(s)| + (int_0^t |A^{1/2} delta|^2)^{1/2}.

    Can be filled incrementally with :meth:`update` or built at once with
    :meth:`from_arrays`.
    """

    dt: float
    sup: list = field(default_factory=list)
    integral: list = field(default_factory=list)
    _pending: float = 0.0

    def update(self, grid, uh, uh_alpha) -> "ErrorSeries":
        d = uh - uh_alpha
        h = float(np.sqrt(spectral_sum(grid, d, 0)))
        prev_sup = self.sup[-1] if self.sup else 0.0
        prev_int = self.integral[-1] if self.integral else 0.0
        self.sup.append(max(prev_sup, h))
        self.integral.append(prev_int + self._pending)
        self._pending = self.dt * float(spectral_sum(grid, d, 1))
        return self

    @classmethod
    def from_arrays(cls, dH: np.ndarray, dV2: np.ndarray, dt: float) -> "ErrorSeries":
        s = cls(dt)
        s.sup = list(np.maximum.accumulate(dH))
        s.integral = list(running_integral(dV2, dt))
        s._pending = dt * float(dV2[-1])
        return s

    @property
    def eps(self) -> np.ndarray:
        return np.asarray(self.sup) + np.sqrt(np.asarray(self.integral))

    @property
    def final(self) -> float:
        return float(self.eps[-1])


def update_error(series: ErrorSeries, grid, uh, uh_alpha) -> ErrorSeries:
    return series.update(grid, uh, uh_alpha)


def eps_series(dH: np.ndarray, dV2: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (sup-part, integral-part) along the last axis."""
    return np.maximum.accumulate(dH, axis=-1), running_integral(dV2, dt)


def eps_final(dH: np.ndarray, dV2: np.ndarray, dt: float) -> np.ndarray:
    sup, integ = eps_series(dH, dV2, dt)
    return sup[..., -1] + np.sqrt(integ[..., -1])


@dataclass(frozen=True)
class LocalizationState:
    """Stopping time of a running integral against threshold R.

    ``index`` is the grid index of tau (M when the integral never reaches R).
    ``omega`` marks samples whose integral stays strictly below R on [0, T];
    on those, tau = T.
    """

    integral: np.ndarray = field(repr=False)
    R: float
    index: int
    tau: float
    omega: bool


def first_crossing(integral: np.ndarray, R: float) -> int:
    """First index m with integral[m] >= R, or the last index if none."""
    hit = np.flatnonzero(integral >= R)
    return int(hit[0]) if hit.size else len(integral) - 1


def localize(integrand: np.ndarray, dt: float, R: float) -> LocalizationState:
    integ = running_integral(integrand, dt)
    idx = first_crossing(integ, R)
    return LocalizationState(integ, R, idx, idx * dt, bool(integ[-1] < R))


CRITERIA = ("L4", "V2")


def integrand(traj, alpha: float, criterion: str = "L4") -> np.ndarray:
    """||u^alpha||_{L4}^4 (``L4``) or |A^{1/2} u^alpha|^2 (``V2``) per step."""
    lev = traj.level(alpha) + 1
    if criterion == "L4":
        return traj.L4[lev]
    if criterion == "V2":
        return traj.S[1, lev]
    raise ValueError(f"unknown localization criterion {criterion!r}")


def stopping_time(traj, alpha: float, R: float, criterion: str = "L4") -> float:
    return localize(integrand(traj, alpha, criterion), traj.dt, R).tau


def localized_error_from_arrays(dH, dV2, dt, index: int) -> float:
    """sup_{j<=index} |delta_j|^2 + 4 * sum_{j<index} dt |A^{1/2} delta_j|^2."""
    sup = float(np.max(dH[: index + 1]) ** 2)
    return sup + 4.0 * dt * float(np.sum(dV2[:index]))


def localized_error(traj, alpha: float, R: float, criterion: str = "L4") -> float:
    i = traj.level(alpha)
    if np.isinf(R):
        idx = len(traj.t) - 1
    else:
        idx = localize(integrand(traj, alpha, criterion), traj.dt, R).index
    return localized_error_from_arrays(traj.dH[i], traj.dV2[i], traj.dt, idx)


@dataclass(frozen=True)
class EnergyMonitors:
    """Energy functionals of u^alpha and the NSE reference per time step.

    m1 = |u|^2 + 2 a^2 |A^{1/2}u|^2 + a^4 |Au|^2 (equal to |v^alpha|^2),
    y = |A^{1/2}u|^2 + a^2 |Au|^2, dissipation = |Au|^2 + a^2 |A^{3/2}u|^2.
    """

    m1: np.ndarray
    y: np.ndarray
    dissipation: np.ndarray
    nse_H2: np.ndarray
    nse_V2: np.ndarray


def monitors_from_sums(S: np.ndarray, alpha: float, ref_S: np.ndarray | None = None) -> EnergyMonitors:
    """Monitors from spectral sums S[p] = |A^{p/2} u^alpha|^2, p = 0..3."""
    a2 = alpha**2
    m1 = S[0] + 2 * a2 * S[1] + a2**2 * S[2]
    y = S[1] + a2 * S[2]
    diss = S[2] + a2 * S[3]
    ref = S if ref_S is None else ref_S
    return EnergyMonitors(m1, y, diss, ref[0], ref[1])


def energy_monitors(grid, uh_alpha: np.ndarray, alpha: float, uh_ref: np.ndarray | None = None) -> EnergyMonitors:
    S = np.stack([spectral_sum(grid, uh_alpha, p) for p in range(4)])
    ref = None if uh_ref is None else np.stack([spectral_sum(grid, uh_ref, p) for p in range(2)])
    return monitors_from_sums(S, alpha, ref)


def trajectory_monitors(traj, alpha: float) -> EnergyMonitors:
    return monitors_from_sums(traj.S[:, traj.level(alpha) + 1], alpha, traj.S[:, 0])
