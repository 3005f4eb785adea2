"""Coupled linearly implicit Euler-Maruyama for stochastic NSE and Leray-alpha.

Per mode k and step dt, with B and Q explicit and the Stokes term implicit:

    v+ = [v - dt B(u, v) + Q(u) dW] / (1 + nu dt lambda_k),    u = N_alpha v.

The Navier-Stokes reference is the alpha = 0 member of the same recursion
(N_0 = I, so u = v). All levels are advanced as one batch and consume the
same increment dW at every step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseIncrement, NoiseModel, NoiseStream, apply_Q, sample_increment
from .nonlinear import advect
from .spectral import ConfigError, GridSpec, helmholtz_multiplier, l4_norm4, spectral_sum, to_physical

log = logging.getLogger(__name__)


class BlowUpError(FloatingPointError):
    """Non-finite coefficients during time stepping."""

    def __init__(self, step: int, alpha: float | None = None, sample: int | None = None):
        self.step, self.alpha, self.sample = step, alpha, sample
        super().__init__(f"non-finite state at step {step} (alpha={alpha}, sample={sample})")


@dataclass(frozen=True)
class SimParams:
    grid: GridSpec
    nu: float
    dt: float
    T: float
    alphas: tuple
    noise: NoiseModel
    u0: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nu <= 0 or self.dt <= 0 or self.T <= 0:
            raise ConfigError("nu, dt and T must be positive")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-8 * max(1.0, steps):
            raise ConfigError(f"T/dt = {steps} is not a whole number of steps")
        a = np.asarray(self.alphas, dtype=float)
        if a.ndim != 1 or len(a) == 0:
            raise ConfigError("need at least one alpha")
        # alpha = 0 is accepted as a reference sentinel
        if np.any(a < 0) or np.any(a >= 1):
            raise ConfigError("every alpha must lie in [0, 1)")
        if np.any(np.diff(a) >= 0):
            raise ConfigError("alphas must be strictly decreasing")
        self.grid.check_shape(self.u0)
        if self.noise.grid != self.grid:
            raise ConfigError("noise model built for a different grid")
        if not np.isfinite(spectral_sum(self.grid, self.u0, 2)):
            raise ConfigError("initial condition has infinite |A u0|")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def implicit(self) -> np.ndarray:
        """Retained-mode mask divided by (1 + nu dt lambda)."""
        return self.grid.retained / (1.0 + self.nu * self.dt * self.grid.lam)


def _step(params: SimParams, V, filt, dW, nonlinear=True, uphys=False):
    U = V * filt
    rhs = V
    phys = None
    if nonlinear:
        if uphys:
            Bh, phys = advect(params.grid, U, V, return_physical=True)
        else:
            Bh = advect(params.grid, U, V)
        rhs = rhs - params.dt * Bh
    if dW is not None and not params.noise.is_zero:
        rhs = rhs + apply_Q(U, dW, params.noise)
    return rhs * params.implicit, U, phys


def step_nse(uh: np.ndarray, dW: NoiseIncrement | None, params: SimParams, nonlinear: bool = True) -> np.ndarray:
    """One step of the Navier-Stokes recursion.

    ``nonlinear=False`` drops B; it exists for testing the linear part.
    """
    new, _, _ = _step(params, uh, 1.0, dW, nonlinear)
    _check_finite(new, 0)
    return new


def step_leray(vh, dW, alpha, params: SimParams, nonlinear: bool = True):
    """One Leray-alpha step; returns (v+, u+ = N_alpha v+)."""
    filt = helmholtz_multiplier(params.grid, alpha)
    new, _, _ = _step(params, vh, filt, dW, nonlinear)
    _check_finite(new, 0, alpha)
    return new, new * filt


def _check_finite(a, step, alpha=None):
    if not np.all(np.isfinite(a)):
        raise BlowUpError(step, alpha)


@dataclass
class CoupledTrajectory:
    """Per-step diagnostics of a coupled run on the grid t_0 = 0, ..., t_M = T.

    Level 0 of ``S`` and ``L4`` is the Navier-Stokes reference; level i >= 1
    belongs to ``alphas[i - 1]``.

    Attributes:
        S: (4, levels, M+1) spectral sums |A^{p/2} u|^2, p = 0..3, of the
            transported velocity (u for NSE, u^alpha for Leray).
        L4: (levels, M+1) quadrature of int |u|^4.
        dH: (n_alpha, M+1) |u - u^alpha|.
        dV2: (n_alpha, M+1) |A^{1/2}(u - u^alpha)|^2.
    """

    alphas: tuple
    dt: float
    t: np.ndarray
    S: np.ndarray
    L4: np.ndarray
    dH: np.ndarray
    dV2: np.ndarray
    sample: int = 0
    final: np.ndarray | None = field(default=None, repr=False)

    @property
    def T(self) -> float:
        return float(self.t[-1])

    def level(self, alpha: float) -> int:
        """Row in dH/dV2 for ``alpha`` (add 1 for S/L4)."""
        for i, a in enumerate(self.alphas):
            if a == alpha:
                return i
        raise KeyError(alpha)


def initial_levels(params: SimParams) -> tuple[np.ndarray, np.ndarray]:
    """Stacked v(0) for [reference] + alphas, and their filter multipliers.

    Every level starts from u(0) = P_n u0, so v^alpha(0) = (I + alpha^2 A) P_n u0.
    """
    g = params.grid
    levels = np.concatenate([[0.0], np.asarray(params.alphas, dtype=float)])
    u0 = params.u0 * g.retained
    filt = helmholtz_multiplier(g, levels)
    V = np.broadcast_to(u0, (len(levels),) + g.shape) / filt
    return V, filt


def run_coupled(
    params: SimParams,
    seed: int = 0,
    sample: int = 0,
    nonlinear: bool = True,
    snapshot=None,
    domain: int = 1,
) -> CoupledTrajectory:
    """Advance NSE and every Leray-alpha level on shared increments.

    Deterministic in (params, seed, sample, domain); ``domain`` separates
    independent ensembles (e.g. a calibration pilot) drawn from one seed.
    ``snapshot`` is an optional :class:`~stochleray.snapshot.SnapshotWriter`.
    """
    g = params.grid
    M = params.n_steps
    stream = NoiseStream(seed, sample, domain)
    V, filt = initial_levels(params)
    nlev = V.shape[0]
    S = np.empty((4, nlev, M + 1))
    L4 = np.empty((nlev, M + 1))
    dH2 = np.empty((nlev - 1, M + 1))
    dV2 = np.empty((nlev - 1, M + 1))
    noisy = not params.noise.is_zero
    levels = (0.0,) + tuple(params.alphas)

    def record(m, U, phys):
        for p in range(4):
            S[p, :, m] = spectral_sum(g, U, p)
        if not np.all(np.isfinite(S[0, :, m])):
            bad = int(np.flatnonzero(~np.isfinite(S[0, :, m]))[0])
            raise BlowUpError(m, levels[bad], sample)
        L4[:, m] = l4_norm4(g, phys)
        D = U[0] - U[1:]
        dH2[:, m] = spectral_sum(g, D, 0)
        dV2[:, m] = spectral_sum(g, D, 1)
        if snapshot is not None:
            snapshot.write(m, U)

    for m in range(M):
        dW = sample_increment(stream, params.dt, params.noise, m) if noisy else None
        Vn, U, phys = _step(params, V, filt, dW, nonlinear, uphys=True)
        if phys is None:
            phys = to_physical(g, U)
        record(m, U, phys)
        V = Vn
    U = V * filt
    record(M, U, to_physical(g, U))
    return CoupledTrajectory(
        alphas=tuple(params.alphas),
        dt=params.dt,
        t=np.arange(M + 1) * params.dt,
        S=S,
        L4=L4,
        dH=np.sqrt(dH2),
        dV2=dV2,
        sample=sample,
        final=U,
    )
