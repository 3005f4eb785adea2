"""Fourier representation of divergence-free periodic velocity fields.

Fields live on the square torus [0, L)^2 with N collocation points per axis.
Spectral arrays have shape ``(..., 2, N, N)``: the two velocity components
followed by the (kx, ky) mode indices in FFT order. Coefficients are the
true Fourier coefficients,

    u(x) = sum_k  uh[k] * exp(i kappa(k) . x),   kappa(k) = (2 pi / L) k,

so they do not depend on N and the L^2 inner product is
``<u, w> = L^2 * sum_k Re(uh[k] . conj(wh[k]))``.

Every linear operator here (Leray projector, Stokes powers, Helmholtz filter)
is a per-mode multiplier and broadcasts over leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft


class ConfigError(ValueError):
    """Inconsistent grid, shape or parameter configuration."""


@dataclass(frozen=True)
class GridSpec:
    """Periodic square grid with a dealiased Galerkin truncation.

    Attributes:
        L: period in both axes.
        N: collocation points per axis (even, >= 8).
        dealias_fraction: retained fraction of the N/2 resolvable modes; modes
            with max(|kx|, |ky|) > dealias_fraction * N / 2 are zeroed.
        galerkin_cutoff: optional lower bound on the retained max(|kx|, |ky|).
    """

    L: float = 2 * np.pi
    N: int = 64
    dealias_fraction: float = 2.0 / 3.0
    galerkin_cutoff: int | None = None

    def __post_init__(self):
        if self.N % 2 or self.N < 8:
            raise ConfigError(f"N must be even and >= 8, got {self.N}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ConfigError("dealias_fraction must lie in (0, 1]")
        if self.L <= 0:
            raise ConfigError("period L must be positive")
        if self.dealias_fraction * self.N / 2 < 2:
            raise ConfigError("dealiasing leaves fewer than 2 modes per axis")
        if self.galerkin_cutoff is not None:
            if not 1 <= self.galerkin_cutoff <= self.dealias_cutoff:
                raise ConfigError(
                    f"galerkin_cutoff must lie in [1, {self.dealias_cutoff}]"
                )

    @property
    def dealias_cutoff(self) -> int:
        # small epsilon so that 2/3 * 48 / 2 = 16 is not floored to 15
        return int(np.floor(self.dealias_fraction * self.N / 2 + 1e-9))

    @property
    def kmax(self) -> int:
        """Largest retained max(|kx|, |ky|)."""
        if self.galerkin_cutoff is None:
            return self.dealias_cutoff
        return self.galerkin_cutoff

    @property
    def shape(self) -> tuple[int, int, int]:
        return (2, self.N, self.N)

    @property
    def k0(self) -> float:
        return 2 * np.pi / self.L

    @cached_property
    def kx(self) -> np.ndarray:
        """Integer mode index along x, shape (N, 1)."""
        return np.fft.fftfreq(self.N, 1.0 / self.N).astype(int)[:, None]

    @cached_property
    def ky(self) -> np.ndarray:
        return np.fft.fftfreq(self.N, 1.0 / self.N).astype(int)[None, :]

    @cached_property
    def kappa(self) -> np.ndarray:
        """Physical wavevectors, shape (2, N, N)."""
        kx, ky = np.broadcast_arrays(self.kx, self.ky)
        return self.k0 * np.stack([kx, ky]).astype(float)

    @cached_property
    def lam(self) -> np.ndarray:
        """Stokes eigenvalue (2 pi / L)^2 |k|^2 per mode, shape (N, N)."""
        return self.k0**2 * (self.kx**2 + self.ky**2).astype(float)

    @cached_property
    def kinf(self) -> np.ndarray:
        return np.maximum(np.abs(self.kx), np.abs(self.ky))

    @cached_property
    def retained(self) -> np.ndarray:
        """Boolean mask of the Galerkin space: 0 < max(|kx|,|ky|) <= kmax."""
        return (self.kinf <= self.kmax) & (self.kinf > 0)

    @property
    def lambda1(self) -> float:
        return self.k0**2

    @cached_property
    def x(self) -> np.ndarray:
        """Collocation coordinates (N,)."""
        return np.arange(self.N) * (self.L / self.N)

    def check_shape(self, uh: np.ndarray) -> None:
        if uh.shape[-3:] != self.shape:
            raise ConfigError(f"expected trailing shape {self.shape}, got {uh.shape}")


def project_leray(grid: GridSpec, raw: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto divergence-free, zero-mean fields.

    Applies I - k k^T / |k|^2 at every mode and zeroes k = 0. The input must be
    Hermitian for the output to be a real field.
    """
    grid.check_shape(raw)
    kap = grid.kappa
    with np.errstate(invalid="ignore", divide="ignore"):
        inv_k2 = np.where(grid.lam > 0, 1.0 / (kap[0] ** 2 + kap[1] ** 2), 0.0)
    div = (kap[0] * raw[..., 0, :, :] + kap[1] * raw[..., 1, :, :]) * inv_k2
    out = np.empty_like(raw, dtype=complex)
    out[..., 0, :, :] = raw[..., 0, :, :] - kap[0] * div
    out[..., 1, :, :] = raw[..., 1, :, :] - kap[1] * div
    out[..., :, 0, 0] = 0.0
    return out


def truncate(grid: GridSpec, uh: np.ndarray) -> np.ndarray:
    """Zero every mode outside the retained Galerkin set (P_n)."""
    return uh * grid.retained


def _power_multiplier(grid: GridSpec, s: float) -> np.ndarray:
    if s == 0:
        return np.where(grid.lam > 0, 1.0, 0.0)
    with np.errstate(divide="ignore"):
        return np.where(grid.lam > 0, grid.lam ** s, 0.0)


def apply_stokes_power(grid: GridSpec, uh: np.ndarray, s: float) -> np.ndarray:
    """A^s as the multiplier lambda(k)^s; the zero mode stays zero."""
    grid.check_shape(uh)
    return uh * _power_multiplier(grid, s)


def helmholtz_multiplier(grid: GridSpec, alpha) -> np.ndarray:
    """1 / (1 + alpha^2 lambda) per mode.

    ``alpha`` may be an array, in which case the result has shape
    ``alpha.shape + (1, N, N)`` and broadcasts against batched fields.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise ConfigError("alpha must be non-negative")
    a2 = (alpha**2)[..., None, None, None]
    return 1.0 / (1.0 + a2 * grid.lam)


def apply_helmholtz_filter(grid: GridSpec, uh: np.ndarray, alpha: float) -> np.ndarray:
    """N_alpha = (I + alpha^2 A)^-1."""
    grid.check_shape(uh)
    return uh * helmholtz_multiplier(grid, alpha)


def invert_helmholtz(grid: GridSpec, uh: np.ndarray, alpha: float) -> np.ndarray:
    """I + alpha^2 A, the exact inverse of :func:`apply_helmholtz_filter`."""
    grid.check_shape(uh)
    if alpha < 0:
        raise ConfigError("alpha must be non-negative")
    return uh * (1.0 + alpha**2 * grid.lam)


def to_physical(grid: GridSpec, uh: np.ndarray) -> np.ndarray:
    """Sample a spectral field on the N x N collocation grid (real output)."""
    grid.check_shape(uh)
    return sfft.ifft2(uh, norm="forward").real


def fft_raw(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """Forward transform to Fourier coefficients without any projection."""
    return sfft.fft2(u, norm="forward")


def to_spectral(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """Fourier coefficients of a physical field, zero-mean and projected.

    The Nyquist row and column (which have no Hermitian partner) are dropped.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-3:] != grid.shape:
        raise ConfigError(f"expected trailing shape {grid.shape}, got {u.shape}")
    uh = fft_raw(grid, u)
    h = grid.N // 2
    uh[..., h, :] = 0.0
    uh[..., :, h] = 0.0
    return project_leray(grid, uh)


def inner(grid: GridSpec, uh: np.ndarray, wh: np.ndarray) -> np.ndarray:
    """L^2 inner product via Parseval; reduces the last three axes."""
    return grid.L**2 * np.sum((uh * wh.conj()).real, axis=(-3, -2, -1))


def spectral_sum(grid: GridSpec, uh: np.ndarray, p: float = 0) -> np.ndarray:
    """L^2 * sum lambda^p |uh|^2, i.e. |A^{p/2} u|^2."""
    w = np.abs(uh[..., 0, :, :]) ** 2 + np.abs(uh[..., 1, :, :]) ** 2
    if p:
        w = w * _power_multiplier(grid, p)
    return grid.L**2 * np.sum(w, axis=(-2, -1))


def l4_norm4(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """Quadrature of int |u|^4 dx for physical samples u of shape (..., 2, N, N)."""
    s = u[..., 0, :, :] ** 2 + u[..., 1, :, :] ** 2
    return (grid.L / grid.N) ** 2 * np.sum(s * s, axis=(-2, -1))


def norm(grid: GridSpec, uh: np.ndarray, kind: str = "H") -> np.ndarray:
    """Norms used throughout.

    ``H``: |u| (L^2). ``V``: |A^{1/2} u|. ``DA``: |A u|. ``L4``: (int |u|^4)^{1/4}
    by collocation quadrature.
    """
    if kind == "H":
        return np.sqrt(spectral_sum(grid, uh, 0))
    if kind == "V":
        return np.sqrt(spectral_sum(grid, uh, 1))
    if kind == "DA":
        return np.sqrt(spectral_sum(grid, uh, 2))
    if kind == "L4":
        return l4_norm4(grid, to_physical(grid, uh)) ** 0.25
    raise ValueError(f"unknown norm kind {kind!r}")


def hermitian_defect(uh: np.ndarray) -> float:
    """max |uh(-k) - conj(uh(k))|."""
    flipped = np.roll(np.flip(uh, axis=(-2, -1)), 1, axis=(-2, -1))
    return float(np.max(np.abs(flipped - uh.conj()), initial=0.0))


def divergence_defect(grid: GridSpec, uh: np.ndarray) -> float:
    """max |k . uh(k)| relative to max |k| |uh(k)|."""
    kap = grid.kappa
    div = kap[0] * uh[..., 0, :, :] + kap[1] * uh[..., 1, :, :]
    scale = np.max(np.sqrt(grid.lam) * np.abs(uh).max(axis=-3), initial=0.0)
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(div)) / scale)


def random_field(
    grid: GridSpec,
    rng: np.random.Generator,
    kmax: int | None = None,
    slope: float = 0.0,
    kmin: int = 1,
) -> np.ndarray:
    """Random real, divergence-free, zero-mean field on the retained lattice.

    Complex Gaussian amplitudes scaled by |k|^-slope on kmin <= max(|kx|,|ky|)
    <= kmax, made Hermitian by symmetrising over k and -k.
    """
    kmax = grid.kmax if kmax is None else kmax
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    band = (grid.kinf >= kmin) & (grid.kinf <= kmax) & grid.retained
    with np.errstate(divide="ignore"):
        weight = np.where(band, np.sqrt(grid.kx**2 + grid.ky**2) ** (-float(slope)), 0.0)
    z = z * weight
    flipped = np.roll(np.flip(z, axis=(-2, -1)), 1, axis=(-2, -1))
    z = 0.5 * (z + flipped.conj())
    return project_leray(grid, z)


def eigenmode(grid: GridSpec, kx: int, ky: int, kind: str = "cos") -> np.ndarray:
    """Coefficients of the real orthonormal Stokes eigenfunction

    sqrt(2)/L * p * cos(k.x)   (kind="cos")   or   sqrt(2)/L * p * sin(k.x),

    with polarisation p = (-ky, kx) / |k|.
    """
    if kx == 0 and ky == 0:
        raise ConfigError("the zero mode is not an eigenfunction of A on H")
    n = grid.N
    p = np.array([-ky, kx], dtype=float) / np.hypot(kx, ky)
    c = np.sqrt(2.0) / (2.0 * grid.L)
    uh = np.zeros(grid.shape, dtype=complex)
    if kind == "cos":
        cp, cm = c, c
    elif kind == "sin":
        cp, cm = -1j * c, 1j * c
    else:
        raise ValueError(kind)
    uh[:, kx % n, ky % n] += cp * p
    uh[:, -kx % n, -ky % n] += cm * p
    return uh


@dataclass(frozen=True)
class SpectralVelocity:
    """A validated divergence-free, zero-mean, Hermitian coefficient array."""

    coeffs: np.ndarray
    grid: GridSpec = field(repr=False)

    def __post_init__(self):
        self.grid.check_shape(self.coeffs)

    def validate(self, tol: float = 1e-12) -> None:
        c = self.coeffs
        scale = max(float(np.abs(c).max(initial=0.0)), 1e-300)
        if np.any(c[..., :, 0, 0] != 0):
            raise ValueError("nonzero mean mode")
        if hermitian_defect(c) > tol * scale:
            raise ValueError("coefficients are not Hermitian symmetric")
        if divergence_defect(self.grid, c) > tol:
            raise ValueError("field is not divergence-free")

    def norm(self, kind: str = "H") -> float:
        return float(norm(self.grid, self.coeffs, kind))

    def to_physical(self) -> "PhysicalVelocity":
        return PhysicalVelocity(to_physical(self.grid, self.coeffs), self.grid)


@dataclass(frozen=True)
class PhysicalVelocity:
    samples: np.ndarray
    grid: GridSpec = field(repr=False)

    def to_spectral(self) -> SpectralVelocity:
        return SpectralVelocity(to_spectral(self.grid, self.samples), self.grid)
