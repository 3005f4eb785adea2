"""Diagonal noise coefficient Q and reproducible truncated Wiener increments.

Q acts diagonally on the real orthonormal Stokes eigenbasis {psi_j}:

    Q(u) e_j = (a_j + b_j <u, psi_j>) psi_j,

where for each half-plane wavevector k the two real basis members are
sqrt(2)/L p cos(k.x) and sqrt(2)/L p sin(k.x), p = k_perp / |k|. The Lipschitz
constants of both noise conditions are then sup_j b_j, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import ConfigError, GridSpec


@dataclass(frozen=True)
class NoiseConfig:
    gamma: float = 2.0
    sigma_a: float = 0.05
    sigma_b: float = 0.05
    mult_cutoff: int = 4
    noise_cutoff: int = 8


def half_plane_modes(cutoff: int) -> np.ndarray:
    """Wavevectors k with 0 < max(|kx|,|ky|) <= cutoff, one per pair {k, -k}.

    Sorted by |k|^2, then kx, then ky, so the ordering is canonical.
    """
    r = np.arange(-cutoff, cutoff + 1)
    kx, ky = np.meshgrid(r, r, indexing="ij")
    kx, ky = kx.ravel(), ky.ravel()
    keep = (kx > 0) | ((kx == 0) & (ky > 0))
    kx, ky = kx[keep], ky[keep]
    order = np.lexsort((ky, kx, kx**2 + ky**2))
    return np.stack([kx[order], ky[order]], axis=1)


@dataclass(frozen=True)
class NoiseModel:
    """Per-real-mode amplitudes of the diagonal noise coefficient.

    ``a`` and ``b`` have length ``2 * len(modes)``: cos members first, then
    sin members, both in ``modes`` order.
    """

    grid: GridSpec = field(repr=False)
    modes: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = 2 * len(self.modes)
        if self.a.shape != (n,) or self.b.shape != (n,):
            raise ConfigError("a and b need one entry per real noise mode")
        if np.any(self.a < 0) or np.any(self.b < 0):
            raise ConfigError("noise amplitudes must be non-negative")
        if len(self.modes) and np.abs(self.modes).max() > self.grid.kmax:
            raise ConfigError("noise modes exceed the retained Galerkin set")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ConfigError("noise amplitudes must be finite")

    @property
    def n_real(self) -> int:
        return 2 * len(self.modes)

    @property
    def lam(self) -> np.ndarray:
        """Stokes eigenvalue of each real mode."""
        k2 = (self.modes**2).sum(axis=1) * self.grid.k0**2
        return np.concatenate([k2, k2])

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.a) or np.any(self.b))

    @property
    def ell0(self) -> float:
        """Lipschitz constant of u -> Q(u) in L2(K, H)."""
        return float(self.b.max(initial=0.0))

    @property
    def ell1(self) -> float:
        """Lipschitz constant of the A^{1/2}-weighted map; equals ell0 here."""
        return self.ell0

    @property
    def ell2(self) -> float:
        return float(np.sqrt(2 * np.sum(self.a**2) + 2 * self.ell0**2))

    @property
    def ell3(self) -> float:
        return float(np.sqrt(2 * np.sum(self.lam * self.a**2) + 2 * self.ell1**2))

    # -- coordinates on the real eigenbasis ---------------------------------

    @property
    def _index(self):
        n = self.grid.N
        kx, ky = self.modes[:, 0], self.modes[:, 1]
        return kx % n, ky % n, -kx % n, -ky % n

    @property
    def _polarisation(self) -> np.ndarray:
        kx, ky = self.modes[:, 0].astype(float), self.modes[:, 1].astype(float)
        return np.stack([-ky, kx]) / np.hypot(kx, ky)

    def coordinates(self, uh: np.ndarray) -> np.ndarray:
        """<u, psi_j> for every real noise mode; batched over leading axes."""
        ix, iy, _, _ = self._index
        c = np.einsum("...in,in->...n", uh[..., :, ix, iy], self._polarisation)
        s = np.sqrt(2.0) * self.grid.L
        return np.concatenate([s * c.real, -s * c.imag], axis=-1)

    def from_coordinates(self, y: np.ndarray) -> np.ndarray:
        """sum_j y_j psi_j as a spectral array."""
        m = len(self.modes)
        ix, iy, jx, jy = self._index
        z = (y[..., :m] - 1j * y[..., m:]) / (np.sqrt(2.0) * self.grid.L)
        out = np.zeros(y.shape[:-1] + self.grid.shape, dtype=complex)
        pol = self._polarisation
        vals = z[..., None, :] * pol
        out[..., :, ix, iy] = vals
        out[..., :, jx, jy] = vals.conj()
        return out


def make_noise_model(grid: GridSpec, config: NoiseConfig | None = None, **kw) -> NoiseModel:
    """Default family a_k = sigma_a lambda_k^-gamma, b_k = sigma_b on |k|_inf <= mult_cutoff.

    Raises:
        ConfigError: gamma <= 1 (sum lambda a^2 would diverge under refinement),
            negative amplitudes, or a cutoff outside the retained lattice.
    """
    cfg = config or NoiseConfig(**kw)
    if cfg.gamma <= 1:
        raise ConfigError(
            f"gamma={cfg.gamma}: A^{{1/2}}Q is not Hilbert-Schmidt at refinement (need gamma > 1)"
        )
    if cfg.sigma_a < 0 or cfg.sigma_b < 0:
        raise ConfigError("sigma_a and sigma_b must be non-negative")
    if not 1 <= cfg.noise_cutoff <= grid.kmax:
        raise ConfigError(f"noise_cutoff must lie in [1, {grid.kmax}]")
    modes = half_plane_modes(cfg.noise_cutoff)
    lam = (modes**2).sum(axis=1) * grid.k0**2
    kinf = np.abs(modes).max(axis=1)
    a = cfg.sigma_a * lam ** (-cfg.gamma)
    b = np.where(kinf <= cfg.mult_cutoff, cfg.sigma_b, 0.0)
    return NoiseModel(grid, modes, np.concatenate([a, a]), np.concatenate([b, b]))


def zero_noise(grid: GridSpec) -> NoiseModel:
    return make_noise_model(grid, NoiseConfig(sigma_a=0.0, sigma_b=0.0, noise_cutoff=1))


@dataclass(frozen=True)
class NoiseIncrement:
    """Wiener increments Delta W_j ~ N(0, dt) on the real noise modes."""

    values: np.ndarray
    dt: float
    step: int = 0


def apply_Q(uh: np.ndarray, dW: NoiseIncrement | np.ndarray, model: NoiseModel) -> np.ndarray:
    """Q(u) Delta W = sum_j (a_j + b_j <u, psi_j>) Delta W_j psi_j."""
    w = dW.values if isinstance(dW, NoiseIncrement) else np.asarray(dW)
    if w.shape[-1] != model.n_real:
        raise ConfigError(f"increment has {w.shape[-1]} modes, model expects {model.n_real}")
    x = model.coordinates(uh)
    return model.from_coordinates((model.a + model.b * x) * w)


def hs_norms_Q(uh: np.ndarray, model: NoiseModel) -> tuple[np.ndarray, np.ndarray]:
    """Squared Hilbert-Schmidt norms ||Q(u)||^2 and ||A^{1/2} Q(u)||^2."""
    g = (model.a + model.b * model.coordinates(uh)) ** 2
    return g.sum(axis=-1), (model.lam * g).sum(axis=-1)


def hs_norms_Q_diff(u1: np.ndarray, u2: np.ndarray, model: NoiseModel) -> tuple[np.ndarray, np.ndarray]:
    """Squared HS norms of Q(u1) - Q(u2) and its A^{1/2} image."""
    g = (model.b * (model.coordinates(u1) - model.coordinates(u2))) ** 2
    return g.sum(axis=-1), (model.lam * g).sum(axis=-1)


class NoiseStream:
    """Counter-based Gaussian stream for one Monte Carlo sample.

    The Philox key is derived from (master_seed, sample); the step index is
    written into the counter, so the draws for (sample, step) are fixed no
    matter how many other samples, steps or alpha-levels are simulated.
    """

    def __init__(self, master_seed: int, sample: int, domain: int = 1):
        ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(domain), int(sample)))
        self.key = ss.generate_state(2, dtype=np.uint64)
        self.master_seed = master_seed
        self.sample = sample

    def normals(self, step: int, n: int) -> np.ndarray:
        bitgen = np.random.Philox(key=self.key, counter=[0, int(step), 0, 0])
        return np.random.Generator(bitgen).standard_normal(n)


def sample_increment(stream: NoiseStream, dt: float, model: NoiseModel, step: int) -> NoiseIncrement:
    if dt <= 0:
        raise ConfigError("dt must be positive")
    return NoiseIncrement(np.sqrt(dt) * stream.normals(step, model.n_real), dt, step)
