"""Study configuration and its flat ``key = value`` file format.

Example file::

    # desk-scale study
    N = 64
    nu = 0.05
    alphas = 0.2, 0.1, 0.05, 0.025
    samples = 64
    R = auto

Blank lines and ``#`` comments are ignored; keys are the field names of
:class:`StudyConfig`.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .integrator import SimParams
from .noise import NoiseConfig, make_noise_model
from .spectral import ConfigError, GridSpec, norm, random_field

OUT_ENV = "STOCHLERAY_OUT"


def default_out_dir() -> str:
    return os.environ.get(OUT_ENV, "results")


@dataclass(frozen=True)
class StudyConfig:
    # grid
    L: float = 2 * np.pi
    N: int = 64
    dealias_fraction: float = 2.0 / 3.0
    galerkin_cutoff: int | None = None
    # dynamics
    nu: float = 0.05
    dt: float = 1e-3
    T: float = 0.5
    alphas: tuple = (0.2, 0.1, 0.05, 0.025)
    # noise
    gamma: float = 2.0
    sigma_a: float = 0.05
    sigma_b: float = 0.05
    mult_cutoff: int = 4
    noise_cutoff: int = 8
    # initial condition: random field on 1 <= |k|_inf <= u0_kmax, amplitude ~ |k|^-u0_slope, |A^{1/2} u0| = u0_norm
    u0_kmax: int = 4
    u0_slope: float = 2.0
    u0_norm: float = 1.0
    # ensemble
    samples: int = 64
    master_seed: int = 0
    R: float | str = "auto"
    criterion: str = "L4"
    pilot_samples: int = 64
    tau_target: float = 0.05
    tau_confidence: float = 0.95
    tail_gamma: str = "log"
    workers: int = 1
    exploratory: bool = False
    series_stride: int = 1
    out_dir: str = field(default_factory=default_out_dir)

    def __post_init__(self):
        alphas = tuple(sorted({float(a) for a in self.alphas}, reverse=True))
        if len(alphas) != len(self.alphas):
            raise ConfigError("alphas must be distinct")
        object.__setattr__(self, "alphas", alphas)
        if any(not 0.0 < a < 1.0 for a in alphas):
            raise ConfigError("every alpha must lie in (0, 1)")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.criterion not in ("L4", "V2"):
            raise ConfigError("criterion must be L4 or V2")
        if isinstance(self.R, str):
            if self.R != "auto":
                raise ConfigError("R must be a number or 'auto'")
        elif not self.R >= 0:
            raise ConfigError("R must be non-negative")
        if self.workers < 1 or self.series_stride < 1:
            raise ConfigError("workers and series_stride must be >= 1")
        if not 0 < self.tau_target < 1:
            raise ConfigError("tau_target must lie in (0, 1)")
        if not 0 < self.tau_confidence < 1:
            raise ConfigError("tau_confidence must lie in (0, 1)")
        self.grid  # validates grid fields

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.L, self.N, self.dealias_fraction, self.galerkin_cutoff)

    @property
    def noise_config(self) -> NoiseConfig:
        return NoiseConfig(self.gamma, self.sigma_a, self.sigma_b, self.mult_cutoff, self.noise_cutoff)

    @property
    def noise_off(self) -> bool:
        return self.sigma_a == 0 and self.sigma_b == 0

    def replace(self, **kw) -> "StudyConfig":
        return dataclasses.replace(self, **kw)

    def to_mapping(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "StudyConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        kw = {}
        for key, raw in mapping.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kw[key] = _coerce(key, raw)
        return cls(**kw)


_INT = {"N", "galerkin_cutoff", "mult_cutoff", "noise_cutoff", "u0_kmax", "samples",
        "master_seed", "pilot_samples", "workers", "series_stride"}
_STR = {"criterion", "tail_gamma", "out_dir"}


def _coerce(key, raw):
    if not isinstance(raw, str):
        return tuple(raw) if key == "alphas" else raw
    raw = raw.strip()
    try:
        if key == "alphas":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        if key in _STR:
            return raw
        if key == "exploratory":
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if key == "galerkin_cutoff" and raw.lower() in ("none", ""):
            return None
        if key == "R" and raw.lower() in ("auto", "inf"):
            return "auto" if raw.lower() == "auto" else float("inf")
        if key in _INT:
            return int(raw)
        if key == "L" and raw.lower() in ("2pi", "2*pi"):
            return 2 * np.pi
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def load_config(path, **overrides) -> StudyConfig:
    with open(path, encoding="utf-8") as fh:
        mapping = parse_config_text(fh.read())
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    return StudyConfig.from_mapping(mapping)


def dump_config(cfg: StudyConfig) -> str:
    lines = []
    for key, value in cfg.to_mapping().items():
        if key == "alphas":
            value = ", ".join(repr(a) for a in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def initial_condition(cfg: StudyConfig) -> np.ndarray:
    """Band-limited random divergence-free u0 drawn from the master seed."""
    grid = cfg.grid
    rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed, spawn_key=(0,)))
    u0 = random_field(grid, rng, kmax=min(cfg.u0_kmax, grid.kmax), slope=cfg.u0_slope)
    return u0 * (cfg.u0_norm / norm(grid, u0, "V"))


@lru_cache(maxsize=8)
def sim_params(cfg: StudyConfig) -> SimParams:
    grid = cfg.grid
    return SimParams(
        grid=grid,
        nu=cfg.nu,
        dt=cfg.dt,
        T=cfg.T,
        alphas=cfg.alphas,
        noise=make_noise_model(grid, cfg.noise_config),
        u0=initial_condition(cfg),
    )
