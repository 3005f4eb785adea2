"""Pseudospectral stochastic Navier-Stokes / Leray-alpha convergence laboratory."""

from .spectral import ConfigError, GridSpec, PhysicalVelocity, SpectralVelocity
from .noise import NoiseModel, NoiseIncrement, make_noise_model
from .integrator import BlowUpError, CoupledTrajectory, SimParams, run_coupled
from .config import StudyConfig
from .experiment import fit_rate, run_study, tail_study, calibrate_R

__version__ = "0.1.0"
