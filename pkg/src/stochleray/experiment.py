"""Monte Carlo driver, threshold calibration, rate regression and tail study."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .config import StudyConfig, sim_params
from .estimators import eps_final, integrand, localize, localized_error_from_arrays, running_integral
from .integrator import BlowUpError, CoupledTrajectory, run_coupled

log = logging.getLogger(__name__)

PILOT_DOMAIN = 2
MIN_PILOT = 16


class CalibrationError(RuntimeError):
    pass


class DataError(ValueError):
    pass


# -- ensembles ---------------------------------------------------------------


def _run_one(args):
    cfg, sample, domain = args
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            traj = run_coupled(sim_params(cfg), cfg.master_seed, sample, domain=domain)
    except BlowUpError as exc:
        exc.sample = sample
        if not cfg.exploratory:
            raise
        log.warning("sample %d excluded: %s", sample, exc)
        return exc
    traj.final = None
    return traj


def run_ensemble(cfg: StudyConfig, n: int, domain: int = 1) -> list:
    """Trajectories (or BlowUpError placeholders) for samples 0..n-1, in order.

    With ``cfg.workers > 1`` samples run in a process pool; results are
    collected by sample index, so serial and parallel runs agree bit for bit.
    """
    jobs = [(cfg, s, domain) for s in range(n)]
    if cfg.workers == 1 or n == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, n // (4 * cfg.workers))))


# -- calibration ------------------------------------------------------------


@dataclass(frozen=True)
class Calibration:
    """Calibrated threshold and its diagnostics.

    ``confidence`` is the smallest, over alpha, probability that a fresh
    sample's stopping rate stays below the target at this R.
    """

    R: float
    pilot_samples: int
    stopped_fraction: dict
    markov_ratio: float
    confidence: float


def _final_integrals(trajs, alphas, criterion):
    return {
        a: np.array([running_integral(integrand(t, a, criterion), t.dt) for t in trajs])
        for a in alphas
    }


def _stopped_fraction(integrals: np.ndarray, R: float) -> float:
    """Fraction of rows whose running integral reaches R before the last grid point."""
    return float(np.mean(np.any(integrals[:, :-1] >= R, axis=1)))


def tolerance_rank(n: int, coverage: float, confidence: float) -> int | None:
    """Smallest 1-based rank k such that the k-th order statistic of n draws
    exceeds the ``coverage`` quantile with probability >= ``confidence``.

    The coverage of the k-th order statistic of a continuous sample is
    Beta(k, n + 1 - k) distributed, whatever the underlying law. Returns
    None when even the maximum is not enough (n too small).
    """
    k = np.arange(1, n + 1)
    ok = np.flatnonzero(stats.beta.sf(coverage, k, n + 1 - k) >= confidence)
    return int(k[ok[0]]) if ok.size else None


def calibrate_R(cfg: StudyConfig, pilot: list | None = None) -> Calibration:
    """Threshold R from a one-sided distribution-free tolerance bound.

    Over a pilot ensemble (independent of the study samples unless given),
    R is the smallest order statistic of the final integrals I(T) that lies
    above their (1 - tau_target) quantile with probability tau_confidence,
    maximised over alpha. A fresh sample then reaches R before T with
    probability at most tau_target, except with probability
    1 - tau_confidence over the pilot draw. If the pilot is too small for
    that confidence, the pilot maximum is used and the achieved confidence
    is reported. The Markov ratio max_alpha mean I(T) / R, the a priori
    bound on P(I(T) >= R), is reported alongside.
    """
    if pilot is None:
        if cfg.pilot_samples < MIN_PILOT:
            raise CalibrationError(f"pilot needs at least {MIN_PILOT} samples")
        pilot = run_ensemble(cfg, cfg.pilot_samples, PILOT_DOMAIN)
    pilot = [t for t in pilot if isinstance(t, CoupledTrajectory)]
    n = len(pilot)
    if n < MIN_PILOT:
        raise CalibrationError(f"pilot has {n} usable samples, need {MIN_PILOT}")
    integ = _final_integrals(pilot, cfg.alphas, cfg.criterion)
    coverage = 1.0 - cfg.tau_target
    k = tolerance_rank(n, coverage, cfg.tau_confidence)
    if k is None:
        k = n
        log.warning("pilot of %d samples cannot reach confidence %.3f; using its maximum",
                    n, cfg.tau_confidence)
    R = max(float(np.sort(v[:, -1])[k - 1]) for v in integ.values())
    if R <= 0:
        R = float(np.finfo(float).tiny)
    fractions = {a: _stopped_fraction(v, R) for a, v in integ.items()}
    markov = max(float(np.mean(v[:, -1])) for v in integ.values()) / R
    confidence = float(stats.beta.sf(coverage, k, n + 1 - k))
    return Calibration(R, n, fractions, markov, confidence)


# -- study ------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaSummary:
    alpha: float
    mean_loc_err: float
    sem: float
    mean_eps: float
    tau_full_frac: float
    blowups: int


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    ci_low: float
    ci_high: float
    stderr: float
    n: int

    @property
    def ci_halfwidth(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


@dataclass
class StudyResult:
    config: StudyConfig
    R: float
    summaries: list
    trajectories: list = field(repr=False)
    calibration: Calibration | None = None
    loc_err: np.ndarray | None = field(default=None, repr=False)
    eps: np.ndarray | None = field(default=None, repr=False)
    tau_full: np.ndarray | None = field(default=None, repr=False)

    @property
    def alphas(self) -> tuple:
        return self.config.alphas

    @property
    def completed(self) -> list:
        return [t for t in self.trajectories if isinstance(t, CoupledTrajectory)]

    def fit(self) -> RateFit:
        """Slope of sqrt(mean localized error) against alpha."""
        return fit_rate(
            self.alphas, [math.sqrt(s.mean_loc_err) for s in self.summaries]
        )

    def fit_eps(self) -> RateFit:
        return fit_rate(self.alphas, [s.mean_eps for s in self.summaries])


def _sem(x: np.ndarray) -> float:
    if len(x) < 2:
        return float("nan")
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def summarize(cfg: StudyConfig, trajs: list, R: float, calibration=None) -> StudyResult:
    done = [t for t in trajs if isinstance(t, CoupledTrajectory)]
    blowups = len(trajs) - len(done)
    if not done:
        raise RuntimeError("every sample blew up")
    na = len(cfg.alphas)
    loc = np.empty((na, len(done)))
    eps = np.empty((na, len(done)))
    full = np.empty((na, len(done)), dtype=bool)
    for j, t in enumerate(done):
        for i, a in enumerate(cfg.alphas):
            k = t.level(a)
            if math.isinf(R):
                idx = len(t.t) - 1
            else:
                idx = localize(integrand(t, a, cfg.criterion), t.dt, R).index
            full[i, j] = idx == len(t.t) - 1
            loc[i, j] = localized_error_from_arrays(t.dH[k], t.dV2[k], t.dt, idx)
            eps[i, j] = eps_final(t.dH[k], t.dV2[k], t.dt)
    summaries = [
        AlphaSummary(a, float(np.mean(loc[i])), _sem(loc[i]), float(np.mean(eps[i])),
                     float(np.mean(full[i])), blowups)
        for i, a in enumerate(cfg.alphas)
    ]
    return StudyResult(cfg, R, summaries, trajs, calibration, loc, eps, full)


def run_study(cfg: StudyConfig, pilot: list | None = None) -> StudyResult:
    """Run the coupled ensemble and aggregate per-alpha statistics.

    Sample s uses the noise stream (master_seed, s); the threshold R is either
    fixed by the config or calibrated on an independent pilot ensemble.
    """
    trajs = run_ensemble(cfg, cfg.samples)
    calibration = None
    if cfg.R == "auto":
        calibration = calibrate_R(cfg, pilot)
        R = calibration.R
    else:
        R = float(cfg.R)
    return summarize(cfg, trajs, R, calibration)


# -- regression -------------------------------------------------------------


def fit_rate(alphas, errors, level: float = 0.95) -> RateFit:
    """Least squares of log(error) on log(alpha), with a t-based CI on the slope."""
    a = np.asarray(alphas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if a.shape != e.shape or a.ndim != 1:
        raise DataError("alphas and errors must be 1-D of equal length")
    if len(a) < 3:
        raise DataError("a rate fit needs at least 3 points")
    if np.any(~(e > 0)) or np.any(~(a > 0)):
        raise DataError("errors and alphas must be strictly positive")
    res = stats.linregress(np.log(a), np.log(e))
    resid = np.log(e) - (res.intercept + res.slope * np.log(a))
    q = stats.t.ppf(0.5 + level / 2, len(a) - 2)
    half = q * res.stderr
    return RateFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        residual=float(np.linalg.norm(resid)),
        ci_low=float(res.slope - half),
        ci_high=float(res.slope + half),
        stderr=float(res.stderr),
        n=len(a),
    )


# -- tail study -------------------------------------------------------------


def gamma_sequence(spec: str, n: int) -> np.ndarray:
    """Gamma_1..Gamma_n from a spec: ``log`` (1 + log(1 + n)), a constant, or a comma list."""
    idx = np.arange(1, n + 1)
    if spec == "log":
        return 1.0 + np.log1p(idx)
    parts = [p for p in str(spec).replace(",", " ").split() if p]
    if len(parts) == 1:
        return np.full(n, float(parts[0]))
    if len(parts) != n:
        raise ValueError(f"gamma list has {len(parts)} entries, need {n}")
    return np.array([float(p) for p in parts])


@dataclass(frozen=True)
class TailRow:
    n: int
    alpha: float
    gamma: float
    threshold: float
    exceed: int
    samples: int
    freq: float
    ci_low: float
    ci_high: float


def tail_study(source, gammas=None) -> list:
    """Empirical P(eps_n(T) >= Gamma_n alpha_n) along the alpha grid.

    ``source`` is a :class:`StudyResult` (reused) or a :class:`StudyConfig`
    (an ensemble is run). Wilson 95% intervals are attached to each row.
    """
    result = source if isinstance(source, StudyResult) else run_study(
        source.replace(R=float("inf"))
    )
    alphas = result.alphas
    if gammas is None:
        gammas = gamma_sequence(result.config.tail_gamma, len(alphas))
    gammas = np.broadcast_to(np.asarray(gammas, dtype=float), (len(alphas),))
    rows = []
    for i, (a, g) in enumerate(zip(alphas, gammas)):
        eps = result.eps[i]
        thr = g * a
        k = int(np.sum(eps >= thr))
        ci = stats.binomtest(k, len(eps)).proportion_ci(0.95, method="wilson")
        rows.append(TailRow(i + 1, a, float(g), float(thr), k, len(eps), k / len(eps),
                            float(ci.low), float(ci.high)))
    return rows
