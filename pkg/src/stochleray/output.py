"""CSV and plot-data writers. Floats are written with repr(), which round-trips."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .estimators import eps_series, running_integral, trajectory_monitors

RESULT_COLUMNS = ("alpha", "mean_loc_err", "sem", "mean_eps", "tau_full_frac", "blowups")
SERIES_COLUMNS = ("t", "eps_sup", "eps_int", "m1", "y", "IV", "I4")
TAIL_COLUMNS = ("n", "alpha", "gamma", "threshold", "exceed", "samples", "freq", "wilson_low", "wilson_high")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_results(result, out_dir) -> dict:
    """Write results.csv, plot_data.dat and fit.json; return their paths.

    results.csv has one row per alpha and a final row whose alpha column is
    ``fit``: slope, CI half-width, intercept and residual norm occupy the
    mean_loc_err, sem, mean_eps and tau_full_frac columns; blowups is the
    total count.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fit = result.fit()
    paths = {"results": out / "results.csv", "plot": out / "plot_data.dat", "fit": out / "fit.json"}
    with open(paths["results"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for s in result.summaries:
            w.writerow([_fmt(s.alpha), _fmt(s.mean_loc_err), _fmt(s.sem), _fmt(s.mean_eps),
                        _fmt(s.tau_full_frac), _fmt(s.blowups)])
        blown = result.summaries[0].blowups
        w.writerow(["fit", _fmt(fit.slope), _fmt(fit.ci_halfwidth), _fmt(fit.intercept),
                    _fmt(fit.residual), _fmt(blown)])
    with open(paths["plot"], "w", encoding="utf-8") as fh:
        fh.write("# log(alpha) log(sqrt(mean_loc_err))\n")
        for s in result.summaries:
            fh.write(f"{_fmt(math.log(s.alpha))} {_fmt(0.5 * math.log(s.mean_loc_err))}\n")
    with open(paths["fit"], "w", encoding="utf-8") as fh:
        json.dump({
            "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual,
            "ci95": [fit.ci_low, fit.ci_high], "stderr": fit.stderr, "points": fit.n,
            "R": result.R,
            "markov_ratio": None if result.calibration is None else result.calibration.markov_ratio,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def write_tail(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TAIL_COLUMNS)
        for r in rows:
            w.writerow([r.n, _fmt(r.alpha), _fmt(r.gamma), _fmt(r.threshold), r.exceed, r.samples,
                        _fmt(r.freq), _fmt(r.ci_low), _fmt(r.ci_high)])
    return path


def series_table(traj, alpha: float, stride: int = 1) -> np.ndarray:
    """Columns t, eps_sup, eps_int, m1, y, IV, I4 for one alpha-level."""
    k = traj.level(alpha)
    sup, integ = eps_series(traj.dH[k], traj.dV2[k], traj.dt)
    mon = trajectory_monitors(traj, alpha)
    IV = running_integral(traj.S[1, k + 1], traj.dt)
    I4 = running_integral(traj.L4[k + 1], traj.dt)
    table = np.column_stack([traj.t, sup, integ, mon.m1, mon.y, IV, I4])
    keep = np.arange(0, len(traj.t), stride)
    if keep[-1] != len(traj.t) - 1:
        keep = np.append(keep, len(traj.t) - 1)
    return table[keep]


def write_series(traj, out_dir, stride: int = 1) -> list:
    """One CSV per alpha: series_s{sample}_a{alpha}.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for a in traj.alphas:
        p = out / f"series_s{traj.sample}_a{a!r}.csv"
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SERIES_COLUMNS)
            for row in series_table(traj, a, stride):
                w.writerow([_fmt(x) for x in row])
        paths.append(p)
    return paths
