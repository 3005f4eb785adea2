"""Convergence in probability: P(eps_n(T) >= Gamma_n alpha_n) along the alpha grid.

Besides the default Gamma_n = 1 + log(1 + n), a sweep of constant Gamma
values shows where the exceedance frequencies leave zero.

    python3 scripts/run_tail.py [--samples 64] [--out results/tail]
"""

import argparse

import numpy as np

from stochleray import StudyConfig, tail_study
from stochleray.experiment import run_study
from stochleray.output import write_tail


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=64)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/tail")
    args = ap.parse_args()

    cfg = StudyConfig(samples=args.samples, workers=args.workers, out_dir=args.out, R=float("inf"))
    result = run_study(cfg)
    rows = tail_study(result)
    write_tail(rows, f"{args.out}/tail.csv")
    for r in rows:
        print(f"n={r.n} alpha={r.alpha:<6g} Gamma={r.gamma:.3f} P={r.freq:.3f} [{r.ci_low:.3f}, {r.ci_high:.3f}]")

    ratio = result.eps / np.asarray(result.alphas)[:, None]
    print("eps(T)/alpha quantiles (50%, 95%, max) per alpha:")
    for a, q in zip(result.alphas, np.quantile(ratio, [0.5, 0.95, 1.0], axis=1).T):
        print(f"  {a:<6g} {q[0]:.4f} {q[1]:.4f} {q[2]:.4f}")
    for g in (0.01, 0.02, 0.05, 0.1):
        print(f"Gamma={g}: " + " ".join(f"{r.freq:.3f}" for r in tail_study(result, gammas=g)))


if __name__ == "__main__":
    main()
