"""Command line entry point.

    stochleray verify-operators
    stochleray simulate          [--config F] [--seed S] [--out D] [--dump-series] [--snapshot]
    stochleray convergence-study [--config F] [--seed S] [--out D] [--samples M] [--dump-series]
    stochleray tail-study        [--config F] [--seed S] [--out D] [--samples M]

Exit codes: 0 success, 1 failed operator check, 2 usage or configuration
error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, StudyConfig, dump_config, load_config, sim_params
from .integrator import BlowUpError, run_coupled

log = logging.getLogger("stochleray")

EXIT_FAIL, EXIT_USAGE, EXIT_BLOWUP = 1, 2, 3


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value config file")
    common.add_argument("--seed", type=_u64, help="master seed (overrides config)")
    common.add_argument("--out", help="output directory (default $STOCHLERAY_OUT or ./results)")
    common.add_argument("--samples", type=int, help="Monte Carlo samples M")
    common.add_argument("--workers", type=int, help="sample-level worker processes")
    common.add_argument("--dump-series", action="store_true", help="write per-trajectory time-series CSVs")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="stochleray", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-operators", parents=[common], help="run the operator invariant suite")
    sim = sub.add_parser("simulate", parents=[common], help="one coupled trajectory")
    sim.add_argument("--sample", type=int, default=0, help="sample index of the noise stream")
    sim.add_argument("--snapshot", action="store_true", help="also write a binary coefficient dump")
    sub.add_parser("convergence-study", parents=[common], help="ensemble + rate fit")
    sub.add_parser("tail-study", parents=[common], help="convergence-in-probability study")
    return p


def resolve_config(args) -> StudyConfig:
    overrides = dict(master_seed=args.seed, out_dir=args.out, samples=args.samples, workers=args.workers)
    if args.config is not None:
        return load_config(args.config, **overrides)
    return StudyConfig.from_mapping({k: v for k, v in overrides.items() if v is not None})


def cmd_verify(args) -> int:
    from .verify import run_all

    checks = run_all()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else 0


def cmd_simulate(args, cfg: StudyConfig) -> int:
    from .output import write_series
    from .snapshot import SnapshotWriter

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = sim_params(cfg)
    snap = None
    if args.snapshot:
        snap = SnapshotWriter(out / f"snapshot_s{args.sample}.bin", params, cfg.master_seed, args.sample,
                              stride=cfg.series_stride)
    try:
        # overflow is reported as a blow-up, not as numpy warnings
        with np.errstate(over="ignore", invalid="ignore"):
            traj = run_coupled(params, cfg.master_seed, args.sample, snapshot=snap)
    finally:
        if snap is not None:
            snap.close()
    # a single trajectory always gets its series written
    for p in write_series(traj, out, cfg.series_stride):
        print(p)
    return 0


def cmd_convergence(args, cfg: StudyConfig) -> int:
    from .experiment import run_study
    from .output import write_results, write_series

    result = run_study(cfg)
    paths = write_results(result, cfg.out_dir)
    if args.dump_series:
        for t in result.completed:
            write_series(t, Path(cfg.out_dir) / "series", cfg.series_stride)
    fit = result.fit()
    print(f"R = {result.R!r}")
    for s in result.summaries:
        print(f"alpha={s.alpha:<8g} mean_loc_err={s.mean_loc_err:.4e} sem={s.sem:.2e} "
              f"mean_eps={s.mean_eps:.4e} tau_full={s.tau_full_frac:.3f}")
    print(f"slope={fit.slope:.4f} CI95=[{fit.ci_low:.4f}, {fit.ci_high:.4f}]")
    print(paths["results"])
    return 0


def cmd_tail(args, cfg: StudyConfig) -> int:
    from .experiment import run_study, tail_study
    from .output import write_tail

    result = run_study(cfg)
    rows = tail_study(result)
    path = write_tail(rows, Path(cfg.out_dir) / "tail.csv")
    for r in rows:
        print(f"n={r.n} alpha={r.alpha:g} Gamma={r.gamma:.4f} P={r.freq:.4f} "
              f"Wilson95=[{r.ci_low:.4f}, {r.ci_high:.4f}]")
    print(path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify-operators":
        return cmd_verify(args)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"stochleray: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("config:\n%s", dump_config(cfg))
    handler = {"simulate": cmd_simulate, "convergence-study": cmd_convergence, "tail-study": cmd_tail}
    try:
        return handler[args.command](args, cfg)
    except BlowUpError as exc:
        print(f"stochleray: blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
