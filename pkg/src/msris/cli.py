"""Command-line entry point: ``msris run <config> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import PRESETS, SCHEMA_DOC, load_config
from .errors import MsrisError
from .experiments import run_scaling, run_sumrate
from .tables import emit_csv

log = logging.getLogger("msris")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msris", description="Multi-sector RIS simulation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write CSV results")
    run.add_argument("config", nargs="?", help="YAML config file (optional with --preset)")
    run.add_argument("--preset", choices=sorted(PRESETS), help="start from a built-in scenario")
    run.add_argument("--seed", type=int, help="base seed; trial t uses seed + t")
    run.add_argument("--trials", type=int, help="trials per sweep point")
    run.add_argument("--workers", type=int, help="worker processes")
    run.add_argument("--out", help="output directory")
    run.add_argument("--trace", action="store_true", help="also write trajectory.csv")
    run.add_argument("--print-schema", action="store_true", help="print the config schema and exit")
    run.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(args) -> int:
    if args.print_schema:
        sys.stdout.write(SCHEMA_DOC)
        return 0
    if args.config is None and args.preset is None:
        raise MsrisError("give a config file or --preset")
    overrides = {"seed": args.seed, "trials": args.trials, "workers": args.workers, "out": args.out}
    cfg = load_config(args.config, args.preset, overrides)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.experiment == "scaling":
        written = [emit_csv(run_scaling(cfg), out / "summary.csv")]
    else:
        summary, trials, trajectory = run_sumrate(cfg, trace=args.trace)
        written = [emit_csv(summary, out / "summary.csv"), emit_csv(trials, out / "trials.csv")]
        if args.trace:
            written.append(emit_csv(trajectory, out / "trajectory.csv"))
    for p in written:
        log.info("wrote %s", p)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (MsrisError, OSError) as exc:
        print(f"msris: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
