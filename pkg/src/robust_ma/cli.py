"""Command line entry point: ``robust-ma run`` and ``robust-ma validate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import RobustMAError
from .experiment import SWEEP_AXES, ExperimentConfig, emit_csv, load_config, run_sweep

log = logging.getLogger("robust_ma")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-ma", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one SNR sweep and write a CSV")
    run.add_argument("--config", help="INI config file; defaults reproduce the reference scenario")
    run.add_argument("--sweep", choices=sorted(SWEEP_AXES), required=True)
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--seed", type=int, required=True, help="base seed (unsigned 64-bit)")
    run.add_argument("--trials", type=int, help="CSI error realizations per channel")
    run.add_argument("--realizations", type=int, help="channel realizations to average over")
    run.add_argument("--workers", type=int, help="threads used across channel realizations")
    run.add_argument("--trial-workers", type=int, help="threads used across CSI error trials")

    sub.add_parser("validate", help="run the built-in oracle checks")
    return parser


def _error_line(kind: str, message: str) -> None:
    print(json.dumps({"status": "error", "type": kind, "message": message}), file=sys.stderr)


def _run(args) -> int:
    if not 0 <= args.seed < 2**64:
        raise RobustMAError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
    overrides = dict(
        sweep=args.sweep,
        base_seed=args.seed,
        error_trials=args.trials,
        channel_realizations=args.realizations,
        workers=args.workers,
        trial_workers=args.trial_workers,
    )
    if args.config:
        config = load_config(args.config, **overrides)
    else:
        config = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    log.info("running %s sweep over %d realizations", config.sweep, config.channel_realizations)
    rows = run_sweep(config)
    emit_csv(rows, args.out)
    for row in rows:
        log.info("%s=%g %s", row.axis, row.value, {k: round(v, 3) for k, v in row.metrics.items()})
    print(json.dumps({"status": "ok", "rows": len(rows), "out": args.out}))
    return 0


def _validate() -> int:
    from .validation import run_all

    results = run_all()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "run":
            return _run(args)
        return _validate()
    except RobustMAError as exc:
        _error_line(type(exc).__name__, str(exc))
        return 2
    except OSError as exc:
        _error_line("OSError", str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
