"""Command-line entry point.

Subcommands: train-teacher, stage1, stage2, deploy, report, synth-data,
all. Exit codes: 0 success, 1 configuration/usage error, 2 pipeline
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .data import save_soh_csv, synth_degradation
from .errors import ConfigError, DataError, PipelineError, SohcastError
from .pipeline import Pipeline

log = logging.getLogger("sohcast")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sohcast",
                description="Battery SoH forecasting: distill, prune, quantize, select, export")
    p.add_argument("--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="pipeline config JSON")
        sp.add_argument("--seed", type=int, help="override config seed")
        sp.add_argument("--out", help="override config output directory")

    common(sub.add_parser("train-teacher", help="train and checkpoint the teacher"))
    common(sub.add_parser("stage1", help="distill the student pool and select elites"))
    common(sub.add_parser("stage2", help="prune elites, re-distill, re-select"))
    dp = sub.add_parser("deploy", help="quantize a final student and emit the C bundle")
    common(dp)
    dp.add_argument("--student", help="final-front student id (default: lowest f_err)")
    common(sub.add_parser("report", help="regenerate ledgers and report from state"))
    sd = sub.add_parser("synth-data", help="write a synthetic SoH dataset CSV")
    common(sd)
    sd.add_argument("--dest", required=True, help="output CSV path")
    ap = sub.add_parser("all", help="run stage1, stage2 and deploy")
    common(ap)
    ap.add_argument("--student", help="final-front student id (default: lowest f_err)")
    return p


def _configure(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out_dir = args.out
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
        if args.command == "synth-data":
            series = synth_degradation(cfg.data.synth.n_cells, cfg.data.synth.n_cycles,
                                       cfg.data.synth.params(), seed=cfg.seed)
            save_soh_csv(args.dest, series)
            log.info("wrote %d cells x %d cycles -> %s", cfg.data.synth.n_cells,
                     cfg.data.synth.n_cycles, args.dest)
            return 0
        pipe = Pipeline(cfg)
        if args.command == "train-teacher":
            pipe.run_train_teacher()
        elif args.command == "stage1":
            pipe.run_stage1()
        elif args.command == "stage2":
            pipe.run_stage2()
        elif args.command == "deploy":
            pipe.run_deploy(args.student)
        elif args.command == "report":
            pipe.run_report()
        elif args.command == "all":
            pipe.run_all(args.student)
        return 0
    except (ConfigError, DataError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 1
    except (PipelineError, SohcastError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
