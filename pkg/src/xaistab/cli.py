"""Command-line entry point: ``xaistab {gen-data,train,eval,report,run}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from xaistab import __version__, pipeline
from xaistab.config import TESTS, U64_MAX, load_config
from xaistab.errors import XaiStabError
from xaistab.metrics.sensitivity import METRICS, MODES

log = logging.getLogger("xaistab")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64 - 1], got {text}")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    p.add_argument("--seed", type=_u64, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")


def _eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", action="append", help=f"metric to evaluate, repeatable ({', '.join(METRICS)})")
    p.add_argument("--mode", action="append", help=f"metric mode, repeatable ({', '.join(MODES)})")
    p.add_argument("--test", choices=("pet", "rot", "all"), help="tests to run")
    p.add_argument("--replication", action="store_true", default=None,
                   help="succeed when PET passes and ROT fails (the reference outcome)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xaistab", description="Meta-evaluation of explanation robustness metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate train/val SAB1 datasets")
    _common(p)
    p.add_argument("--png", type=int, dest="n_png", help="export this many sample PNGs and heatmaps")

    p = sub.add_parser("train", help="fit the regression tree and record validation performance")
    _common(p)
    p.add_argument("--train-data", help="training SAB1 file (default: OUT/train.sab)")
    p.add_argument("--val-data", help="validation SAB1 file (default: OUT/val.sab)")
    p.add_argument("--grid-search", action="store_true", default=None, help="search the full hyperparameter grid")
    p.add_argument("--grid-subsample", type=int, help="fit grid candidates on the first N training samples")

    p = sub.add_parser("eval", help="run PET/ROT and write verdict.json, results.md, per_instance.csv")
    _common(p)
    _eval_flags(p)
    p.add_argument("--tree", help="tree file (default: OUT/tree.json)")
    p.add_argument("--val-data", help="validation SAB1 file (default: OUT/val.sab)")

    p = sub.add_parser("report", help="re-render results.md from verdict.json")
    p.add_argument("verdict", nargs="?", help="verdict.json (default: OUT/verdict.json)")
    p.add_argument("--out", help="directory holding verdict.json")
    p.add_argument("-o", "--output", help="markdown destination (default: results.md next to the verdict)")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("run", help="gen-data, train and eval in one go")
    _common(p)
    _eval_flags(p)
    p.add_argument("--png", type=int, dest="n_png")
    return parser


def _config(args):
    tests = None
    if getattr(args, "test", None):
        tests = TESTS if args.test == "all" else (args.test.upper(),)
    return load_config(
        args.config,
        seed=args.seed,
        out=args.out,
        n_jobs=args.jobs,
        metrics=getattr(args, "metric", None),
        modes=getattr(args, "mode", None),
        tests=tests,
        replication=getattr(args, "replication", None),
        n_png=getattr(args, "n_png", None),
        grid_search=getattr(args, "grid_search", None),
        grid_subsample=getattr(args, "grid_subsample", None),
    )


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _summary(doc: dict) -> dict:
    return {
        "run_mode": doc["run_mode"],
        "exit_code": doc["exit_code"],
        "all_certified": doc["verdict"]["all_certified"],
        "replication": doc.get("replication"),
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            from pathlib import Path

            verdict = args.verdict or str(Path(args.out or "xaistab-out") / pipeline.VERDICT_FILE)
            _emit({"results": str(pipeline.report(verdict, args.output))})
            return 0
        cfg = _config(args)
        if args.command == "gen-data":
            _emit(pipeline.gen_data(cfg))
            return 0
        if args.command == "train":
            record = pipeline.train(cfg, args.train_data, args.val_data)
            _emit({k: record[k] for k in ("params", "mae", "mse", "n_nodes", "depth", "warnings")})
            return 0
        if args.command == "eval":
            doc, code = pipeline.evaluate(cfg, args.tree, args.val_data)
        else:
            doc, code = pipeline.run_all(cfg)
        _emit(_summary(doc))
        return code
    except (XaiStabError, ValueError, FileNotFoundError) as exc:
        print(f"xaistab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
