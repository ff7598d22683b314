"""Command-line interface.

Exit codes: 0 every scenario passed, 1 at least one mathematical failure,
2 configuration or schema error.
"""
from __future__ import annotations

import argparse
import json
import sys

from ..errors import ConfigError
from .config import Batch, load_batch, parse_batch
from .report import emit_plot_data, reports_to_csv, reports_to_json
from .runner import run_batch

SUBCOMMAND_SUBJECT = {
    "verify-isometry": "isometry",
    "verify-polytope": "polytope",
    "circumcenter": "circumcenter",
    "hemisphere": "hemisphere",
    "gram-cert": "gram",
}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="batch file (JSON with 'scenarios' and 'defaults')")
    p.add_argument("--scenario", help="a single scenario as inline JSON")
    p.add_argument("--seed", type=int, help="batch seed (unsigned 64-bit)")
    p.add_argument("--tol", type=float, help="verification tolerance override")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="catkappa", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, subject in SUBCOMMAND_SUBJECT.items():
        sub.add_parser(name, parents=[common], help="run the %s scenarios of a batch" % subject)
    sub.add_parser("batch", parents=[common], help="run every scenario of a batch")
    plot = sub.add_parser("plot-data", parents=[common], help="plot-ready table from a batch")
    plot.add_argument("--selector", choices=("rotation", "polytope"), default="rotation")
    return parser


def _load(args) -> Batch:
    if args.scenario:
        try:
            obj = json.loads(args.scenario)
        except json.JSONDecodeError as exc:
            raise ConfigError("--scenario is not valid JSON: %s" % exc) from None
        return parse_batch({"scenarios": [obj]}, seed=args.seed, tol=args.tol)
    if not args.config:
        raise ConfigError("give --config PATH or --scenario JSON")
    return load_batch(args.config, seed=args.seed, tol=args.tol)


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        batch = _load(args)
    except (ConfigError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    subject = SUBCOMMAND_SUBJECT.get(args.command)
    if args.command == "plot-data":
        wanted = {"rotation": ("isometry",), "polytope": ("polytope", "gram")}[args.selector]
        batch = Batch([s for s in batch.scenarios if s.subject in wanted], batch.defaults, batch.errors)
    elif subject is not None:
        batch = Batch([s for s in batch.scenarios if s.subject == subject], batch.defaults, batch.errors)
    reports, summary = run_batch(batch, jobs=args.jobs)
    if args.command == "plot-data":
        ok = [r for r in reports if r.verdict != "error"]
        _emit(emit_plot_data(ok, args.selector), args.out)
    elif args.format == "csv":
        _emit(reports_to_csv(reports), args.out)
    else:
        _emit(reports_to_json(reports), args.out)
    c = summary.counts
    print("%d scenarios: %d pass, %d fail, %d inconclusive, %d precondition-failed, %d error"
          % (len(reports), c["pass"], c["fail"], c["inconclusive"], c["precondition-failed"], c["error"]),
          file=sys.stderr)
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
