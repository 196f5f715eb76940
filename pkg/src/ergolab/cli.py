"""Command line entry point: ``ergolab <kind> [--config PATH] [--seed N] ...``.

Exit status is 0 iff every record in the report passes.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import KINDS, ExperimentConfig, parse_config
from .errors import ErgolabError
from .experiments import run_experiment
from .report import Record, Report, emit_report

_BASES = {"nat": "nat", "bit": "bit"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run a {kind} experiment")
        sp.add_argument("--config", type=Path, help="experiment config file")
        sp.add_argument("--seed", type=int, help="64-bit unsigned seed")
        sp.add_argument("--out", type=Path, help="report path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.add_argument("--samples", type=int, help="Monte Carlo sample count")
        sp.add_argument("--base", choices=sorted(_BASES), help="log base for entropies")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp so reruns are byte-identical")
    return parser


def _load(args) -> ExperimentConfig:
    data = parse_config(args.config.read_text()) if args.config else {}
    if data.get("kind", args.kind) != args.kind:
        raise ErgolabError(f"config kind {data['kind']!r} does not match subcommand {args.kind!r}")
    data["kind"] = args.kind
    for name in ("seed", "samples", "base"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if args.out is not None:
        data["out"] = str(args.out)
    return ExperimentConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except (ErgolabError, OSError) as exc:
        report = Report(config={"kind": args.kind}, seed=args.seed or 0)
        report.add(Record.error(args.kind, exc))
    else:
        report = run_experiment(cfg)
    out = args.out
    fmt = args.format or (out.suffix.lstrip(".") if out and out.suffix in (".json", ".csv") else "json")
    try:
        text = emit_report(report, fmt, out, timestamp=not args.no_timestamp)
    except OSError as exc:
        print(f"ergolab: cannot write report: {exc}", file=sys.stderr)
        return 2
    if out is None:
        sys.stdout.write(text)
    for rec in report.failures():
        print(f"ergolab: {rec.verdict}: {rec.kind} ({rec.claim_anchor}) {rec.detail}".rstrip(),
              file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
