"""Command-line entry point.

    tensorconc <command> --config <file> [--set key=value]... [--jobs N] [--out path]

Commands: concentration, regularize, expander, sparsify, diagnostics run a
Monte-Carlo sweep from a JSON config; summarize aggregates an existing CSV
(its config is {"csv": "<path>"}).  Exit codes: 0 success, 2 config error,
3 I/O or CSV parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import COMMANDS, ConfigError, CsvFormatError, load_config, run, summarize


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensorconc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS + ("summarize",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a (dotted) config key")
        p.add_argument("--jobs", type=int, default=1, help="concurrent trials")
        p.add_argument("--out", default=None, help="output path override")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "summarize":
            return _summarize_cmd(args)
        cfg = load_config(args.config, command=args.command, overrides=args.set)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        run(cfg, jobs=args.jobs, out=args.out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CsvFormatError as exc:
        print(f"csv error: {exc}", file=sys.stderr)
        return 3


def _summarize_cmd(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            data[key] = json.loads(raw)
        except json.JSONDecodeError:
            data[key] = raw
    data.pop("command", None)
    csv_path = data.pop("csv", None)
    if csv_path is None or data:
        raise ConfigError("summarize config must be exactly {\"csv\": \"<path>\"}")
    summary = summarize(str(csv_path))
    text = json.dumps(summary, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
