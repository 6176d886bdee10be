"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import Sequence

from ..errors import ConfigError, DskError, NoCrossingError, NumericFailureError
from .config import ExperimentConfig, parse_config
from .presets import PRESETS, run_experiment, run_preset
from .validate import run_checks

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="trials (circular) or drives (rsu) per point")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="worker processes, 0 = one per CPU")
    p.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="dsksim", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True
    sub.add_parser("coherence", parents=[common], help="coherence curves for the [coherence] section")
    sub.add_parser("sweep", parents=[common], help="circular-cell SER sweep")
    sub.add_parser("rsu", parents=[common], help="RSU highway SER sweep")
    pp = sub.add_parser("preset", parents=[common], help="run a named experiment")
    pp.add_argument("name", help="one of: " + ", ".join(PRESETS))
    sub.add_parser("validate", parents=[common], help="fast numerical self-checks")
    return parser


def _load(args) -> ExperimentConfig:
    over = {}
    for key in ("seed", "out", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            over[f"experiment.{key}"] = val
    if args.trials is not None and args.command != "preset":
        over["experiment.trials"] = args.trials
    return parse_config(args.config, over)


def _color(text: str, ok: bool) -> str:
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\033[{32 if ok else 31}m{text}\033[0m"


def _report_run(res, args, name: str) -> None:
    if args.json:
        print(json.dumps({"name": name, "csv": str(res.csv_path), "meta": str(res.meta_path),
                          "header": list(res.header), "rows": res.rows}))
    else:
        print(f"wrote {res.csv_path} ({len(res.rows)} rows) and {res.meta_path}")


def _validate(cfg: ExperimentConfig, as_json: bool) -> int:
    checks = run_checks(cfg)
    if as_json:
        print(json.dumps([{"check": c.name, "passed": c.passed, "detail": c.detail}
                          for c in checks], indent=2))
    else:
        width = max(len(c.name) for c in checks)
        for c in checks:
            tag = _color("PASS" if c.passed else "FAIL", c.passed)
            print(f"{c.name:<{width}}  {tag}  {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "validate":
            return _validate(cfg, args.json)
        if args.command == "preset":
            if args.name not in PRESETS:
                parser.print_usage(sys.stderr)
                print(f"dsksim: unknown preset '{args.name}'; valid names: "
                      f"{', '.join(PRESETS)}", file=sys.stderr)
                return EXIT_USAGE
            res = run_preset(args.name, cfg, args.trials)
            _report_run(res, args, args.name)
            return EXIT_OK
        kind = {"coherence": "coherence", "sweep": "circular", "rsu": "rsu"}[args.command]
        if cfg.kind != kind:
            cfg = replace(cfg, kind=kind, sweep=cfg.sweep if cfg.kind == kind else None)
        res = run_experiment(cfg, args.command)
        _report_run(res, args, args.command)
        return EXIT_OK
    except ConfigError as exc:
        print(f"dsksim: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailureError, NoCrossingError) as exc:
        print(f"dsksim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DskError as exc:
        print(f"dsksim: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
