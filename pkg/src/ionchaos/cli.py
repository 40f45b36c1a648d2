"""Command-line interface.

Subcommands: run, sweep, raman-check, list-presets.  Exit codes:
0 success, 2 configuration error, 3 numerical failure.  The default
output directory comes from --out, else $IONCHAOS_OUT, else ./out.
"""

import argparse
import json
import os
import sys

from . import __version__
from .classical import IntegrationError
from .config import ConfigError, apply_overrides, load_config
from .presets import PRESETS, preset_config, scenario_from_config
from .quantum import PropagationError
from .runner import raman_check_payload, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ionchaos",
        description="Driven trapped-ion dynamics: classical and quantum runs, "
                    "parameter sweeps, figure data.",
    )
    parser.add_argument("--version", action="version", version=f"ionchaos {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default=None, help="output directory "
                       "(default: $IONCHAOS_OUT or ./out)")
        p.add_argument("--workers", type=int, default=1, help="parallel workers")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted-path config override")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="data file format")

    run_p = sub.add_parser("run", help="run a preset or config file")
    run_p.add_argument("target", help="preset name, config file (.toml), or manifest (.json)")
    add_common(run_p)

    sweep_p = sub.add_parser("sweep", help="chaos-scan over a range of driving strengths")
    sweep_p.add_argument("target", nargs="?", default="scan-onset",
                         help="chaos-scan preset or config file (default scan-onset)")
    add_common(sweep_p)

    raman_p = sub.add_parser("raman-check", help="dump coupling tensors and their cross-check")
    raman_p.add_argument("--out", default=None, help="also write raman_check.json here")

    sub.add_parser("list-presets", help="list available presets")
    return parser


def _resolve_out(out):
    return out or os.environ.get("IONCHAOS_OUT") or "out"


def _load_target(target):
    if target in PRESETS:
        return preset_config(target), target
    if os.path.exists(target):
        return load_config(target), None
    raise ConfigError(f"{target!r} is neither a preset nor an existing config file")


def _cmd_run(args, require_kind=None):
    doc, name = _load_target(args.target)
    doc = apply_overrides(doc, args.overrides)
    scenario = scenario_from_config(doc, name=name)
    if require_kind and scenario.kind != require_kind:
        raise ConfigError(
            f"sweep needs a {require_kind} scenario, got kind {scenario.kind!r}"
        )
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    out_dir = _resolve_out(args.out)
    manifest = run_scenario(scenario, out_dir, workers=args.workers, fmt=args.format)
    n = len(manifest["outputs"])
    print(f"{scenario.name}: wrote {n} file(s) + manifest.json to {out_dir}")
    return EXIT_OK


def _cmd_raman_check(args):
    payload = raman_check_payload()
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "raman_check.json"), "w", newline="") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def _cmd_list_presets():
    width = max(len(n) for n in PRESETS)
    for name in PRESETS:
        print(f"{name:<{width}}  {PRESETS[name].get('description', '')}")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_run(args, require_kind="chaos-scan")
        if args.command == "raman-check":
            return _cmd_raman_check(args)
        if args.command == "list-presets":
            return _cmd_list_presets()
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, PropagationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
