"""Command-line entry point: ``blsnav {gen-net,traverse,optimize,report}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import fixtures as fx
from . import harness, mapnet
from .errors import BlsError, ConfigurationError
from .optimize import Driver

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return value


def _common(p, out_help):
    p.add_argument("--config", metavar="PATH", help="JSON configuration file")
    p.add_argument("--out", metavar="PATH", help=out_help)
    p.add_argument("--seed", type=_u64, help="override the seed from the config")
    p.add_argument("--quiet", action="store_true", help="only report errors")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blsnav", description="Bounded Local Space latent navigation")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen-net", help="write a seeded fixture mapping network as JSON")
    _common(p, "output file (default network.json; a directory gets network.json inside)")

    p = sub.add_parser("traverse", help="run a traversal experiment")
    _common(p, "output directory for results.csv and frechet.json (default .)")
    p.add_argument("--preset", choices=sorted(harness.PRESETS), help="built-in experiment config")
    p.add_argument("--strict", action="store_true", help="abort on the first numeric failure")

    p = sub.add_parser("optimize", help="run an optimization demo and write its loss curve")
    _common(p, "output directory for the loss CSV (default .)")
    p.add_argument("--task", choices=harness.TASKS, default=None)
    p.add_argument("--driver", choices=[d.value for d in Driver], default=None)
    p.add_argument("--iters", type=int, help="number of iterations")
    p.add_argument("--lr", type=float, help="learning rate (default: task/driver preset)")

    p = sub.add_parser("report", help="summarize a results CSV on standard output")
    p.add_argument("csv", help="results CSV written by traverse")
    p.add_argument("--quiet", action="store_true")
    return parser


def _read_json(path, flag="--config"):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{flag}: no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None


def cmd_gen_net(args):
    cfg = fx.FixtureConfig.from_dict(_read_json(args.config)) if args.config else fx.FixtureConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = Path(args.out or "network.json")
    if out.is_dir():
        out = out / "network.json"
    mapnet.save_network(fx.gen_mapping_network(cfg), out)
    logging.info("wrote %s", out)


def cmd_traverse(args):
    if args.config and args.preset:
        raise UsageError("traverse: give --config or --preset, not both")
    if args.config:
        _read_json(args.config)
        cfg = harness.load_experiment_config(args.config)
    elif args.preset:
        cfg = harness.preset_config(args.preset)
    else:
        raise UsageError("traverse: missing required --config PATH (or --preset NAME)")
    if args.seed is not None:
        cfg = harness.ExperimentConfig(**{**cfg.__dict__, "master_seed": args.seed})
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    rows, series = harness.run_experiment(cfg, strict=args.strict)
    harness.write_csv(rows, out / "results.csv")
    harness.write_frechet_json(series, out / "frechet.json")
    failed = sum(r.failed for r in rows)
    if failed:
        logging.warning("%d trajectories were flagged as failed", failed)
    logging.info("wrote %s and %s", out / "results.csv", out / "frechet.json")


def cmd_optimize(args):
    data = _read_json(args.config) if args.config else {}
    if not isinstance(data, dict):
        raise ConfigurationError("optimize config must be a JSON object")
    for key in ("task", "driver", "iters", "lr", "seed"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    base = Path(args.config).parent if args.config else None
    cfg = harness.OptimizeConfig.from_dict(data, base_dir=base)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    states = harness.run_optimize(cfg)
    path = out / f"{cfg.task}_{cfg.driver.value}.csv"
    harness.write_loss_csv(states, path)
    logging.info("loss %.6g -> %.6g, wrote %s", states[0].loss, states[-1].loss, path)


def cmd_report(args):
    if not Path(args.csv).is_file():
        raise UsageError(f"report: no such file: {args.csv}")
    summary = harness.summarize(harness.read_csv(args.csv))
    sys.stdout.write(harness.format_summary(summary))


COMMANDS = {
    "gen-net": cmd_gen_net,
    "traverse": cmd_traverse,
    "optimize": cmd_optimize,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
        force=True,
    )
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"blsnav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BlsError, OSError) as exc:
        print(f"blsnav: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
