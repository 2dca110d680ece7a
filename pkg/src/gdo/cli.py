"""Command line entry point: ``gdo run``, ``gdo list-presets``, ``gdo version``."""

import argparse
import sys

from . import __version__
from .scenario import ConfigError, load_config, run
from .schedule import preset_table

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _cmd_run(args):
    try:
        cfg = load_config(args.config)
        result = run(cfg, out_dir=args.out, tol_scale=args.tol_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    failed = [r for r in result.report["checks"] if not r["passed"]]
    n = len(result.report["checks"])
    print(f"{result.report['scenario']}: {n - len(failed)}/{n} checks passed -> "
          f"{result.out_dir / 'report.json'}")
    for r in failed:
        if r["check"] == "error":
            print(f"  FAIL [{r['module']}] {r['message']}")
        else:
            print(f"  FAIL [{r['module']}] {r['check']}: {r['value']:.3g} (allowed {r['allowed']})")
    return result.status


def _cmd_list(args):
    rows = preset_table()
    print(f"{'preset':<7}{'required':<34}{'optional':<34}description")
    for name, req, opt, desc in rows:
        print(f"{name:<7}{', '.join(req):<34}{', '.join(opt):<34}{desc}")
    return EXIT_PASS


def _cmd_version(args):
    print(f"gdo {__version__}")
    return EXIT_PASS


def build_parser():
    p = argparse.ArgumentParser(prog="gdo", description="Generalized driven oscillator scenarios.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config and write report.json")
    r.add_argument("config", help="path to a JSON scenario config")
    r.add_argument("--out", default=None, help="output directory (overrides the config)")
    r.add_argument("--tol-scale", type=float, default=1.0,
                   help="multiply every tolerance by this factor (default 1)")
    r.set_defaults(func=_cmd_run)

    sub.add_parser("list-presets", help="show the built-in schedules").set_defaults(func=_cmd_list)
    sub.add_parser("version", help="print the version").set_defaults(func=_cmd_version)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    if getattr(args, "tol_scale", 1.0) is not None and getattr(args, "tol_scale", 1.0) <= 0:
        print("--tol-scale must be positive", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
