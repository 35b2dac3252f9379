"""Command line: ``uq run``, ``uq validate`` and ``uq flood-demo``."""
from __future__ import annotations

import argparse
import json
import sys

from .study import (
    EXIT_INVALID,
    EXIT_OK,
    base_dir_of,
    find_step,
    flood_config,
    load_config,
    run_study,
    validate,
)


def _load(path):
    try:
        return load_config(path)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None


def cmd_run(args):
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_INVALID
    code, report = run_study(cfg, args.out, args.threads, base_dir_of(args.config))
    _print_outcome(code, report)
    return code


def cmd_validate(args):
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_INVALID
    diags = validate(cfg, base_dir_of(args.config))
    for d in diags:
        print(d, file=sys.stderr)
    if not diags:
        print("ok")
    return EXIT_INVALID if diags else EXIT_OK


def cmd_flood_demo(args):
    code, report = run_study(flood_config(args.seed), args.out, args.threads)
    _print_outcome(code, report)
    if code == EXIT_OK:
        t = find_step(report, "taylor")["results"]
        f = find_step(report, "form")["results"]
        m = find_step(report, "mc_pf")["results"]
        print(f"taylor mean {t['mean_first_order']:.3f} m, stdev {t['stdev']:.3f} m")
        print(f"form beta {f['beta']:.3f}, pf {f['pf']:.3e}")
        print(f"monte carlo pf {m['pf']:.3e}, 95% CI [{m['ci95'][0]:.3e}, {m['ci95'][1]:.3e}]")
    return code


def _print_outcome(code, report):
    err = report.get("error")
    if err is None:
        print(f"{len(report['steps'])} step(s) done")
    elif err["kind"] == "validation":
        for d in err["diagnostics"]:
            print(f"{d['path']}: {d['message']}", file=sys.stderr)
    else:
        print(f"step {err['step']} failed: {err['type']}: {err['message']}", file=sys.stderr)


def build_parser():
    p = argparse.ArgumentParser(prog="uq", description="Uncertainty quantification studies.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a study config")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: config 'output')")
    r.add_argument("--threads", type=int, default=1, help="worker threads for model evaluation")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("validate", help="check a study config without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    f = sub.add_parser("flood-demo", help="run the shipped flood study")
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--out", default="flood-out")
    f.add_argument("--threads", type=int, default=1)
    f.set_defaults(func=cmd_flood_demo)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
