"""``rfi-scrub`` command line.

Subcommands: simulate, estimate, suppress, metrics, sweep, render. Reports
and specs are JSON. On failure a one-line JSON object
``{"error": <category>, "message": ...}`` goes to stderr and the exit status
is nonzero.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace

import numpy as np

from .config import PipelineConfig
from .core import RfiScrubError
from .estimator import estimate_fm_rates
from .evaluation import METHODS, run_sweep, sir_points
from .image_io import cimg_precision, load_config, read_cimg, render_png, write_cimg
from .metrics import average_gradient, relative_recovery_error, sir_db
from .simulator import SimulationSpec, simulate
from .suppressor import default_workers, process_blocks, suppress_rfi

EXIT_CODES = {"usage": 2, "format": 3, "config": 4, "io": 5, "dimension": 6, "parameter": 6, "data": 6}


class UsageError(Exception):
    category = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _pipeline(path):
    return PipelineConfig.from_dict(load_config(path) if path else {})


def _simulation_spec(path, seed):
    raw = load_config(path)
    spec = SimulationSpec.from_dict(raw)
    if seed is not None:
        spec = replace(spec, seed=int(seed))
    return spec


def cmd_simulate(args):
    sim = simulate(_simulation_spec(args.spec, args.seed))
    write_cimg(args.out_clean, sim.clean, args.precision)
    write_cimg(args.out_corrupt, sim.corrupted, args.precision)
    if args.out_rfi:
        write_cimg(args.out_rfi, sim.rfi, args.precision)
    if args.report:
        _write_json(args.report, {"schema": "rfi-scrub/simulate/1", "mixture": sim.mixture.to_dict(),
                                  "rfi_scale": sim.scale, "sir_db": sir_db(sim.clean, sim.rfi)})


def cmd_estimate(args):
    X = read_cimg(args.input)
    cfg = _pipeline(args.config)
    _write_json(args.report, estimate_fm_rates(X, cfg.estimator).to_dict())


def cmd_suppress(args):
    X = read_cimg(args.input)
    cfg = _pipeline(args.config)
    precision = cimg_precision(args.input)
    if cfg.blocks is not None:
        S, report = process_blocks(X, cfg.blocks, cfg.estimator, cfg.notch, default_workers())
        R = X - S
    else:
        S, R, report = suppress_rfi(X, cfg.estimator, cfg.notch)
    write_cimg(args.out, S, precision)
    if args.rfi_out:
        write_cimg(args.rfi_out, R, precision)
    if args.report:
        _write_json(args.report, report.to_dict())


def cmd_metrics(args):
    test = read_cimg(args.test)
    out = {"schema": "rfi-scrub/metrics/1", "ag": average_gradient(test), "rel_err_db": None, "sir_db": None}
    if args.ref:
        ref = read_cimg(args.ref)
        out["rel_err_db"] = relative_recovery_error(test, ref)
        residual = test - ref
        out["sir_db"] = sir_db(ref, residual) if np.any(residual) else None
    _write_json(args.report, out)


def cmd_sweep(args):
    template = _simulation_spec(args.spec, args.seed)
    cfg = _pipeline(args.config)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    sirs = sir_points(args.sir_from, args.sir_to, args.sir_step)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = run_sweep(template, sirs, args.trials, methods, cfg, workers=default_workers())
    _write_json(args.report, report)


def cmd_render(args):
    render_png(read_cimg(args.input), args.out, args.dyn_range)


def build_parser():
    p = _Parser(prog="rfi-scrub", description="LFM interference removal for complex SAR images")
    p.add_argument("--seed", type=int, default=None, help="override the seed of the simulation spec")
    # repeated after the subcommand; SUPPRESS keeps it from clobbering the top-level value
    seed_parent = _Parser(add_help=False)
    seed_parent.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[seed_parent], help="synthesize clean, corrupted and RFI images")
    s.add_argument("--spec", required=True)
    s.add_argument("--out-clean", required=True)
    s.add_argument("--out-corrupt", required=True)
    s.add_argument("--out-rfi")
    s.add_argument("--report")
    s.add_argument("--precision", type=int, choices=(32, 64), default=64)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="estimate azimuth and range FM rates")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--config")
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("suppress", help="remove LFM interference")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--rfi-out")
    s.add_argument("--report")
    s.set_defaults(func=cmd_suppress)

    s = sub.add_parser("metrics", help="average gradient, recovery error and SIR")
    s.add_argument("--test", required=True)
    s.add_argument("--ref")
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("sweep", parents=[seed_parent], help="compare methods over an SIR range")
    s.add_argument("--spec", required=True)
    s.add_argument("--config")
    s.add_argument("--sir-from", type=float, default=-10.0)
    s.add_argument("--sir-to", type=float, default=10.0)
    s.add_argument("--sir-step", type=float, default=2.5)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--methods", default=",".join(METHODS))
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("render", help="write a log-magnitude PNG")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--dyn-range", type=float, default=40.0)
    s.set_defaults(func=cmd_render)
    return p


def _fail(category, message):
    sys.stderr.write(json.dumps({"error": category, "message": str(message)}) + "\n")
    return EXIT_CODES.get(category, 1)


def run(argv=None) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc)
    except RfiScrubError as exc:
        return _fail(exc.category, exc)
    except OSError as exc:
        return _fail("io", exc)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
