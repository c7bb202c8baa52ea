"""Command-line entry point.

Exit codes: 0 success, 2 argument or validation error, 3 numerical
failure, 4 I/O error.  Every failure prints a single JSON line to stderr
({"error": <class>, "message": <text>}); results go to stdout.  All
configuration arrives through flags and config files — the environment is
never consulted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__, errors
from .activations import ACTIVATION_NAMES, Activation, distortion
from .chain import ChainConfig, NormKind, run_trial
from .experiments import (DEFAULTS, EXPERIMENTS, apply_overrides,
                          centered_reference, reference_for, run_experiment)
from .meanfield import solve_fixed_point
from .report import write_manifest
from .rng import RngStream
from .spectra import MpLaw, mp_band_fraction, mp_ks_distance

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_USAGE_ERRORS = (errors.BadParameter, errors.BadRatio, errors.BadShape,
                 errors.LengthMismatch, errors.NonPositiveReference,
                 errors.NonSquare, errors.NotOddActivation,
                 errors.TooFewEigenvalues)


def _fail(code: int, kind: str, message: str) -> "SystemExit":
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return SystemExit(code)


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors leave as one-line JSON with exit code 2."""

    def error(self, message):
        raise _fail(EXIT_USAGE, "UsageError", message)


def _fixed_width(prog):
    return argparse.HelpFormatter(prog, width=78)


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in payload.items():
            if isinstance(value, (list, tuple, dict)):
                value = json.dumps(value)
            writer.writerow([key, value])
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _add_format(p) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="output format for the result (default: json)")


def build_parser() -> _Parser:
    parser = _Parser(prog="gramlab", formatter_class=_fixed_width,
                     description="Finite-width Gram-chain experiment lab.")
    parser.add_argument("--version", action="version",
                        version=f"gramlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("chain", formatter_class=_fixed_width,
                       help="simulate one normalized chain and dump traces")
    p.add_argument("--n", type=int, required=True, help="batch size")
    p.add_argument("--d", type=int, required=True, help="width")
    p.add_argument("--depth", type=int, default=50)
    p.add_argument("--activation", choices=sorted(ACTIVATION_NAMES),
                   default="identity")
    p.add_argument("--norm", choices=("projection", "centered", "none"),
                   default="centered")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/chain", help="output directory")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("fixed-point", formatter_class=_fixed_width,
                       help="solve the exchangeable mean-field fixed point")
    p.add_argument("--activation", choices=sorted(ACTIVATION_NAMES),
                   required=True)
    p.add_argument("--norm", choices=("projection", "centered"),
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--tol", type=float, default=2e-3)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_format(p)
    p.set_defaults(func=cmd_fixed_point)

    p = sub.add_parser("distortion", formatter_class=_fixed_width,
                       help="estimate the sphere distortion of an activation")
    p.add_argument("--activation", choices=sorted(ACTIVATION_NAMES),
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    _add_format(p)
    p.set_defaults(func=cmd_distortion)

    p = sub.add_parser("mp-check", formatter_class=_fixed_width,
                       help="compare an eigenvalue sample against the MP law")
    p.add_argument("--eigs", required=True,
                   help="text file of eigenvalues (whitespace/CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--drop-top", type=int, default=0,
                   help="discard this many largest eigenvalues first")
    _add_format(p)
    p.set_defaults(func=cmd_mp_check)

    p = sub.add_parser("experiment", formatter_class=_fixed_width,
                       help="run a named experiment end to end")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="output directory (default: runs/<name>)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: available parallelism)")
    p.add_argument("--config", default=None,
                   help="JSON file of config overrides")
    p.add_argument("--override", action="append", default=[],
                   metavar="KEY=VALUE",
                   help="single config override; repeatable, wins over "
                        "--config")
    p.set_defaults(func=cmd_experiment)
    return parser


def cmd_chain(args) -> int:
    norm = NormKind.from_string(args.norm)
    cfg = ChainConfig(n=args.n, d=args.d, depth=args.depth,
                      activation=Activation(args.activation), norm=norm,
                      trials=args.trials, master_seed=args.seed)
    ref = reference_for(norm, args.n)
    os.makedirs(args.out, exist_ok=True)
    manifest = {
        "command": "chain", "version": __version__,
        "config": {"n": args.n, "d": args.d, "depth": args.depth,
                   "activation": args.activation, "norm": args.norm,
                   "trials": args.trials, "seed": args.seed},
        "reference": "identity" if args.norm != "centered"
                     else "centered-projector",
        "status": "running",
    }
    write_manifest(os.path.join(args.out, "manifest.json"), manifest)
    finals = []
    for t in range(args.trials):
        trace = run_trial(cfg, t, reference=ref, record_spectra=True)
        eig = trace.eigenvalues
        lines = ["layer,frob_err," +
                 ",".join(f"lambda_{i + 1}" for i in range(args.n))]
        for layer in range(args.depth + 1):
            vals = ",".join(repr(float(v)) for v in eig[layer])
            lines.append(f"{layer},{float(trace.frob_err[layer])!r},{vals}")
        path = os.path.join(args.out, f"trace_trial{t}.csv")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        finals.append(float(trace.frob_err[-1]))
    manifest["status"] = "complete"
    manifest["final_frob_err"] = finals
    write_manifest(os.path.join(args.out, "manifest.json"), manifest)
    _emit({"out_dir": args.out, "trials": args.trials,
           "final_frob_err": finals}, "json")
    return EXIT_OK


def cmd_fixed_point(args) -> int:
    fp = solve_fixed_point(Activation(args.activation),
                           NormKind.from_string(args.norm), args.n,
                           samples=args.samples, tol=args.tol,
                           max_iter=args.max_iter,
                           stream=RngStream(args.seed, 0))
    _emit({
        "activation": args.activation, "norm": args.norm, "n": args.n,
        "b_star": fp.b_star, "c_star": fp.c_star, "stderr": fp.mc_stderr,
        "iterations": fp.iterations,
        "eigenvalues": [float(v) for v in fp.eigenvalues()],
    }, args.format)
    return EXIT_OK


def cmd_distortion(args) -> int:
    est = distortion(Activation(args.activation), args.n,
                     restarts=args.restarts,
                     stream=RngStream(args.seed, 0))
    _emit({
        "activation": args.activation, "n": args.n, "gamma": est.gamma,
        "maximizer": [float(v) for v in est.maximizer],
        "restarts_used": est.restarts_used,
    }, args.format)
    return EXIT_OK


def cmd_mp_check(args) -> int:
    eigs = np.loadtxt(args.eigs, delimiter=None if
                      not args.eigs.endswith(".csv") else ",").ravel()
    law = MpLaw(args.n / args.d)
    ks = mp_ks_distance(eigs, law, drop_top=args.drop_top)
    band = mp_band_fraction(eigs, args.n, args.d, drop_top=args.drop_top)
    _emit({
        "eigs": args.eigs, "n": args.n, "d": args.d,
        "drop_top": args.drop_top, "count": int(eigs.size),
        "ks": float(ks), "band_fraction": float(band),
    }, args.format)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = {}
    if args.config is not None:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("--config file must hold a JSON object")
        config.update(loaded)
    overrides = {}
    for item in args.override:
        if "=" not in item:
            raise ValueError(f"--override needs KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key] = value
    config = apply_overrides({**DEFAULTS[args.name], **config}, overrides)
    out_dir = args.out if args.out is not None else os.path.join("runs",
                                                                 args.name)
    workers = args.workers if args.workers is not None else (os.cpu_count()
                                                             or 1)
    report = run_experiment(args.name, config=config,
                            master_seed=args.seed, workers=workers,
                            out_dir=out_dir)
    _emit({
        "experiment": report.name, "out_dir": out_dir,
        "rows": len(report.rows), "duration_seconds": report.duration,
        "derived": {k: report.derived[k] for k in sorted(report.derived)},
    }, "json")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except errors.NumericalFailure as e:
        raise _fail(EXIT_NUMERIC, type(e).__name__, str(e))
    except _USAGE_ERRORS as e:
        raise _fail(EXIT_USAGE, type(e).__name__, str(e))
    except errors.GramlabError as e:
        raise _fail(EXIT_NUMERIC, type(e).__name__, str(e))
    except ValueError as e:
        raise _fail(EXIT_USAGE, type(e).__name__, str(e))
    except OSError as e:
        raise _fail(EXIT_IO, type(e).__name__, str(e))


if __name__ == "__main__":
    sys.exit(main())
