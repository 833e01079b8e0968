"""Command line interface: ``checkertail {estimate,simulate,tune,selftest}``."""

import argparse
import json
import sys
import warnings

import numpy as np

from . import selftest
from ._validation import ExtrapolationError, InfeasibleTuningError, OracleUnavailableError, TiesError
from .bootstrap import MultiplierBootstrap
from .simulation import ConfigError, emit_results, load_config, resolve_output, run_experiment
from .tuning import plan

PROG = "checkertail"


class InputError(ValueError):
    """Unreadable or malformed dataset file."""


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_sample(path):
    """Read a two-column numeric file; comma or whitespace separated.

    A first line with non-numeric fields is taken as a header.
    """
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read {path!r}: {exc.strerror}") from None
    if not lines:
        raise InputError(f"{path}: no data.")
    delimiter = "," if "," in lines[0] else None
    rows = [[f.strip() for f in ln.split(delimiter)] for ln in lines]
    if not all(_is_number(f) for f in rows[0]):
        rows = rows[1:]
    data = []
    for lineno, fields in enumerate(rows, start=1):
        if len(fields) != 2 or not all(_is_number(f) for f in fields):
            raise InputError(f"{path}: data row {lineno} is not two numeric fields: {fields!r}")
        data.append([float(f) for f in fields])
    X = np.asarray(data, dtype=np.float64)
    if X.shape[0] < 2:
        raise InputError(f"{path}: need at least two observations.")
    return X


def _cmd_tune(args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = plan(args.n, args.alpha, args.beta, args.rho)
    print(p.report())
    return 0


def _cmd_estimate(args):
    X = read_sample(args.input)
    tuning = {}
    if args.k is not None or args.m is not None:
        tuning.update(k=args.k, m=args.m)
    if args.alpha is not None or args.beta is not None:
        tuning.update(alpha=args.alpha, beta=args.beta)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mb = MultiplierBootstrap(
            side=args.side,
            smoothing=args.smoothing,
            n_bootstrap=args.B,
            level=args.level,
            rho=args.rho,
            random_state=args.seed,
            n_jobs=args.jobs,
            **tuning,
        ).fit(X)
    for w in caught:
        print(f"{PROG}: warning: {w.message}", file=sys.stderr)
    ci = mb.ci_
    out = {
        "n": int(X.shape[0]),
        "k": mb.k_,
        "m": mb.m_,
        "side": args.side,
        "smoothing": args.smoothing,
        "lambda": mb.lambda_,
        "level": args.level,
        "ci_lower": ci.lower,
        "ci_upper": ci.upper,
        "ci_raw_lower": ci.raw_lower,
        "ci_raw_upper": ci.raw_upper,
        "B": args.B,
        "seed": args.seed,
    }
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for key, value in out.items():
            print(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")
    return 0


def _cmd_simulate(args):
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.reps is not None:
        changes["reps"] = args.reps
    if args.B is not None:
        changes["B"] = args.B
    if args.no_timing:
        changes["timing"] = False
    if changes:
        config = config.replace(**changes)
    workers = args.workers if args.workers is not None else config.workers
    result = run_experiment(config, workers=workers)
    output = resolve_output(args.output or config.output)
    fmt = args.format or ("json" if output is not None and output.suffix == ".json" else "csv")
    text = emit_results(result, output, fmt)
    if output is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(result.records)} records to {output}", file=sys.stderr)
    return 0


def _cmd_selftest(args):
    return 1 if selftest.run(seed=args.seed) else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog=PROG, description="Checkerboard tail copula estimation and multiplier bootstrap."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="tail dependence coefficient and bootstrap interval")
    p.add_argument("--input", required=True, help="two-column data file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--side", choices=("lower", "upper"), default="lower")
    p.add_argument("--smoothing", choices=("checkerboard", "raw"), default="checkerboard")
    p.add_argument("--level", type=float, default=0.9)
    p.add_argument("--B", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1, help="bootstrap threads")
    p.add_argument("--json", action="store_true", help="print JSON instead of key=value")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--output", help="output file (stdout when omitted and unset in config)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--no-timing", action="store_true", help="write seconds as 0")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("tune", help="report k_n, m_n and the feasibility checks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.8)
    p.add_argument("--rho", type=float, default=1.0)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("selftest", help="run built-in property checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_selftest)
    return parser


_HANDLED = (
    ConfigError,
    InputError,
    InfeasibleTuningError,
    OracleUnavailableError,
    ExtrapolationError,
    TiesError,
    ValueError,
    OSError,
)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _HANDLED as exc:
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
