"""Command-line front end: ``covstruct test | simulate | mctp``.

Exit codes: 0 completed (whatever the decision), 2 usage or unsupported
request, 3 data problem, 4 numerical degeneracy.
"""

import argparse
import json
import sys
import time

from . import io as rio
from . import rng as _rng
from .engine import METHODS, hotelling_t2, run_structure_test
from .exceptions import (
    CovStructError,
    DimensionError,
    DomainError,
    NotPSDError,
    NumericError,
    ParseError,
    SampleSizeError,
)
from .mctp import combined_mctp
from .simulation import PRESETS, Scenario, preset, rows_to_csv, run_scenario
from .structures import KIND_NAMES

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
# flags that change how work is executed but never the result
_RUNTIME_FLAGS = {"threads", "out", "csv", "func", "command"}


class UsageError(Exception):
    pass


def _exit_code(exc):
    if isinstance(exc, (UsageError, DomainError, DimensionError)):
        return EXIT_USAGE
    if isinstance(exc, (OSError, ParseError, SampleSizeError, NotPSDError)):
        return EXIT_DATA
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_DATA


def _echo(name, args):
    return {"name": name, "args": {k: v for k, v in vars(args).items() if k not in _RUNTIME_FLAGS}}


def _emit(doc, out):
    rio.validate_document(doc)
    text = rio.dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive(name, value):
    if value < 1:
        raise UsageError(f"--{name} must be at least 1")


def _alpha(value):
    if not 0 < value < 1:
        raise UsageError("--alpha must lie in (0, 1)")


def cmd_test(args):
    _positive("reps", args.reps)
    _alpha(args.alpha)
    X = rio.load_csv(args.data, args.header)
    start = time.perf_counter()
    if args.structure == "hotelling":
        if args.mu0 is None:
            raise UsageError("--mu0 is required for the hotelling test")
        try:
            mu0 = [float(v) for v in args.mu0.split(",")]
        except ValueError:
            raise UsageError("--mu0 must be a comma-separated list of numbers") from None
        res = hotelling_t2(X, mu0, args.alpha)
    else:
        if args.mu0 is not None:
            raise UsageError("--mu0 only applies to --structure hotelling")
        res = run_structure_test(X, args.structure, domain=args.domain, method=args.method,
                                 alpha=args.alpha, reps=args.reps, seed=args.seed,
                                 variant=args.variant, workers=args.threads)
    if res.degenerate:
        print("note: forced rejection, a superdiagonal used as a ratio denominator is identically zero",
              file=sys.stderr)
    doc = rio.make_document(_echo("test", args), res.to_dict(), rio.fingerprint(X),
                            time.perf_counter() - start)
    _emit(doc, args.out)
    return EXIT_OK


def _load_scenario(args):
    if (args.scenario is None) == (args.preset is None):
        raise UsageError("give exactly one of a scenario file or --preset")
    overrides = dict(n_sim=args.n_sim, n_boot=args.n_boot, n_mc=args.n_mc, seed=args.seed,
                     N_list=args.N_list, dist=args.dist)
    if args.preset is not None:
        return preset(args.preset, **overrides)
    with open(args.scenario) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"scenario is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("scenario must be a JSON object")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Scenario.from_dict(doc)
    except TypeError as exc:
        raise UsageError(f"scenario schema violation: {exc}") from None


def cmd_simulate(args):
    sc = _load_scenario(args)
    start = time.perf_counter()
    rows = run_scenario(sc, workers=args.threads)
    doc = rio.make_document(_echo("simulate", args), {"scenario": sc.to_dict(), "rows": rows},
                            None, time.perf_counter() - start)
    _emit(doc, args.out)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(rows_to_csv(rows))
    return EXIT_OK


def cmd_mctp(args):
    _positive("reps", args.reps)
    _alpha(args.alpha)
    if args.structure != "sphericity":
        raise UsageError("mctp currently supports --structure sphericity only")
    X = rio.load_csv(args.data, args.header)
    start = time.perf_counter()
    res = combined_mctp(X, alpha=args.alpha, B=args.reps, seed=args.seed,
                        quantile_mode=args.quantile_mode, workers=args.threads)
    doc = rio.make_document(_echo("mctp", args), res.to_dict(), rio.fingerprint(X),
                            time.perf_counter() - start)
    _emit(doc, args.out)
    return EXIT_OK


def _common(p, reps_default):
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=reps_default, help="MC or bootstrap replicates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker cap (default: ${_rng.THREADS_ENV} or 1); never changes results")
    p.add_argument("--out", help="write the JSON document here instead of standard output")


def build_parser():
    parser = argparse.ArgumentParser(prog="covstruct", description="Tests for covariance structures.")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test one structure on a CSV sample")
    t.add_argument("data", help="CSV file, rows = observations")
    t.add_argument("--structure", required=True, choices=sorted(KIND_NAMES) + ["hotelling"])
    t.add_argument("--domain", choices=["cov", "corr"], default=None)
    t.add_argument("--method", choices=sorted(METHODS), default="boot")
    t.add_argument("--variant", choices=["h", "g"], default="h")
    t.add_argument("--mu0", default=None, help="comma-separated null mean (hotelling only)")
    t.add_argument("--header", action="store_true", help="skip the first CSV line")
    _common(t, 10000)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="run a simulation scenario")
    s.add_argument("scenario", nargs="?", help="scenario JSON file")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--n-sim", dest="n_sim", type=int)
    s.add_argument("--n-boot", dest="n_boot", type=int)
    s.add_argument("--n-mc", dest="n_mc", type=int)
    s.add_argument("--N", dest="N_list", type=int, nargs="+", help="override sample sizes")
    s.add_argument("--dist", nargs="+", help="override error distributions")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out")
    s.add_argument("--csv", help="also write the table as CSV")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("mctp", help="multiple contrast test")
    m.add_argument("data")
    m.add_argument("--structure", default="sphericity")
    m.add_argument("--quantile-mode", dest="quantile_mode", choices=["signed", "absolute"],
                   default="signed")
    m.add_argument("--header", action="store_true")
    _common(m, 1000)
    m.set_defaults(func=cmd_mctp)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CovStructError, OSError) as exc:
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
