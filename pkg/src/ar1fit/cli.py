"""
Command line interface.

    ar1fit acvf series.csv --max-lag 10
    ar1fit estimate series.csv --lag 3 --r 0
    ar1fit simulate --kind ar1 --phi 0.5 -T 5000 --seed 1 -o x.csv
    ar1fit mc-table --process ar1 --reps 1000 --seed 1 -o out/ar1
    ar1fit test series.csv --which g0 --lag 3 --r 0
    ar1fit noise-recover series.csv --phi 0.5 --max-lag 5

Every flag can also be given in a ``--config`` file of ``key = value`` lines
(keys are flag names without the leading dashes); command-line flags win.
Exit codes: 0 ok, 1 usage, 2 uninformative data, 3 ambiguity, 4 I/O or
input format.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import AcvfConfig, acvf_vector, bartlett_sigma, default_truncation
from .errors import Ar1FitError, DomainError, InconsistencyError, TestUnavailableError, UninformativeLagError
from .estimator import EstimatorConfig, NoiseSpec, estimate
from .formats import SCHEMA_VERSION, InputFormatError, dump_json, fmt_num, read_lag_values, read_series
from . import hypothesis
from .mc import GridSpec, DEFAULT_LAGS, DEFAULT_PHIS, DEFAULT_THETAS, DEFAULT_TS, run_grid
from .noise import recover_noise_acvf
from .simgen import ProcessSpec, simulate

EXIT_OK, EXIT_USAGE, EXIT_UNINFORMATIVE, EXIT_AMBIGUOUS, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _ints(text):
    out = []
    for part in str(text).replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _lag_value(text):
    try:
        lag, val = str(text).split(":")
        return int(lag), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LAG:VALUE, got {text!r}") from None


def _add_acvf_flags(p):
    p.add_argument("--centering", choices=["sample-mean", "none"], default="sample-mean")
    p.add_argument("--denominator", choices=["T", "T-n-1"], default="T")
    p.add_argument("--rate-exponent", type=float, default=0.5,
                   help="l(T) = T**rate_exponent (default 0.5)")
    p.add_argument("--truncation", type=int, default=None,
                   help="Bartlett truncation M (default floor(10 log10 T))")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ar1fit", description="AR(1) characterization estimators for stationary series")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="key = value file mirroring the flags")
        return p

    p = add("acvf", "sample autocovariances with Bartlett standard errors")
    p.add_argument("input", nargs="?")
    p.add_argument("--max-lag", type=int, default=10)
    _add_acvf_flags(p)
    p.add_argument("-o", "--output")

    p = add("estimate", "estimate phi at a lag given an assumed noise autocovariance")
    p.add_argument("input", nargs="?")
    p.add_argument("--lag", type=int)
    p.add_argument("--r", type=float, help="assumed r(N)")
    p.add_argument("--r2", type=_lag_value, help="second noise value LAG:VALUE for root disambiguation")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_acvf_flags(p)
    p.add_argument("-o", "--output")

    p = add("simulate", "simulate a process to CSV")
    p.add_argument("--kind", choices=["ar1", "arma", "gaussian-acvf", "worst-case"], default="ar1")
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--theta", type=float, action="append",
                   help="MA coefficient (repeatable; arma defaults to 0.8, 0.3)")
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--acvf-file", help="lag,value CSV for --kind gaussian-acvf")
    p.add_argument("--innovations", choices=["gaussian", "uniform"], default="gaussian")
    p.add_argument("-T", "--length", dest="T", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")

    p = add("mc-table", "Monte Carlo tables of mean estimates over (phi, N, T) grids")
    p.add_argument("--process", choices=["ar1", "arma"], default="ar1")
    p.add_argument("--grid", help="key = value file with phis, lags, T, reps, thetas")
    p.add_argument("--phis", type=_floats)
    p.add_argument("--lags", type=_ints)
    p.add_argument("--T", dest="T_values", type=_ints)
    p.add_argument("--theta", type=float, action="append")
    p.add_argument("--reps", type=int)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default $AR1FIT_THREADS or 1)")
    p.add_argument("-o", "--output", help="output prefix; writes PREFIX_means.csv, _means.txt, "
                                          "_summary.csv, _hist.csv (stdout if omitted)")

    p = add("test", "assumption tests")
    p.add_argument("input", nargs="?")
    p.add_argument("--which", choices=["gamma0", "g0", "gamma-eq-r", "a-eq"])
    p.add_argument("--lag", type=int)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--k", type=int, default=1, help="lag offset for a-eq")
    p.add_argument("--r2", type=float, default=None, help="r(N+k) for a-eq")
    p.add_argument("--alpha", type=float, default=0.05)
    _add_acvf_flags(p)
    p.add_argument("-o", "--output")

    p = add("noise-recover", "noise autocovariance r(n) implied by phi")
    p.add_argument("input", nargs="?")
    p.add_argument("--phi", type=float)
    p.add_argument("--max-lag", type=int, default=10)
    p.add_argument("--input-kind", choices=["auto", "series", "acvf"], default="auto",
                   help="series (one value per line) or acvf (lag,value); auto detects two columns")
    p.add_argument("--centering", choices=["sample-mean", "none"], default="sample-mean")
    p.add_argument("--denominator", choices=["T", "T-n-1"], default="T")
    p.add_argument("-o", "--output")
    return parser


def _read_config(path) -> dict:
    out = {}
    for lineno, ln in enumerate(Path(path).read_text().splitlines(), 1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in ln.split("=", 1))
        out[k.lstrip("-")] = v
    return out


def _config_argv(cfg: dict, subparser: argparse.ArgumentParser) -> list[str]:
    """Turn config entries into argv tokens placed before the real flags."""
    known = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            known[opt.lstrip("-")] = (opt, action)
    argv = []
    for k, v in cfg.items():
        if k == "input":
            continue
        if k not in known:
            raise UsageError(f"unknown config key {k!r}")
        opt, action = known[k]
        if isinstance(action, argparse._AppendAction):
            for item in v.split(","):
                argv += [opt, item.strip()]
        else:
            argv += [opt, v]
    return argv


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = _read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        pre = _config_argv(cfg, sub)
        idx = argv.index(args.command)
        args = parser.parse_args(argv[: idx + 1] + pre + argv[idx + 1:])
        if args.__dict__.get("input") is None and "input" in cfg:
            args.input = cfg["input"]
    return parser, args


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for '{args.command}'")


def _load_series(args) -> np.ndarray:
    _need(args, "input")
    return read_series(args.input)


def _acvf_config(args, max_lag=10) -> AcvfConfig:
    return AcvfConfig(args.centering, args.denominator, max_lag)


def cmd_acvf(args):
    x = _load_series(args)
    T = x.size
    K = args.max_lag
    if K >= T - 1:
        raise DomainError(f"--max-lag {K} requires more than {K + 1} observations (have {T})")
    M = default_truncation(T) if args.truncation is None else args.truncation
    Kfull = min(T - 2, K + M)
    est = acvf_vector(x, _acvf_config(args, Kfull))
    rate = float(T) ** args.rate_exponent
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lag", "gamma", "se"])
    for n in range(K + 1):
        Mn = min(M, Kfull - n)
        s2 = bartlett_sigma(est.gamma_hat, n, n, Mn)
        w.writerow([n, fmt_num(est.gamma_hat[n]), fmt_num(math.sqrt(max(s2, 0.0)) / rate)])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_estimate(args):
    _need(args, "lag", "r")
    x = _load_series(args)
    entries = {args.lag: args.r}
    if args.r2 is not None:
        entries[args.r2[0]] = args.r2[1]
    cfg = EstimatorConfig(acvf=_acvf_config(args), level=args.level, alpha=args.alpha,
                          rate_exponent=args.rate_exponent, truncation=args.truncation)
    res = estimate(x, args.lag, NoiseSpec(entries), cfg)
    doc = {"schema_version": SCHEMA_VERSION, "command": "estimate", "T": int(x.size),
           "lag": args.lag, "noise": {str(k): v for k, v in entries.items()}}
    doc.update(res.to_dict())
    _emit(dump_json(doc), args.output)
    return EXIT_AMBIGUOUS if res.ambiguous else EXIT_OK


def cmd_simulate(args):
    if args.seed is None:
        raise UsageError("--seed is required for 'simulate'")
    kind = {"arma": "arma1q"}.get(args.kind, args.kind)
    thetas = tuple(args.theta) if args.theta else (DEFAULT_THETAS if kind == "arma1q" else ())
    acvf = ()
    if kind == "gaussian-acvf":
        _need(args, "acvf_file")
        tab = read_lag_values(args.acvf_file)
        acvf = tuple(tab.get(n, 0.0) for n in range(max(tab) + 1))
    spec = ProcessSpec(kind=kind, T=args.T, seed=args.seed, phi=args.phi, thetas=thetas,
                       sigma2=args.sigma2, b=args.b, gamma0=args.gamma0, acvf=acvf,
                       innovations=args.innovations)
    x = simulate(spec)
    _emit("x\n" + "".join(fmt_num(v) + "\n" for v in x.values), args.output)
    return EXIT_OK


def _grid_from_args(args) -> GridSpec:
    g = {}
    if args.grid:
        g = _read_config(args.grid)
    phis = args.phis or (_floats(g["phis"]) if "phis" in g else DEFAULT_PHIS)
    lags = args.lags or (_ints(g["lags"]) if "lags" in g else DEFAULT_LAGS)
    Ts = args.T_values or (_ints(g["T"]) if "T" in g else DEFAULT_TS)
    reps = args.reps if args.reps is not None else int(g.get("reps", 1000))
    thetas = tuple(args.theta) if args.theta else (_floats(g["thetas"]) if "thetas" in g else ())
    process = g.get("process", args.process) if args.process == "ar1" else args.process
    return GridSpec(process=process, phis=phis, lags=lags, T_values=Ts, replicates=reps,
                    seed=args.seed, thetas=thetas, bins=args.bins)


def cmd_mc_table(args):
    if args.seed is None:
        raise UsageError("--seed is required for 'mc-table'")
    spec = _grid_from_args(args)
    res = run_grid(spec, workers=args.workers)
    if args.output:
        prefix = Path(args.output)
        if prefix.parent and not prefix.parent.exists():
            prefix.parent.mkdir(parents=True)
        Path(f"{prefix}_means.csv").write_text(res.to_csv())
        Path(f"{prefix}_means.txt").write_text(res.to_text())
        Path(f"{prefix}_summary.csv").write_text(res.summary_csv())
        Path(f"{prefix}_hist.csv").write_text(res.histogram_csv())
    else:
        sys.stdout.write(res.to_csv())
    return EXIT_OK


def cmd_test(args):
    _need(args, "which", "lag")
    x = _load_series(args)
    kw = dict(config=_acvf_config(args), rate_exponent=args.rate_exponent, truncation=args.truncation)
    N = args.lag
    if args.which == "gamma0":
        res = hypothesis.test_gamma_zero(x, N, args.alpha, **kw)
    elif args.which == "g0":
        res = hypothesis.test_g_zero(x, N, args.r, args.alpha, **kw)
    elif args.which == "gamma-eq-r":
        res = hypothesis.test_gamma_equals_r(x, N, args.r, args.alpha, **kw)
    else:
        _need(args, "r2")
        res = hypothesis.test_a_equal(x, N, args.k, args.r, args.r2, args.alpha, **kw)
    doc = {"schema_version": SCHEMA_VERSION, "command": "test", "which": args.which, "lag": N,
           "T": int(x.size)}
    doc.update(res.to_dict())
    _emit(dump_json(doc), args.output)
    return EXIT_OK


def cmd_noise_recover(args):
    _need(args, "input", "phi")
    kind = args.input_kind
    if kind == "auto":
        first = [ln for ln in Path(args.input).read_text().splitlines() if ln.strip()][-1]
        kind = "acvf" if "," in first else "series"
    if kind == "acvf":
        gamma = read_lag_values(args.input)
    else:
        x = read_series(args.input)
        gamma = acvf_vector(x, AcvfConfig(args.centering, args.denominator, args.max_lag + 1)).gamma_hat
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lag", "r"])
    for n in range(args.max_lag + 1):
        w.writerow([n, fmt_num(recover_noise_acvf(args.phi, gamma, n))])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


COMMANDS = {
    "acvf": cmd_acvf,
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "mc-table": cmd_mc_table,
    "test": cmd_test,
    "noise-recover": cmd_noise_recover,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, args = _parse(argv)
    except UsageError as exc:
        print(f"ar1fit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ar1fit: error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ar1fit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InputFormatError) as exc:
        print(f"ar1fit: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UninformativeLagError, TestUnavailableError) as exc:
        print(f"ar1fit: uninformative data: {exc}", file=sys.stderr)
        return EXIT_UNINFORMATIVE
    except InconsistencyError as exc:
        print(f"ar1fit: inconsistent noise assumptions: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (DomainError, Ar1FitError) as exc:
        print(f"ar1fit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
