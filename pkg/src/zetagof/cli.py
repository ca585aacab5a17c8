"""Command-line frontend: ``fit``, ``test``, ``simulate`` and ``eigen``.

Exit codes: 0 success / no rejection, 2 invalid input or parameters,
3 degenerate sample, 10 null hypothesis rejected.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import as_sample
from .errors import BracketError, DegenerateSample, ZetaGofError
from .estimation import fisher_information, log_likelihood, mle_fit
from .montecarlo import (
    SCHEMA_VERSION,
    BootstrapConfig,
    SimulationConfig,
    bootstrap_test,
    default_workers,
    parse_statistic,
    warp_speed_study,
)
from .spectral import CovarianceKernel, rayleigh_ritz

log = logging.getLogger("zetagof")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3
EXIT_REJECT = 10


class UsageError(ValueError):
    """Bad input file, config or flag value."""


# ---------------------------------------------------------------- file I/O

def parse_sample(text):
    """Parse a sample from one integer per line, or a CSV column headed ``x``."""
    rows = [ln.strip() for ln in text.splitlines()]
    rows = [r for r in rows if r and not r.startswith("#")]
    if not rows:
        raise UsageError("input contains no observations")
    if rows[0].lower() == "x" or "," in rows[0]:
        reader = csv.DictReader(io.StringIO("\n".join(rows)), skipinitialspace=True)
        if reader.fieldnames is None or "x" not in reader.fieldnames:
            raise UsageError('CSV input needs a column headed "x"')
        rows = [(r["x"] or "").strip() for r in reader]
        if not rows:
            raise UsageError("input contains no observations")
    try:
        vals = [int(r) for r in rows]
    except ValueError as exc:
        raise UsageError(f"not an integer: {exc}") from None
    try:
        return as_sample(vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_sample(path):
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_sample(text)


def format_sample(sample, fmt="lines"):
    """Serialize a sample in either input format (``lines`` or ``csv``)."""
    x = np.asarray(sample, dtype=np.int64)
    body = "\n".join(str(int(v)) for v in x) + "\n"
    if fmt == "csv":
        return "x\n" + body
    if fmt == "lines":
        return body
    raise UsageError(f"unknown sample format {fmt!r}")


def write_sample(path, sample, fmt="lines"):
    Path(path).write_text(format_sample(sample, fmt), encoding="utf-8")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


# ---------------------------------------------------------------- commands

def cmd_fit(args):
    x = read_sample(args.input)
    res = mle_fit(x, args.s_max)
    n = x.size
    report = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "n": int(n),
        "s_hat": res.s_hat,
        "std_error": 1.0 / math.sqrt(n * fisher_information(res.s_hat)),
        "log_likelihood": log_likelihood(x, res.s_hat),
        "iterations": res.iterations,
    }
    if args.format == "json":
        print(_dump(report))
    else:
        print(f"s_hat          {report['s_hat']:.10g}")
        print(f"std_error      {report['std_error']:.6g}")
        print(f"log_likelihood {report['log_likelihood']:.10g}")
        print(f"n              {n}")
    return EXIT_OK


def cmd_test(args):
    try:
        kind = parse_statistic(args.stat)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    x = read_sample(args.input)
    cfg = BootstrapConfig(b=args.b, alpha=args.alpha, master_seed=args.seed, s_max=args.s_max)
    out = bootstrap_test(x, kind, cfg)
    d = dict(out.to_dict(), version=__version__, n=int(x.size))
    if args.format == "json":
        print(_dump(d))
    else:
        keys = list(d)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        w.writerow([repr(d[k]) if isinstance(d[k], float) else d[k] for k in keys])
        sys.stdout.write(buf.getvalue())
    return EXIT_REJECT if out.reject else EXIT_OK


_SIM_KEYS = {"n", "replications", "alternatives", "statistics", "alpha", "seed",
             "master_seed", "s_max", "full_scale", "workers"}


def load_simulation_config(path, threads=None, seed=None):
    """Read a JSON study design into a :class:`SimulationConfig`."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(raw) - _SIM_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    kw = dict(raw)
    if "seed" in kw:
        kw["master_seed"] = kw.pop("seed")
    if seed is not None:
        kw["master_seed"] = seed
    for key in ("alternatives", "statistics"):
        if key in kw:
            if not isinstance(kw[key], list):
                raise UsageError(f"{key} must be a list")
            kw[key] = tuple(kw[key])
    if threads is not None:
        kw["workers"] = threads
    elif "workers" not in kw:
        kw["workers"] = default_workers()
    try:
        return SimulationConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from None


def cmd_simulate(args):
    cfg = load_simulation_config(args.config, args.threads, args.seed)
    table = warp_speed_study(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "power.csv").write_text(table.to_csv(), encoding="utf-8")
    (out / "power.json").write_text(_dump(table.to_dict()) + "\n", encoding="utf-8")
    for i, alt in enumerate(table.alternatives):
        for j, stat in enumerate(table.statistics):
            log.info("%s / %s: %.2f%% (se %.2f)", alt, stat, table.rates[i, j], table.se[i, j])
    for alt in table.flagged:
        log.warning("%s: more than 1%% of fits hit the s_max cap", alt)
    log.info("finished in %.2f s with %d worker(s)", table.metadata["duration_s"], cfg.workers)
    print(str(out / "power.csv"))
    return EXIT_OK


def cmd_eigen(args):
    try:
        kernel = CovarianceKernel(args.s0, args.beta)
        res = rayleigh_ritz(kernel, args.dim, args.quad_order)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    d = dict(res.to_dict(), version=__version__)
    text = _dump(d) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="zetagof", description="Goodness-of-fit tests for the Zeta distribution.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="maximum likelihood fit of the Zeta shape")
    f.add_argument("input")
    f.add_argument("--s-max", type=float, default=50.0)
    f.add_argument("--format", choices=("text", "json"), default="text")
    f.set_defaults(func=cmd_fit)

    t = sub.add_parser("test", help="parametric bootstrap goodness-of-fit test")
    t.add_argument("input")
    t.add_argument("--stat", default="stein:0")
    t.add_argument("--b", type=_positive_int, default=500)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--s-max", type=float, default=50.0)
    t.add_argument("--format", choices=("json", "csv"), default="json")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="warp-speed power study")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes (default: $GOF_THREADS or 1)")
    s.add_argument("--seed", type=int, default=None, help="override the config seed")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("eigen", help="eigenvalues of the limiting covariance operator")
    e.add_argument("--s0", type=float, required=True)
    e.add_argument("--beta", type=float, default=0.0)
    e.add_argument("--dim", type=_positive_int, default=20)
    e.add_argument("--quad-order", type=_positive_int, default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_eigen)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except DegenerateSample as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except BracketError as exc:
        print(f"error: degenerate sample: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (UsageError, ZetaGofError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
