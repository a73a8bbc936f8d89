"""``parkfn`` command line.

Every command writes a ``#``-prefixed metadata header (version, seed, resolved
options) followed by CSV, or with ``--format json`` a metadata object and one
JSON object per row.  Errors go to stderr as ``error: <kind>: <message>`` with
exit code 1; usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Iterable, Sequence
from fractions import Fraction
from typing import TextIO

import numpy as np

from . import __version__
from .exact import nk_pmf, pi1_law
from .harness import (
    CSV_COLUMNS,
    ConfigError,
    append_reports,
    chunked,
    default_config_path,
    load_config_file,
    run_experiment,
    sample_pf,
    sample_pf_batch,
)
from .limits import (
    borel_pmf,
    continuous_law,
    dh_corner,
    lambda_c,
    law_Ysum,
    law_Zsum,
)
from .mallows import QSchedule, expected_inversions
from .parking import enumerate_parking, format_pf, is_parking, parking_count, parse_pf
from .rng import random_stream
from .tvbound import BoundSpec, all_event_sets, bound_grid, minimize_bound


class Output:
    def __init__(self, stream: TextIO, fmt: str, meta: dict):
        self.stream = stream
        self.fmt = fmt
        self.columns: Sequence[str] | None = None
        meta = {"version": __version__, **meta}
        if fmt == "json":
            stream.write(json.dumps({"meta": meta}, default=str) + "\n")
        else:
            for key, val in meta.items():
                stream.write(f"# {key}={json.dumps(val, default=str) if isinstance(val, (dict, list)) else val}\n")

    def header(self, columns: Sequence[str]) -> None:
        self.columns = list(columns)
        if self.fmt == "csv" and self.columns:
            self.stream.write(",".join(self.columns) + "\n")

    def row(self, values: Sequence) -> None:
        if self.fmt == "json":
            rec = {c: _jsonable(v) for c, v in zip(self.columns, values)}
            self.stream.write(json.dumps(rec) + "\n")
        else:
            self.stream.write(",".join(_csv_cell(v) for v in values) + "\n")

    def footer(self, text: str) -> None:
        if self.fmt == "json":
            self.stream.write(json.dumps({"footer": text}) + "\n")
        else:
            self.stream.write(text + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _schedule(text: str) -> QSchedule:
    try:
        return QSchedule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _exact_q(text: str, sched: QSchedule, n: int) -> Fraction:
    """Rational value of the schedule at ``n`` (decimal literals kept exact)."""
    s = text.replace(" ", "")
    s = s[2:] if s.startswith("q=") else s
    if sched.kind == "fixed":
        return Fraction(s)
    c = Fraction(str(abs(sched.c))) * (1 if sched.c >= 0 else -1)
    if sched.kind == "one_plus_c_over_n":
        return 1 + c / n
    raise ValueError("rational mode supports fixed q and 1+c/n schedules only")


def _resolve_k(args, n: int) -> int:
    rule = args.k_rule
    if rule == "fixed":
        k = args.k
    elif rule == "alpha":
        k = math.floor(n**args.k_param)
    elif rule == "dn":
        k = math.floor(args.k_param * n)
    elif rule == "top":
        k = n - args.k
    else:
        k = math.floor(args.k_param * math.log2(n))
    if k is None or not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    return int(k)


# ------------------------------------------------------------------ commands

def cmd_sample(args, out: TextIO) -> int:
    sched = args.q
    q = sched(args.n)
    o = Output(out, args.format, {"command": "sample", "seed": args.seed, "n": args.n,
                                  "q": str(sched), "q_resolved": q, "count": args.count,
                                  "method": args.method})
    o.header([f"x{i}" for i in range(1, args.n + 1)] if args.format == "json" else [])
    if args.method == "full":
        rng = random_stream(args.seed)
        rows = (sample_pf(args.n, q, rng).prefs for _ in range(args.count))
    else:
        chunk = max(1, 1_000_000 // args.n)
        arr = chunked(lambda r, m: sample_pf_batch(args.n, q, r, m), args.count, args.seed, chunk)
        rows = (tuple(r) for r in arr.tolist())
    for pf in rows:
        if args.format == "json":
            out.write(json.dumps({"pf": list(pf)}) + "\n")
        else:
            out.write(format_pf(pf) + "\n")
    return 0


def cmd_exact(args, out: TextIO) -> int:
    n = args.n
    sched = args.q
    q = _exact_q(args.q_text, sched, n) if args.rational else sched(n)
    meta = {"command": "exact", "seed": None, "n": n, "q": str(sched), "q_resolved": q,
            "stat": args.stat, "rational": args.rational}
    if args.stat == "pi1":
        law = pi1_law(n, q)
        cols = ["k", "prob"]
    else:
        k = _resolve_k(args, n)
        meta["k_resolved"] = k
        law = nk_pmf(n, q, k)
        cols = ["m", "prob"]
    o = Output(out, args.format, meta)
    o.header(cols)
    for s, p in zip(law.support, law.probs):
        o.row([s, p if args.rational else float(p)])
    return 0


def cmd_limit(args, out: TextIO) -> int:
    law = args.law
    meta = {"command": "limit", "seed": None, "law": law, "tol": args.tol}
    if law in ("zsum", "ysum"):
        if args.q is None:
            raise ValueError(f"law {law} needs --q")
        q = args.q(1) if args.q.kind == "fixed" else None
        if q is None:
            raise ValueError("limit laws need a fixed q")
        if law == "zsum":
            pmf, tb = law_Zsum(q, args.k, args.tol)
            meta.update(q=q, k=args.k)
        else:
            kmax = math.inf if args.kmax is None else args.kmax
            pmf, tb = law_Ysum(q, kmax, args.tol)
            meta.update(q=q, kmax=kmax)
        meta.update(truncation=tb.truncation, tail_bound=tb.bound)
        o = Output(out, args.format, meta)
        o.header(["m", "prob"])
        for s, p in zip(pmf.support, pmf.probs):
            o.row([s, float(p)])
        return 0
    if law == "borel":
        o = Output(out, args.format, meta)
        o.header(["j", "prob"])
        for j in range(1, args.kmax + 1 if args.kmax else 11):
            o.row([j, borel_pmf(j)])
        return 0
    if law == "dh_corner":
        o = Output(out, args.format, meta)
        o.header(["k", "low", "high"])
        for k in range(1, (args.kmax or 5) + 1):
            o.row([k, dh_corner(k, "low"), dh_corner(k, "high")])
        return 0
    if law == "lambda_c":
        meta.update(c=args.c, d=args.d)
        o = Output(out, args.format, meta)
        o.header(["c", "d", "lambda"])
        o.row([args.c, args.d, lambda_c(args.c, args.d)])
        return 0
    params = {"c": args.c} if law in ("Fc", "exponential") else {}
    cl = continuous_law(law, **params)
    meta.update(params)
    o = Output(out, args.format, meta)
    o.header(["x", "cdf"])
    upper = 5.0 if math.isinf(cl.upper) else cl.upper
    for x in np.linspace(0.0, upper, args.points):
        o.row([float(x), cl.cdf(float(x))])
    return 0


def cmd_gof(args, out: TextIO) -> int:
    path = args.config or default_config_path()
    cfgs = load_config_file(path)
    if args.seed is not None:
        import dataclasses
        cfgs = [dataclasses.replace(c, seed=args.seed) for c in cfgs]
    if args.only:
        cfgs = [c for c in cfgs if c.name in set(args.only)]
        if not cfgs:
            raise ValueError(f"no experiment named {args.only}")
    o = Output(out, args.format, {"command": "gof", "seed": args.seed, "config": path,
                                  "experiments": [c.describe() for c in cfgs]})
    o.header(CSV_COLUMNS)
    reports = []
    for c in cfgs:
        r = run_experiment(c)
        reports.append(r)
        o.row(list(r.row().values()))
    if args.append:
        append_reports(args.append, reports)
    return 0


def cmd_enumerate(args, out: TextIO) -> int:
    o = Output(out, args.format, {"command": "enumerate", "seed": None, "n": args.n})
    count = 0
    for pf in enumerate_parking(args.n, unsafe_large=args.unsafe_large):
        count += 1
        if not args.count_only:
            if args.format == "json":
                out.write(json.dumps({"pf": list(pf)}) + "\n")
            else:
                out.write(format_pf(pf) + "\n")
    expected = parking_count(args.n)
    o.footer(f"count={count} expected={expected}")
    return 0 if count == expected else 1


def cmd_validate(args, out: TextIO, stdin: TextIO) -> int:
    status = 0
    for lineno, line in enumerate(stdin, 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            prefs = parse_pf(line)
            ok = is_parking(prefs)
        except ValueError:
            ok = False
        if args.format == "json":
            out.write(json.dumps({"line": lineno, "valid": ok}) + "\n")
        else:
            out.write(("true" if ok else "false") + "\n")
    return status


def _parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"range must be lo:hi, got {text!r}")
    return float(lo), float(hi)


def _parse_events(text: str) -> frozenset[int]:
    try:
        return frozenset(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad event set {text!r}") from None


def cmd_tvbound(args, out: TextIO) -> int:
    lo, hi = args.range
    sets = all_event_sets() if args.all else [args.A]
    o = Output(out, args.format, {"command": "tvbound", "seed": None, "range": [lo, hi],
                                  "include_nn": not args.no_nn, "step": args.step,
                                  "A": [sorted(s) for s in sets]})
    results = []
    if not args.summary_only:
        o.header(["A", "q", "bound"])
        qs = np.arange(lo, hi + args.step / 2, args.grid_step)
    for ev in sets:
        spec = BoundSpec(ev, not args.no_nn, (lo, hi))
        if not args.summary_only:
            for q, b in zip(qs, bound_grid(spec, qs)):
                o.row([spec.label(), float(q), float(b)])
        results.append(minimize_bound(spec, (lo, hi), step=args.step))
    o.header(["A", "q_star", "value"])
    for r in results:
        o.row([r.spec.label(), r.q_star, r.value])
    return 0


def cmd_regimes(args, out: TextIO) -> int:
    o = Output(out, args.format, {"command": "regimes", "seed": None,
                                  "schedules": [str(s) for s in args.q], "n": args.n_list})
    o.header(["schedule", "n", "q", "expected_inversions", "ratio_to_uniform"])
    for sched in args.q:
        for n in args.n_list:
            q = sched(n)
            e = expected_inversions(n, q)
            base = n * (n - 1) / 4
            o.row([str(sched), n, q, e, e / base if base else 1.0])
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parkfn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"parkfn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("sample", help="draw parking functions")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-q", "--q", type=_schedule, default=QSchedule.fixed(1.0))
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--method", choices=("batch", "full"), default="batch",
                    help="batch: vectorised code draws; full: permutation pair per draw")
    common(sp, seed=True)

    sp = sub.add_parser("exact", help="exact law of pi_1 or N_k")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-q", "--q", dest="q_text", default="1")
    sp.add_argument("--stat", choices=("pi1", "nk"), default="pi1")
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--k-rule", choices=("fixed", "alpha", "dn", "top", "log"), default="fixed")
    sp.add_argument("--k-param", type=float, default=0.5)
    sp.add_argument("--rational", action="store_true")
    common(sp)

    sp = sub.add_parser("limit", help="evaluate a limit law")
    sp.add_argument("--law", required=True, choices=("q1", "Fc", "exponential", "uniform", "zsum",
                                                     "ysum", "borel", "dh_corner", "lambda_c"))
    sp.add_argument("-q", "--q", type=_schedule, default=None)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--kmax", type=int, default=None)
    sp.add_argument("-c", type=float, default=1.0)
    sp.add_argument("-d", type=float, default=0.5)
    sp.add_argument("--points", type=int, default=11)
    sp.add_argument("--tol", type=float, default=1e-12)
    common(sp)

    sp = sub.add_parser("gof", help="run Monte Carlo goodness-of-fit experiments")
    sp.add_argument("config", nargs="?", default=None, help="TOML config (default: shipped acceptance config)")
    sp.add_argument("--only", nargs="*", default=None)
    sp.add_argument("--append", default=None, help="also append report rows to this CSV file")
    sp.add_argument("--seed", type=int, default=None, help="override every experiment's seed")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("enumerate", help="list all parking functions of length n")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--count-only", action="store_true")
    sp.add_argument("--unsafe-large", action="store_true")
    common(sp)

    sp = sub.add_parser("validate", help="check parking-function lines from stdin")
    common(sp)

    sp = sub.add_parser("tvbound", help="lower bounds on the limiting TV distance")
    sp.add_argument("--A", type=_parse_events, default=frozenset({2}))
    sp.add_argument("--all", action="store_true", help="scan all 15 event sets")
    sp.add_argument("--range", type=_parse_range, default=(1.01, 10.0))
    sp.add_argument("--step", type=float, default=1e-3)
    sp.add_argument("--grid-step", type=float, default=0.01, help="spacing of the printed grid")
    sp.add_argument("--no-nn", action="store_true")
    sp.add_argument("--summary-only", action="store_true")
    common(sp)

    sp = sub.add_parser("regimes", help="expected inversions over q-schedules")
    sp.add_argument("-q", "--q", type=_schedule, action="append", required=True)
    sp.add_argument("-n", dest="n_list", type=int, nargs="+", default=[10, 100, 1000])
    common(sp)
    return p


def main(argv: Iterable[str] | None = None, stdout: TextIO | None = None,
         stdin: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)
    try:
        if args.command == "exact":
            args.q = _schedule(args.q_text)
        if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
            raise ValueError(f"n must be >= 1, got {args.n}")
        if args.command == "sample" and args.count < 1:
            raise ValueError("--count must be >= 1")
        if args.command == "validate":
            return cmd_validate(args, out, stdin or sys.stdin)
        handler = {"sample": cmd_sample, "exact": cmd_exact, "limit": cmd_limit, "gof": cmd_gof,
                   "enumerate": cmd_enumerate, "tvbound": cmd_tvbound, "regimes": cmd_regimes}
        return handler[args.command](args, out)
    except ConfigError as exc:
        sys.stderr.write(f"error: config: {exc}\n")
        return 1
    except argparse.ArgumentTypeError as exc:
        sys.stderr.write(f"error: usage: {exc}\n")
        return 2
    except (ValueError, OverflowError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: io: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
