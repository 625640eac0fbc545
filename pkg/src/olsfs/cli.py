"""Command-line entry point: ``olsfs select|verify|bench|synth``.

Exit codes are 0 on success, 1 for usage errors, 2 for data errors and 3
when a verification check fails.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .dataset import (
    CATEGORICAL,
    DISCRETIZE_SCHEMES,
    DataError,
    encode_response_binomial,
    encode_response_multinomial,
    feature_blocks,
    load_csv,
)
from .oracle import definition_greedy_select
from .selector import select_categorical, select_multinomial
from .synth import (
    BINOMIAL,
    METHODS,
    MULTINOMIAL,
    SyntheticConfig,
    config_from_text,
    run_recovery_trials,
)
from .verify import DESCRIPTIONS, run_all

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

BENCH_METHODS = ("ols", "definition")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _int_list(text):
    try:
        out = [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("values must be >= 1")
    return out


def _method_list(text):
    out = [v for v in text.replace(",", " ").split()]
    bad = [v for v in out if v not in BENCH_METHODS]
    if not out or bad:
        raise argparse.ArgumentTypeError(f"choose from {', '.join(BENCH_METHODS)}")
    return out


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("SOCC_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"SOCC_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise UsageError(f"SOCC_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_parser():
    p = _Parser(prog="olsfs", description="Greedy OLS feature selection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("select", help="select features from a CSV file")
    s.add_argument("--input", required=True, help="CSV file with a header row")
    s.add_argument("--label", required=True, help="name of the class-label column")
    s.add_argument("--num-features", required=True, type=_positive, dest="t")
    s.add_argument("--method", choices=METHODS, default="ols")
    s.add_argument("--categorical", action="append", default=[], metavar="COLUMN",
                   help="treat COLUMN as categorical (repeatable)")
    s.add_argument("--discretize", choices=DISCRETIZE_SCHEMES,
                   help="bin numeric columns (the olsd method defaults to mean-std-4)")
    s.add_argument("--output", help="write the JSON report here")
    s.add_argument("--delimiter", default=",")

    v = sub.add_parser("verify", help="randomised identity checks")
    v.add_argument("--trials", type=_positive, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-n", type=_positive, default=10)
    v.add_argument("--max-m", type=_positive, default=4)
    v.add_argument("--inject-degenerate", action="store_true",
                   help="append a duplicated column to every design")

    b = sub.add_parser("bench", help="time OLS against definition-based greedy")
    b.add_argument("--N", type=_positive, default=300)
    b.add_argument("--n", type=_positive, default=5000)
    b.add_argument("--t-list", type=_int_list, default=[1, 10, 20])
    b.add_argument("--method-list", type=_method_list, default=list(BENCH_METHODS))
    b.add_argument("--reps", type=_positive, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--output", help="write the CSV here instead of standard output")

    y = sub.add_parser("synth", help="synthetic recovery experiment")
    y.add_argument("--mode", choices=(BINOMIAL, MULTINOMIAL), default=BINOMIAL)
    y.add_argument("--trials", type=_positive)
    y.add_argument("--seed", type=int)
    y.add_argument("--method", choices=METHODS, default="ols")
    y.add_argument("--threads", type=_positive)
    y.add_argument("--config", help="file of 'key = value' overrides")
    return p


def _run_selection(features, labels, t, method, discretize):
    if t > features.n:
        raise UsageError(f"--num-features {t} exceeds the {features.n} available features")
    Y = encode_response_multinomial(labels)
    names = list(features.names)
    has_cat = CATEGORICAL in features.kinds
    if method == "olsd":
        blocks = feature_blocks(features, discretize or "mean-std-4")
        return select_categorical(blocks, Y, t, names=names)
    if has_cat or discretize:
        blocks = feature_blocks(features, discretize)
        if method == "ols":
            return select_categorical(blocks, Y, t, names=names, method="ols")
        return definition_greedy_select(blocks, Y, t, names=names)
    if method == "ols":
        return select_multinomial(features, Y, t, names=names)
    return definition_greedy_select(features, Y, t, names=names)


def cmd_select(args, out=None):
    out = out or sys.stdout
    timings = {}
    t0 = time.perf_counter()
    features, labels = load_csv(args.input, args.label, args.categorical, args.delimiter)
    digest = _sha256(args.input)
    timings["load_ms"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    report = _run_selection(features, labels, args.t, args.method, args.discretize)
    timings["select_ms"] = 1e3 * (time.perf_counter() - t0)

    body = report.to_dict()
    manifest = {
        "command": "select",
        "input": {"path": os.fspath(args.input), "sha256": digest},
        "config": {
            "label": args.label,
            "num_features": args.t,
            "method": args.method,
            "categorical": list(args.categorical),
            "discretize": args.discretize,
            "delimiter": args.delimiter,
        },
        "version": __version__,
        "status": report.status,
        "timings_ms": timings,
    }
    doc = {"manifest": manifest, **body}
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    width = max([len(s.name) for s in report.steps] + [7])
    print(f"{'step':>4}  {'feature':<{width}}  {'column':>6}  {'gain':>10}  {'cumulative':>10}",
          file=out)
    for k, s in enumerate(report.steps, start=1):
        print(f"{k:>4}  {s.name:<{width}}  {s.index + 1:>6}  {s.gain:>10.4f}  "
              f"{s.cumulative:>10.4f}", file=out)
    if report.dropped:
        dropped = ", ".join(features.names[i] for i in report.dropped)
        print(f"dependent or constant: {dropped}", file=out)
    if report.status != "complete":
        print(f"status: {report.status} ({len(report.steps)} of {args.t} selected)", file=out)
    return EXIT_OK


def cmd_verify(args, out=None):
    out = out or sys.stdout
    results = run_all(args.trials, args.seed, args.max_n, args.max_m,
                      degenerate=args.inject_degenerate)
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.name:<22} max discrepancy {r.max_discrepancy:.3e} "
              f"(tolerance {r.tolerance:.0e}, {r.instances} instances)  "
              f"{DESCRIPTIONS[r.name]}", file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def bench_data(N, n, seed):
    """Gaussian features with a binomial logistic response on the first three."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, n))
    eta = X[:, : min(3, n)] @ np.array([-2.0, -3.0, 4.0])[: min(3, n)]
    y = (rng.uniform(size=N) < 1.0 / (1.0 + np.exp(-eta))).astype(int)
    return X, encode_response_binomial(y)


def bench_rows(N, n, t_list, methods, reps, seed):
    X, Y = bench_data(N, n, seed)
    rows = []
    for method in methods:
        for t in t_list:
            if t > n:
                raise UsageError(f"t={t} exceeds n={n}")
            run = select_multinomial if method == "ols" else definition_greedy_select
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                run(X, Y, t)
                times.append(1e3 * (time.perf_counter() - t0))
            rows.append({
                "method": method, "N": N, "n": n, "t": t,
                "median_ms": float(np.median(times)), "min_ms": float(np.min(times)),
            })
    return rows


def cmd_bench(args, out=None):
    out = out or sys.stdout
    if args.reps < 3:
        raise UsageError("--reps must be >= 3")
    rows = bench_rows(args.N, args.n, args.t_list, args.method_list, args.reps, args.seed)
    fields = ["method", "N", "n", "t", "median_ms", "min_ms"]
    if args.output:
        fh = open(args.output, "w", newline="", encoding="utf-8")
    else:
        fh = out
    try:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "median_ms": f"{r['median_ms']:.3f}", "min_ms": f"{r['min_ms']:.3f}"})
    finally:
        if fh is not out:
            fh.close()
    return EXIT_OK


def cmd_synth(args, out=None):
    out = out or sys.stdout
    base = SyntheticConfig.multinomial() if args.mode == MULTINOMIAL else SyntheticConfig.binomial()
    cfg = base
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = config_from_text(fh.read(), base=base)
        except OSError as exc:
            raise DataError(f"{args.config}: {exc.strerror}") from None
        except ValueError as exc:
            raise DataError(f"{args.config}: {exc}") from None
    overrides = {k: v for k, v in (("trials", args.trials), ("seed", args.seed)) if v is not None}
    cfg = cfg.with_(**overrides)
    result = run_recovery_trials(cfg, args.method, threads=_threads(args.threads))
    print(f"mode: {cfg.mode}  method: {args.method}  seed: {cfg.seed}", file=out)
    print(f"successes: {result.successes}/{result.trials}", file=out)
    for k in result.failures:
        print(f"  trial {k}: selected {list(result.selected[k])}, "
              f"expected {list(cfg.active)}", file=out)
    return EXIT_OK


COMMANDS = {"select": cmd_select, "verify": cmd_verify, "bench": cmd_bench, "synth": cmd_synth}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"olsfs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"olsfs: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
