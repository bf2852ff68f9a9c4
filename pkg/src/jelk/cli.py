"""Command-line interface.

Exit status: 0 when the computation finished (whatever the decision),
2 for input or validation errors, 3 when the solver did not converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import banknote
from .asymptotics import random_alpha, verify_wilks
from .baselines import (
    PermutationConfig,
    anderson_darling_ksample,
    kruskal_wallis,
    permutation_energy_test,
    reduce_univariate,
)
from .data import pairwise_distances
from .errors import ConvergenceError, JelkError
from .io import (
    format_record,
    read_banknote,
    read_dataset,
    records_to_csv,
    records_to_json,
    result_record,
)
from .jel import jel_test
from .simulation import parse_config, run_grid
from .stats import RngStream

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("jelk")


def _default_seed() -> int:
    raw = os.environ.get("JELK_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"JELK_SEED must be an integer, got {raw!r}")


def _methods(spec: str) -> list[str]:
    names = {"jel": "JEL-S", "energy": "ET", "kw": "KW", "ad": "AD"}
    out = []
    for part in spec.split(","):
        part = part.strip().lower()
        if part == "all":
            return list(names.values())
        if part not in names:
            raise argparse.ArgumentTypeError(f"unknown method {part!r}")
        out.append(names[part])
    return out


def run_tests(pooled, methods, alpha, permutations=199, seed=0, reduction="norm", variables=""):
    """Run the selected tests on one pooled dataset; returns report records."""
    dm = pairwise_distances(pooled.points) if {"JEL-S", "ET"} & set(methods) else None
    records = []
    for m in methods:
        if m == "JEL-S":
            res = jel_test(pooled, alpha, dm=dm)
        elif m == "ET":
            res = permutation_energy_test(pooled, PermutationConfig(permutations, RngStream(seed)), alpha, dm=dm)
        else:
            values = reduce_univariate(pooled.points, reduction)
            test = anderson_darling_ksample if m == "AD" else kruskal_wallis
            res = test(values, pooled.labels, alpha)
        records.append(result_record(res, variables))
    return records


def _emit(records, args):
    text = records_to_json(records) if args.json else "\n".join(format_record(r) for r in records)
    print(text)
    if args.out:
        out = Path(args.out)
        if out.suffix == ".csv":
            records_to_csv(records, out)
        else:
            out.write_text(text + "\n")


def cmd_test(args) -> int:
    if args.banknote_format:
        ds = read_banknote(args.file)
    else:
        ds = read_dataset(args.file, label_col=args.label_col, delimiter=args.delimiter)
    cols = [c.strip() for c in args.cols.split(",")] if args.cols else None
    names, _ = ds.select(cols)
    pooled = ds.to_pooled(cols)
    records = run_tests(pooled, args.method, args.alpha, args.permutations, args.seed,
                        args.reduction, ",".join(names))
    _emit(records, args)
    return EXIT_OK


def cmd_banknote(args) -> int:
    path = Path(args.data)
    if not path.exists():
        print(f"banknote data not found at {path}; run scripts/fetch_banknote.py", file=sys.stderr)
        return EXIT_INPUT
    ds = banknote.verify(path)
    records = []
    for label, cols in banknote.TABLE_ROWS:
        pooled = ds.to_pooled(cols)
        records += run_tests(pooled, args.method, args.alpha, args.permutations, args.seed,
                             args.reduction, label)
    _emit(records, args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    path = Path(args.config)
    seed = args.seed
    if seed is None and "JELK_SEED" in os.environ:
        seed = _default_seed()
    scenarios = parse_config(path.read_text(), seed=seed, reps=args.reps)

    def progress(i, total, row):
        rates = ", ".join(f"{m}={mr.rate:.3f}" for m, mr in row.rates.items()) or row.error
        print(f"[{i + 1}/{total}] {row.scenario.label()}: {rates} ({row.seconds:.1f}s)", file=sys.stderr)

    table = run_grid(scenarios, workers=args.workers, progress=progress)
    md = table.to_markdown()
    print(md, end="")
    print(f"wall time {table.metadata['wall_seconds']:.1f}s", file=sys.stderr)
    if args.out:
        prefix = Path(args.out)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{prefix}.csv").write_text(table.to_csv())
        Path(f"{prefix}.md").write_text(md)
        if not args.no_plot:
            from .plotting import plot_rates

            plot_rates(table, f"{prefix}.png")
    failed = [r for r in table.rows if r.error]
    return EXIT_INPUT if failed else EXIT_OK


def _parse_alpha(text: str) -> np.ndarray:
    try:
        return np.array([float(Fraction(p.strip())) for p in text.split(",")])
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse fractions from {text!r}")


def cmd_verify(args, parser) -> int:
    checks = []
    if args.random:
        rng = np.random.default_rng(args.seed)
        for _ in range(args.random):
            k = int(rng.integers(2, 7))
            checks.append(random_alpha(k, rng))
    else:
        if args.alpha is None:
            k = args.k or 2
            alpha = np.full(k, 1.0 / k)
        else:
            alpha = args.alpha
        if args.k is not None and args.k != alpha.size:
            parser.error(f"--k {args.k} does not match {alpha.size} fractions")
        if np.any(alpha <= 0) or abs(alpha.sum() - 1.0) > 1e-12:
            parser.error(f"fractions must be positive and sum to 1 (sum = {alpha.sum():.12g})")
        checks.append(alpha)
    ok_all = True
    for alpha in checks:
        c = verify_wilks(alpha)
        ok_all &= c.ok
        ev = " ".join(f"{e:.3g}" if abs(e) > 1e-12 else "0" for e in c.eigenvalues)
        print(f"K={alpha.size} alpha=({', '.join(f'{a:.4g}' for a in alpha)})  "
              f"eigenvalues=[{ev}]  trace={c.trace:.12g}  |A'W0A-A|={c.identity_residual:.2e}  "
              f"{'PASS' if c.ok else 'FAIL'}")
    return EXIT_OK if ok_all else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jelk", description="Jackknife empirical likelihood K-sample tests")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add_test_flags(sp):
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--method", type=_methods, default=["JEL-S"],
                        help="comma list of jel, energy, kw, ad, or all")
        sp.add_argument("--permutations", type=int, default=199)
        sp.add_argument("--seed", type=int, default=_default_seed())
        sp.add_argument("--reduction", choices=["norm", "first", "mean"], default="norm",
                        help="univariate reduction for kw/ad on multivariate data")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--out", help="also write the report here (.csv for delimited)")

    t = sub.add_parser("test", help="test homogeneity of the groups in a data file")
    t.add_argument("file")
    t.add_argument("--label-col", default=None, help="label column name or index (default: last)")
    t.add_argument("--cols", default=None, help="comma list of feature columns")
    t.add_argument("--delimiter", default=None)
    t.add_argument("--banknote-format", action="store_true",
                   help="headerless VW,SW,KW,EI,class file")
    add_test_flags(t)

    b = sub.add_parser("banknote", help="run every variable set of the banknote comparison")
    b.add_argument("--data", default=str(banknote.DEFAULT_PATH))
    add_test_flags(b)

    s = sub.add_parser("simulate", help="run a scenario grid")
    s.add_argument("config")
    s.add_argument("--out", help="output prefix for .csv, .md and .png")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=None,
                   help="override every scenario's seed (default: JELK_SEED, else the config)")
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--no-plot", action="store_true")

    v = sub.add_parser("verify", help="check the asymptotic matrix identities")
    v.add_argument("--k", type=int, default=None)
    v.add_argument("--alpha", type=_parse_alpha, default=None, help="comma list, fractions allowed")
    v.add_argument("--random", type=int, default=0, help="number of random fraction vectors")
    v.add_argument("--seed", type=int, default=_default_seed())
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "test":
            return cmd_test(args)
        if args.command == "banknote":
            return cmd_banknote(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_verify(args, parser)
    except ConvergenceError as exc:
        diag = json.dumps(exc.diagnostics, default=str)
        print(f"error: solver did not converge: {exc} {diag}", file=sys.stderr)
        return EXIT_SOLVER
    except (JelkError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
