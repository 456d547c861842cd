"""Command line entry point ``bench``."""
import argparse
import csv
import sys

from ..errors import AspgmError
from . import serialize
from .algorithms import parse_algorithm
from .config import default_suite, load_suite
from .profile import performance_profile, profile_rows
from .serialize import format_float
from .runner import build_problem, cached_reference, run_cell, run_suite


def _progress(i, n):
    print(f"[{i}/{n}] problems done", file=sys.stderr, flush=True)


def cmd_run(args):
    config = load_suite(args.suite) if args.suite else default_suite()
    if args.budget is not None:
        config.budget = args.budget
    records = run_suite(config, jobs=args.jobs, seed=args.seed, cache_dir=args.cache,
                        timing=not args.no_timing, progress=None if args.quiet else _progress)
    serialize.emit(records, args.format, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_profile(args):
    records = serialize.read_csv(args.inp)
    thetas, table = performance_profile(records, args.acc)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "algorithm_id", "fraction"])
        for th, alg, fr in profile_rows(thetas, table):
            w.writerow([format_float(th), alg, format_float(fr)])
    print(f"wrote profile for {len(table)} algorithms to {args.out}")
    return 0


def cmd_single(args):
    parse_algorithm(args.alg)
    desc = ("synthetic", args.family, args.d, args.kappa, args.spectrum, args.instance_seed)
    inst = build_problem(desc)
    fstar, flag = cached_reference(inst, args.cache)
    accs = sorted(set(args.acc), reverse=True)
    recs = run_cell(inst, args.alg, accs, args.budget, fstar, flag, args.seed,
                    timing=not args.no_timing)
    sys.stdout.write(serialize.to_csv(recs))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="bench", description="Benchmark harness for the solvers.")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a suite and write records")
    r.add_argument("--suite", help="suite file (default: built-in desk-scale suite)")
    r.add_argument("--out", required=True)
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--seed", type=int, default=0, help="seed for randomized algorithm steps")
    r.add_argument("--budget", type=int, help="override the suite's oracle budget")
    r.add_argument("--cache", help="directory for cached reference optima")
    r.add_argument("--no-timing", action="store_true", help="write wall times as nan")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    pr = sub.add_parser("profile", help="performance profile from a CSV of records")
    pr.add_argument("--in", dest="inp", required=True)
    pr.add_argument("--acc", type=float, required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_profile)

    s = sub.add_parser("single", help="one synthetic instance, one algorithm")
    s.add_argument("--family", required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--kappa", type=float, required=True)
    s.add_argument("--spectrum", choices=("uniform", "bimodal"), required=True)
    s.add_argument("--alg", required=True)
    s.add_argument("--acc", type=float, nargs="+", default=[1e-4, 1e-7, 1e-10])
    s.add_argument("--budget", type=int, default=3000)
    s.add_argument("--instance-seed", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cache")
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=cmd_single)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AspgmError, ValueError, OSError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
