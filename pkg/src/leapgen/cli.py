"""Command line front end: leapgen {sample,hist,tv,tv-height,gf,bench,selftest}."""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size list: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty size list")
    return out


def _common(p, size_list=False):
    p.add_argument("--class", dest="cls", default="motzkin",
                   help="motzkin, schroder, polya, phylo, mobile:K, schroder-mobile")
    if size_list:
        p.add_argument("--size", type=_sizes, required=True, help="size or comma-separated sizes")
    else:
        p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def _accel(p):
    p.add_argument("--mode", default="leap", choices=["leap", "rej", "single-pass"])
    p.add_argument("--accel-order", type=int, default=1, help="r for --mode rej")
    p.add_argument("--accel-a", type=float, default=0.5, help="a for --mode rej")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="leapgen", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw objects and print them one per line")
    _common(p)
    _accel(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--decomposition", action="store_true", help="also print core size and trials")

    p = sub.add_parser("hist", help="histogram of a statistic over many samples")
    _common(p)
    _accel(p)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--stat", default="core-size",
                   choices=["core-size", "height", "leaves", "cherries", "path-length", "deficit"])
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("tv", help="exact total variation distance of the leap law (walks)")
    _common(p, size_list=True)
    p.add_argument("--mode", default="leap", choices=["leap", "rej"])
    p.add_argument("--accel-order", type=int, default=1)
    p.add_argument("--accel-a", default="1/2")
    p.add_argument("--path", default="rational", choices=["rational", "float"])

    p = sub.add_parser("tv-height", help="exact distance between Motzkin height laws")
    _common(p, size_list=True)
    p.add_argument("--mode", default="leap", choices=["leap", "rej"])
    p.add_argument("--accel-order", type=int, default=1)
    p.add_argument("--accel-a", default="1/2")

    p = sub.add_parser("gf", help="counting series as JSON strings")
    _common(p)
    p.add_argument("--which", default="C", choices=["C", "B"],
                   help="C: the composed class, B: the inner class (trees)")

    p = sub.add_parser("bench", help="timing table of the leap sampler")
    p.add_argument("--class", dest="cls", default="motzkin")
    p.add_argument("--sizes", type=_sizes, required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb-rho", type=float, default=None, help=argparse.SUPPRESS)
    return ap


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _scheme(name):
    from .leap import get_scheme

    try:
        return get_scheme(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def cmd_sample(args) -> int:
    from .campaign import make_rng
    from .leap import leap_sample, rejection_leap_sample, single_pass_sample

    spec = _scheme(args.cls)
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if args.mode != "single-pass":
        spec.check_size(args.size)
    rng = make_rng(args.seed)
    lines = []
    for _ in range(args.count):
        if args.mode == "single-pass":
            o = single_pass_sample(spec, args.size, rng)
            text = o.object.serialize() if o.object else ""
            extra = f"size={o.size} deficit={o.deficit} k={o.core_size}"
        else:
            if args.mode == "rej":
                o = rejection_leap_sample(spec, args.size, args.accel_order, args.accel_a, rng)
            else:
                o = leap_sample(spec, args.size, rng)
            if o.object.size != args.size:
                raise AssertionError("sampled object has the wrong size")
            text = o.object.serialize()
            extra = f"k={o.core_size} trials={o.trials} draws={o.draws}"
        lines.append(f"{text}\t{extra}" if args.decomposition else text)
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_hist(args) -> int:
    from .campaign import Campaign, run_campaign
    from .stats import emit

    _scheme(args.cls)
    c = Campaign(cls=args.cls, n=args.size, count=args.count, seed=args.seed, mode=args.mode,
                 stat=args.stat, r=args.accel_order, a=args.accel_a, threads=args.threads)
    h = run_campaign(c)
    text = emit(h, args.format)
    _write(text, args.out)
    return EXIT_OK


def cmd_tv(args) -> int:
    from .exact import tv_exact, tv_rej_exact

    spec = _scheme(args.cls)
    if spec.kind != "walk":
        raise UsageError("exact distances are available for walk classes")
    rows = ["n,d_tv,{},arithmetic_path".format("sqrt_n_times_dtv" if args.mode == "leap" else "n_times_dtv_rej")]
    for n in args.size:
        spec.check_size(n)
        if args.mode == "leap":
            if args.path == "rational" and not spec.exact:
                raise UsageError(f"{spec.name} has no rational path; use --path float")
            d = float(tv_exact(spec, n, args.path))
            rows.append(f"{n},{d:.15e},{math.sqrt(n) * d:.12f},{args.path}")
        else:
            path = "mp" if args.path == "rational" else "float"
            res = tv_rej_exact(spec, n, args.accel_order, Fraction(args.accel_a), path=path)
            rows.append(f"{n},{res.value:.15e},{n * res.value:.12f},{path}")
    _write("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def cmd_tv_height(args) -> int:
    from .exact import tv_height

    if args.cls != "motzkin":
        raise UsageError("height laws are computed for Motzkin walks")
    rows = ["n,d_tv,n_times_dtv,arithmetic_path"]
    for n in args.size:
        d = float(tv_height(n, args.mode, args.accel_order, Fraction(args.accel_a)))
        rows.append(f"{n},{d:.15e},{n * d:.12f},{'rational' if args.mode == 'leap' else 'mp'}")
    _write("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def cmd_gf(args) -> int:
    from .exact import joint_counts
    from .families import get_family
    from .series import TruncatedSeries

    spec = _scheme(args.cls)
    N = args.size
    if spec.kind == "walk":
        if args.which == "B":
            s = TruncatedSeries([Fraction(c) for c in spec.b_coeffs(N)])
        else:
            s = TruncatedSeries([Fraction(sum(joint_counts(spec, n))) for n in range(N + 1)])
    else:
        fam = get_family(spec.name)
        s = fam.b_series(N) if args.which == "B" else fam.series(N)
    _write(json.dumps(s.to_strings()) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .campaign import bench, bench_csv

    _scheme(args.cls)
    rows = bench(args.cls, args.sizes, args.count, args.seed)
    _write(bench_csv(rows), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    checks = run_selftest(args.seed, args.perturb_rho)
    for c in checks:
        print(c.line())
    failed = sum(not c.ok for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_INVARIANT


COMMANDS = {"sample": cmd_sample, "hist": cmd_hist, "tv": cmd_tv, "tv-height": cmd_tv_height,
            "gf": cmd_gf, "bench": cmd_bench, "selftest": cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except (UsageError, ValueError) as exc:
        print(f"leapgen: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"leapgen: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssertionError, ArithmeticError, RuntimeError) as exc:
        print(f"leapgen: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
