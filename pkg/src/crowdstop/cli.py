"""Command-line entry point: ``crowdstop {sweep,gold,gen-workload,compare-curves}``.

Exit status is 0 on success, 2 for configuration errors and 1 for runtime
failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from typing import Optional, Sequence

from . import harness
from .config import load_config, with_overrides
from .curves import compare_curves, lies_below
from .harness import ConfigError, SweepSpec
from .workload import (
    GroupTableSpec,
    QualityDistSpec,
    UniformBiasSpec,
    dump_hits_csv,
    dump_workers_csv,
    gen_group_table,
    gen_uniform_bias,
    sample_quality,
)

log = logging.getLogger("crowdstop")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _spec(args, default: SweepSpec) -> SweepSpec:
    plan = load_config(args.config) if args.config else default
    return with_overrides(plan, seed=args.seed, replications=getattr(args, "replications", None),
                          jobs=getattr(args, "jobs", None))


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write {out}: {e.strerror or e}") from e


def cmd_sweep(args) -> int:
    plan = _spec(args, SweepSpec())
    if isinstance(plan.workload, QualityDistSpec):
        raise ConfigError("sweep needs a uniform or table workload; use 'gold' for quality workloads")
    _write(harness.format_csv(harness.run_sweep(plan)), args.out)
    return EXIT_OK


def cmd_gold(args) -> int:
    plan = _spec(args, SweepSpec(workload=QualityDistSpec(), epsilons=(0.0, 0.05, 0.1)))
    records = [] if args.records else None
    results = harness.run_gold_comparison(plan, records)
    _write(harness.format_csv(results), args.out)
    if records is not None:
        harness.emit_gold_records(records, args.records)
    return EXIT_OK


def cmd_gen_workload(args) -> int:
    plan = _spec(args, SweepSpec())
    seed, w = plan.seed, plan.workload
    out = args.out or sys.stdout
    if isinstance(w, UniformBiasSpec):
        dump_hits_csv(gen_uniform_bias(w, seed), out)
    elif isinstance(w, GroupTableSpec):
        table = gen_group_table(w, seed)
        dump_hits_csv(table.hits, out)
        if args.workers:
            dump_workers_csv(table.worker_group, 1.0 - table.errors.mean(axis=1)[table.worker_group], args.workers)
    else:
        dump_workers_csv(None, sample_quality(w, seed), args.workers or out)
    return EXIT_OK


def _curve(text: str) -> tuple[str, float]:
    scheme, sep, eps = text.rpartition(":")
    if not sep or not scheme:
        raise argparse.ArgumentTypeError(f"expected SCHEME:EPSILON, got {text!r}")
    try:
        return scheme, float(eps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon in {text!r}") from None


def cmd_compare(args) -> int:
    try:
        results = harness.read_csv(args.results)
    except ValueError as e:
        raise ConfigError(f"{args.results}: {e}") from None
    matched = compare_curves(results, args.a, args.b, args.error_min, args.error_max, args.grid)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["error_rate", "cost_a", "cost_b", "diff", "se"])
        for m in matched:
            w.writerow([f"{m.error_rate:.6g}", f"{m.cost_a:.6g}", f"{m.cost_b:.6g}", f"{m.diff:.6g}", f"{m.se:.6g}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    below = lies_below(matched, args.n_se)
    print(f"{args.a[0]}:{args.a[1]:g} below {args.b[0]}:{args.b[1]:g} "
          f"at {len(matched)} matched points: {'yes' if below else 'no'}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crowdstop", description="Adaptive stopping rules for crowdsourced labels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, replications=True):
        sp.add_argument("--config", metavar="PATH", help="experiment config file")
        sp.add_argument("--seed", type=int, metavar="N", help="override the config seed")
        sp.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
        if replications:
            sp.add_argument("--replications", type=int, metavar="N", help="override the replication count")
            sp.add_argument("--jobs", type=int, metavar="N", help="worker processes for sweep points")

    sp = sub.add_parser("sweep", help="varying-C curves on a uniform or table workload")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gold", help="index-based vs random routing for gold HITs")
    common(sp)
    sp.add_argument("--records", metavar="PATH", help="also write per-HIT gold records")
    sp.set_defaults(func=cmd_gold)

    sp = sub.add_parser("gen-workload", help="dump a generated workload as CSV")
    common(sp, replications=False)
    sp.add_argument("--workers", metavar="PATH", help="worker CSV (groups or success rates)")
    sp.set_defaults(func=cmd_gen_workload)

    sp = sub.add_parser("compare-curves", help="compare two curves of a results CSV at matched error rates")
    sp.add_argument("results", metavar="RESULTS_CSV")
    sp.add_argument("--a", type=_curve, required=True, metavar="SCHEME:EPS", help="curve expected to be cheaper")
    sp.add_argument("--b", type=_curve, required=True, metavar="SCHEME:EPS", help="reference curve")
    sp.add_argument("--error-min", type=float, default=0.05)
    sp.add_argument("--error-max", type=float, default=0.15)
    sp.add_argument("--grid", type=int, default=21, help="matched error rates in the range")
    sp.add_argument("--n-se", type=float, default=2.0, help="required margin in standard errors")
    sp.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - any other failure is a runtime error
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
