"""Shared bits for the experiment scripts."""

import argparse
import sys
import time
from pathlib import Path

from crowdstop.config import load_config, with_overrides
from crowdstop.curves import compare_curves, lies_below
from crowdstop.harness import emit_csv

ROOT = Path(__file__).resolve().parent.parent


def parse_args(default_config: str, default_out: str):
    p = argparse.ArgumentParser()
    p.add_argument("--config", default=str(ROOT / "configs" / default_config))
    p.add_argument("--out", default=str(ROOT / "results" / default_out))
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--error-min", type=float, default=0.05)
    p.add_argument("--error-max", type=float, default=0.15)
    args = p.parse_args()
    plan = with_overrides(load_config(args.config), seed=args.seed,
                          replications=args.replications, jobs=args.jobs)
    return args, plan


def save(results, out):
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    emit_csv(results, out)
    print(f"wrote {len(results)} rows to {out}", file=sys.stderr)


def report(results, a, b, lo, hi, n_grid=41):
    m = compare_curves(results, a, b, lo, hi, n_grid)
    if not m:
        print(f"{a} vs {b}: curves do not overlap in [{lo}, {hi}]")
        return
    z = min(p.diff / p.se for p in m) if len(m) and m[0].se == m[0].se else float("nan")
    ratio = max(p.cost_a / p.cost_b for p in m)
    print(f"{a[0]}:{a[1]:g} vs {b[0]}:{b[1]:g}  error {m[0].error_rate:.3f}..{m[-1].error_rate:.3f}  "
          f"below={lies_below(m)}  min z={z:.2f}  worst cost ratio={ratio:.3f}")


class Timer:
    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        print(f"elapsed {time.perf_counter() - self.t:.1f}s", file=sys.stderr)
