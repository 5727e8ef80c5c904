"""Weighted-vote schemes on the group-table workload, each compared against V1."""

from _common import Timer, parse_args, report, save
from crowdstop.harness import run_sweep

args, plan = parse_args("weighted.ini", "weighted.csv")
with Timer():
    results = run_sweep(plan)
save(results, args.out)
for eps in plan.epsilons:
    for sid, _ in plan.schemes:
        if sid != "V1":
            report(results, (sid, eps), ("V1", eps), args.error_min, args.error_max)
