"""Varying-C curves of the unweighted rule, one per epsilon.

Each nonzero epsilon is compared against epsilon = 0 at matched error rates.
"""

from _common import Timer, parse_args, report, save
from crowdstop.harness import run_sweep

args, plan = parse_args("unweighted.ini", "unweighted.csv")
with Timer():
    results = run_sweep(plan)
save(results, args.out)
sid = plan.schemes[0][0]
for eps in plan.epsilons:
    if eps > 0:
        report(results, (sid, eps), (sid, 0.0), args.error_min, args.error_max)
