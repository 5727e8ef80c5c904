"""Index-based vs random routing while creating gold HITs.

Prints, per epsilon, whether IndexBased is cheaper at matched error rates and
the worst cost ratio IndexBased / Random over the compared range.
"""

from _common import Timer, parse_args, report, save
from crowdstop.harness import run_gold_comparison

args, plan = parse_args("gold.ini", "gold.csv")
with Timer():
    results = run_gold_comparison(plan)
save(results, args.out)
for eps in plan.epsilons:
    report(results, ("IndexBased", eps), ("Random", eps), args.error_min, args.error_max)
