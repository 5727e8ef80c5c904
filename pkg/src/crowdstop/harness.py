"""Parameter sweeps over (scheme, epsilon, C) and CSV output.

Replication ``r`` of a sweep with seed ``s`` runs everything under seed
``s + r``: the workload, every HIT's answer and decision streams, and the
routing streams. Within one replication all sweep points reuse the same HIT
streams, so curves are compared on common random numbers.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .core import RuleParams
from .rng import RNG_VERSION, stream
from .routing import Policy, WorkerPool, run_gold_pipeline
from .weights import WeightScheme
from .workload import (
    DistributionSource,
    GroupTableSpec,
    QualityDistSpec,
    TableSource,
    UniformBiasSpec,
    gen_group_table,
    gen_uniform_bias,
    gold_hits,
    sample_quality,
)

log = logging.getLogger(__name__)

DEFAULT_CS = tuple(round(0.5 * k, 10) for k in range(1, 11))
DEFAULT_EPSILONS = (0.0, 0.05, 0.1, 0.15, 0.2, 0.3)
UNWEIGHTED = "unweighted"

CSV_HEADER = ("scheme", "epsilon", "c", "error_rate", "avg_cost", "n_hits", "seed", "rng_version")

WorkloadSpec = Union[UniformBiasSpec, GroupTableSpec, QualityDistSpec]


class ConfigError(ValueError):
    """Invalid or unresolvable experiment configuration."""


@dataclass(frozen=True)
class ExperimentResult:
    scheme: str
    epsilon: float
    c: float
    error_rate: float
    avg_cost: float
    n_hits: int
    seed: int
    rng_version: str = RNG_VERSION
    # within-run standard errors; not part of the CSV format
    error_se: float = field(default=float("nan"), compare=False)
    cost_se: float = field(default=float("nan"), compare=False)


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: a workload crossed with schemes, epsilons and Cs.

    ``schemes`` maps a scheme id to a :class:`WeightScheme`, or to ``None`` for
    unit weights. ``policies`` and ``n_gold`` are used by gold comparisons.
    """

    workload: WorkloadSpec = field(default_factory=UniformBiasSpec)
    schemes: tuple[tuple[str, Optional[WeightScheme]], ...] = ((UNWEIGHTED, None),)
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    cs: tuple[float, ...] = DEFAULT_CS
    policies: tuple[Policy, ...] = (Policy.INDEX, Policy.RANDOM)
    n_gold: int = 5_000
    replications: int = 1
    seed: int = 0
    max_rounds: int = 60
    c_mode: str = "fixed"
    delta: Optional[float] = None
    randomized: bool = True
    jobs: int = 1

    def __post_init__(self):
        if not self.epsilons or not self.cs:
            raise ConfigError("epsilon and c lists must be non-empty")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    def params(self, epsilon: float, c: float) -> RuleParams:
        try:
            return RuleParams(c, epsilon, self.c_mode, self.delta, self.max_rounds, self.randomized)
        except ValueError as e:
            raise ConfigError(str(e)) from None


def _standard_errors(wrong: np.ndarray, cost: np.ndarray) -> tuple[float, float]:
    n = len(cost)
    p = wrong.mean()
    err_se = math.sqrt(p * (1 - p) / n)
    cost_se = float(cost.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return err_se, cost_se


def _result(scheme, eps, c, wrong, cost, seed) -> ExperimentResult:
    wrong = np.asarray(wrong, dtype=float)
    cost = np.asarray(cost, dtype=float)
    err_se, cost_se = _standard_errors(wrong, cost)
    return ExperimentResult(scheme, eps, c, float(wrong.mean()), float(cost.mean()), len(cost), seed,
                            RNG_VERSION, err_se, cost_se)


# -- batch sweeps -------------------------------------------------------------


@lru_cache(maxsize=2)
def _source(wspec, seed: int, max_rounds: int):
    """Workload plus its cached answer/decision streams for one replication."""
    try:
        if isinstance(wspec, UniformBiasSpec):
            return DistributionSource(gen_uniform_bias(wspec, seed), seed, max_rounds)
        if isinstance(wspec, GroupTableSpec):
            return TableSource(gen_group_table(wspec, seed), seed, max_rounds)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    raise ConfigError(f"sweeps need a uniform or table workload, got {type(wspec).__name__}")


def _sweep_point(plan: SweepSpec, seed: int, scheme_id: str, scheme, eps: float, c: float) -> ExperimentResult:
    params = plan.params(eps, c)
    source = _source(plan.workload, seed, params.max_rounds)
    if isinstance(source, TableSource):
        source.set_scheme(scheme)
    res = source.run(params)
    correct = np.array([h.correct for h in source.hits])
    return _result(scheme_id, eps, c, res.selected != correct, res.cost, seed)


def _check_schemes(plan: SweepSpec) -> None:
    if isinstance(plan.workload, UniformBiasSpec):
        for sid, sch in plan.schemes:
            if sch is not None and not (sch.time_invariant and len(set(sch.lam)) == 1):
                raise ConfigError(f"scheme {sid!r} needs quality classes, which the uniform-bias workload lacks")


def _run_points(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futures = [ex.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]


def sort_results(results: Sequence[ExperimentResult]) -> list[ExperimentResult]:
    return sorted(results, key=lambda r: (r.scheme, r.epsilon, r.c, r.seed))


def run_sweep(plan: SweepSpec) -> list[ExperimentResult]:
    """One result per (scheme, epsilon, C) per replication, in sorted order."""
    _check_schemes(plan)
    tasks = [
        (plan, plan.seed + r, sid, sch, eps, c)
        for r in range(plan.replications)
        for sid, sch in plan.schemes
        for eps in plan.epsilons
        for c in plan.cs
    ]
    log.info("sweep: %d points", len(tasks))
    return sort_results(_run_points(_sweep_point, tasks, plan.jobs))


# -- gold-HIT comparison --------------------------------------------------------


def _gold_point(plan: SweepSpec, seed: int, policy: Policy, eps: float, c: float,
                keep_records: bool = False):
    params = plan.params(eps, c)
    qspec = plan.workload
    rates = sample_quality(qspec, seed)
    if len(rates) < params.max_rounds:
        raise ConfigError(f"{len(rates)} workers cannot cover max_rounds={params.max_rounds}")
    hits = gold_hits(plan.n_gold, qspec.mean)
    pool = WorkerPool(rates)
    # stream key depends on the point's values, not its grid position
    rng = stream(seed, "gold", list(Policy).index(policy), round(eps * 1e6), round(c * 1e6))
    records = run_gold_pipeline(hits, pool, policy, params, rng)
    wrong = [r.selected != h.correct for r, h in zip(records, hits)]
    res = _result(policy.value, eps, c, wrong, [r.cost for r in records], seed)
    return (res, records) if keep_records else res


def run_gold_comparison(plan: SweepSpec, records: Optional[list] = None) -> list[ExperimentResult]:
    """Index-based vs random routing; each (policy, epsilon, C) starts from fresh worker stats.

    If ``records`` is a list, every :class:`GoldHitRecord` is appended to it as
    ``(epsilon, c, seed, record)``.
    """
    if not isinstance(plan.workload, QualityDistSpec):
        raise ConfigError("gold comparison needs a quality-distribution workload")
    if not plan.policies:
        raise ConfigError("at least one routing policy is required")
    keep = records is not None
    tasks = [
        (plan, plan.seed + r, pol, eps, c, keep)
        for r in range(plan.replications)
        for pol in plan.policies
        for eps in plan.epsilons
        for c in plan.cs
    ]
    log.info("gold comparison: %d points of %d HITs", len(tasks), plan.n_gold)
    out = _run_points(_gold_point, tasks, plan.jobs)
    if keep:
        for (_, seed, _, eps, c, _), (_, recs) in zip(tasks, out):
            records.extend((eps, c, seed, rec) for rec in recs)
        out = [res for res, _ in out]
    return sort_results(out)


# -- aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class AggregatePoint:
    scheme: str
    epsilon: float
    c: float
    error_rate: float
    avg_cost: float
    error_se: float
    cost_se: float
    replications: int


def aggregate(results: Sequence[ExperimentResult]) -> list[AggregatePoint]:
    """Average replications of each (scheme, epsilon, C); standard errors are across replications."""
    groups: dict[tuple, list[ExperimentResult]] = {}
    for r in results:
        groups.setdefault((r.scheme, r.epsilon, r.c), []).append(r)
    out = []
    for key in sorted(groups):
        rs = groups[key]
        e = np.array([r.error_rate for r in rs])
        k = np.array([r.avg_cost for r in rs])
        if len(rs) > 1:
            e_se, k_se = e.std(ddof=1) / np.sqrt(len(rs)), k.std(ddof=1) / np.sqrt(len(rs))
        else:
            e_se, k_se = rs[0].error_se, rs[0].cost_se
        out.append(AggregatePoint(*key, float(e.mean()), float(k.mean()), float(e_se), float(k_se), len(rs)))
    return out


# -- CSV ----------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def format_csv(results: Sequence[ExperimentResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sort_results(results):
        w.writerow([r.scheme, _fmt(r.epsilon), _fmt(r.c), _fmt(r.error_rate), _fmt(r.avg_cost),
                    r.n_hits, r.seed, r.rng_version])
    return buf.getvalue()


def emit_csv(results: Sequence[ExperimentResult], destination) -> None:
    """Write ``results`` to a path, or to an open text stream."""
    text = format_csv(results)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    try:
        with open(destination, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write results to {destination}: {e.strerror or e}") from e


def parse_csv(text: str) -> list[ExperimentResult]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"not a results CSV: header must be {','.join(CSV_HEADER)}")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        s, eps, c, err, cost, n, seed, ver = row
        out.append(ExperimentResult(s, float(eps), float(c), float(err), float(cost), int(n), int(seed), ver))
    return out


def read_csv(path) -> list[ExperimentResult]:
    with open(path, newline="") as fh:
        return parse_csv(fh.read())


def emit_gold_records(records, destination) -> None:
    """Write ``(epsilon, c, seed, GoldHitRecord)`` tuples as CSV."""
    fh = destination if hasattr(destination, "write") else open(destination, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hit_id", "selected", "cost", "policy", "epsilon", "c", "seed"])
        for eps, c, seed, rec in records:
            w.writerow([rec.hit_id, rec.selected, rec.cost, rec.policy, _fmt(eps), _fmt(c), seed])
    finally:
        if fh is not destination:
            fh.close()
