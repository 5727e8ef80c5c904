"""Worker selection for gold-HIT creation.

Each worker keeps ``answered`` (HITs whose gold answer is final and that the
worker took part in) and ``matched`` (how many of those agreed with the gold
answer). The index policy asks the worker with the largest
``matched / answered + 1 / sqrt(answered)``; unseen workers score 2, which is
also the maximum. The random policy asks a uniformly random worker.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from .core import HitSpec, QualityClass, RuleParams, Tally
from .stopping import decide, observe
from .weights import WeightScheme, weight_for
from .workload import sample_answer

INITIAL_INDEX = 2.0


class Policy(str, enum.Enum):
    INDEX = "IndexBased"
    RANDOM = "Random"

    @classmethod
    def parse(cls, name: str) -> "Policy":
        key = name.strip().lower().replace("-", "").replace("_", "")
        for p in cls:
            if key in (p.value.lower(), p.name.lower()):
                return p
        raise ValueError(f"unknown policy {name!r}; use IndexBased or Random")


@dataclass(frozen=True)
class WorkerStats:
    answered: int = 0
    matched: int = 0

    def __post_init__(self):
        if not 0 <= self.matched <= self.answered:
            raise ValueError(f"need 0 <= matched <= answered, got {self.matched}/{self.answered}")


def index(stats: WorkerStats) -> float:
    if stats.answered == 0:
        return INITIAL_INDEX
    return stats.matched / stats.answered + 1 / math.sqrt(stats.answered)


def record_outcome(stats: WorkerStats, matched_majority: bool) -> WorkerStats:
    return WorkerStats(stats.answered + 1, stats.matched + int(bool(matched_majority)))


@dataclass
class WorkerPool:
    """Success rates plus running gold-HIT statistics for a worker population.

    ``classes`` holds exogenous quality classes, used only for vote weights.
    """

    success: np.ndarray
    classes: Optional[np.ndarray] = None
    answered: np.ndarray = field(default=None)
    matched: np.ndarray = field(default=None)
    index: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.success = np.asarray(self.success, dtype=float)
        n = len(self.success)
        if self.answered is None:
            self.answered = np.zeros(n, dtype=np.int64)
        if self.matched is None:
            self.matched = np.zeros(n, dtype=np.int64)
        self.index = np.array([index(self.stats(i)) for i in range(n)])

    def __len__(self) -> int:
        return len(self.success)

    def stats(self, worker: int) -> WorkerStats:
        return WorkerStats(int(self.answered[worker]), int(self.matched[worker]))

    def record(self, worker: int, matched_majority: bool) -> None:
        s = record_outcome(self.stats(worker), matched_majority)
        self.answered[worker] = s.answered
        self.matched[worker] = s.matched
        self.index[worker] = index(s)

    def reset(self) -> None:
        self.answered[:] = 0
        self.matched[:] = 0
        self.index[:] = INITIAL_INDEX


def pick_worker(policy: Policy, pool: WorkerPool, excluded: Iterable[int], rng: np.random.Generator) -> int:
    """Choose the next worker not in ``excluded``; ties are broken uniformly at random."""
    excluded = list(excluded)
    if len(set(excluded)) >= len(pool) or not len(pool):
        raise ValueError("no eligible worker: every worker in the pool is excluded")
    if policy is Policy.RANDOM:
        # rejection keeps the draw uniform over eligible workers
        taken = set(excluded)
        while True:
            w = int(rng.integers(len(pool)))
            if w not in taken:
                return w
    scores = pool.index.copy()
    if excluded:
        scores[excluded] = -np.inf
    best = np.flatnonzero(scores == scores.max())
    if len(best) == 1:
        return int(best[0])
    return int(best[rng.integers(len(best))])


@dataclass(frozen=True)
class GoldHitRecord:
    hit_id: Hashable
    selected: int
    cost: int
    participants: tuple[tuple[int, int], ...]
    policy: str = ""

    def __post_init__(self):
        if self.cost < 1 or self.cost != len(self.participants):
            raise ValueError("cost must equal the number of participants and be >= 1")


def process_gold_hit(
    hit: HitSpec,
    pool: WorkerPool,
    policy: Policy,
    params: RuleParams,
    rng: np.random.Generator,
    scheme: Optional[WeightScheme] = None,
) -> GoldHitRecord:
    """Ask workers one at a time until the stopping rule fires, then update their stats.

    Each worker answers a HIT at most once. Stats change only after the gold
    answer is fixed.
    """
    if len(pool) < params.max_rounds:
        raise ValueError(f"pool of {len(pool)} workers is smaller than max_rounds={params.max_rounds}")
    if scheme is not None and pool.classes is None:
        raise ValueError("a weight scheme needs exogenous quality classes on the pool")
    tally = Tally.for_hit(hit)
    participants: list[tuple[int, int]] = []
    while True:
        w = pick_worker(policy, pool, [p for p, _ in participants], rng)
        answer = sample_answer(hit, rng, error_rate=1.0 - pool.success[w])
        participants.append((w, answer))
        weight = 1.0 if scheme is None else weight_for(scheme, QualityClass(int(pool.classes[w])), tally.rounds + 1)
        observe(tally, answer, weight)
        decision = decide(tally, params, rng)
        if decision.stop:
            break
    gold = decision.selected
    for w, answer in participants:
        pool.record(w, answer == gold)
    return GoldHitRecord(hit.id, gold, tally.rounds, tuple(participants), policy.value)


def run_gold_pipeline(
    hits: Sequence[HitSpec],
    pool: WorkerPool,
    policy: Policy,
    params: RuleParams,
    rng: np.random.Generator,
    scheme: Optional[WeightScheme] = None,
) -> list[GoldHitRecord]:
    """Process ``hits`` strictly in order, sharing ``pool`` statistics across them."""
    return [process_gold_hit(h, pool, policy, params, rng, scheme) for h in hits]
