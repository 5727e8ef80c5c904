"""Domain types shared across the package."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Optional

import numpy as np

TRUTH_TOL = 1e-9


class QualityClass(enum.IntEnum):
    """Coarse exogenous worker rating. Larger value means better worker."""

    BAD = 0
    AVERAGE = 1
    GOOD = 2

    @classmethod
    def parse(cls, name: str) -> "QualityClass":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown quality class {name!r}") from None


@dataclass(frozen=True)
class HitSpec:
    """A multiple-choice HIT with its simulated answer distribution.

    ``truth[a]`` is the probability that a typical worker picks answer ``a``; the
    correct answer is the most probable one.
    """

    id: Hashable
    truth: tuple[float, ...]
    group: Optional[int] = None

    def __post_init__(self):
        truth = tuple(float(p) for p in self.truth)
        object.__setattr__(self, "truth", truth)
        if len(truth) < 2:
            raise ValueError(f"HIT {self.id!r}: need at least 2 answers, got {len(truth)}")
        if any(p < 0 or not np.isfinite(p) for p in truth):
            raise ValueError(f"HIT {self.id!r}: negative or non-finite probability in {truth}")
        if abs(sum(truth) - 1.0) > TRUTH_TOL:
            raise ValueError(f"HIT {self.id!r}: probabilities sum to {sum(truth)!r}, not 1")

    @property
    def answer_count(self) -> int:
        return len(self.truth)

    @property
    def correct(self) -> int:
        # first maximiser on exact ties
        return int(np.argmax(self.truth))


def bias_of(hit: HitSpec) -> float:
    """Gap between the two largest answer probabilities of ``hit``."""
    top, second = sorted(hit.truth, reverse=True)[:2]
    return top - second


@dataclass
class Tally:
    """Running weighted vote for one HIT.

    ``weight_sum`` and ``weight_sq_sum`` are the first-moment and second-moment
    sums of the weights observed so far.
    """

    answer_count: int
    votes: np.ndarray = field(default=None)
    rounds: int = 0
    weight_sum: float = 0.0
    weight_sq_sum: float = 0.0

    def __post_init__(self):
        if self.answer_count < 2:
            raise ValueError(f"answer_count must be >= 2, got {self.answer_count}")
        if self.votes is None:
            self.votes = np.zeros(self.answer_count)
        else:
            self.votes = np.asarray(self.votes, dtype=float)
            if self.votes.shape != (self.answer_count,):
                raise ValueError("votes length does not match answer_count")

    @classmethod
    def for_hit(cls, hit: HitSpec) -> "Tally":
        return cls(hit.answer_count)


@dataclass(frozen=True)
class RuleParams:
    """Parameters of one stopping-rule instance.

    With ``c_mode="time_varying"`` the constant ``c`` is ignored and the rule
    uses ``sqrt(log(t**2 / delta))`` at round ``t``. ``randomized=False``
    compares the vote gap against the raw threshold instead of a randomly
    rounded one; it exists for analysis and oracle checks.
    """

    c: float = 2.0
    epsilon: float = 0.1
    c_mode: str = "fixed"
    delta: Optional[float] = None
    max_rounds: int = 60
    randomized: bool = True

    def __post_init__(self):
        if self.c < 0:
            raise ValueError(f"c must be >= 0, got {self.c}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if self.c_mode not in ("fixed", "time_varying"):
            raise ValueError(f"c_mode must be 'fixed' or 'time_varying', got {self.c_mode!r}")
        # delta = 1 is accepted as the degenerate sqrt(log(t^2)) schedule
        if self.c_mode == "time_varying" and (self.delta is None or not 0 < self.delta <= 1):
            raise ValueError(f"time_varying mode needs delta in (0, 1], got {self.delta}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")


@dataclass(frozen=True)
class Decision:
    """Outcome of one stop check: ``selected`` is None while continuing."""

    selected: Optional[int] = None

    @property
    def stop(self) -> bool:
        return self.selected is not None


CONTINUE = Decision()
