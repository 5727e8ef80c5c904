"""Adaptive stopping rules for one HIT.

The rule stops at round ``t`` once the gap between the two largest weighted votes
reaches ``C * sqrt(sum w^2) - eps * sum w``, with the right-hand side randomly
rounded to a neighbouring integer. Unit weights give the unweighted rule
``C * sqrt(t) - eps * t``.

Randomness contract (shared by :func:`decide` and :func:`run_batch`): each stop
check draws exactly one uniform from the decision stream for rounding, and a
stop with several top answers draws one more uniform for the tie-break. Keeping
this fixed is what lets the vectorised engine reproduce the scalar path bit for
bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .core import CONTINUE, Decision, HitSpec, RuleParams, Tally


@dataclass(frozen=True)
class ThresholdDraw:
    raw: float
    rounded: float

    @property
    def forces_stop(self) -> bool:
        return self.raw <= 0


def observe(tally: Tally, answer: int, weight: float = 1.0) -> Tally:
    """Add one worker's answer to ``tally`` in place and return it."""
    if not weight > 0:
        raise ValueError(f"weight must be positive, got {weight}")
    if not 0 <= answer < tally.answer_count:
        raise ValueError(f"answer {answer} out of range for {tally.answer_count} answers")
    tally.votes[answer] += weight
    tally.rounds += 1
    tally.weight_sum += weight
    tally.weight_sq_sum += weight * weight
    return tally


def effective_c(params: RuleParams, t: int) -> float:
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    if params.c_mode == "fixed":
        return params.c
    arg = t * t / params.delta
    if arg <= 1.0:
        return 0.0
    return math.sqrt(math.log(arg))


def round_threshold(raw: float, u: float) -> float:
    """Expectation-preserving rounding of ``raw`` driven by the uniform ``u``.

    Non-positive thresholds are returned as ``ceil(raw)`` (still <= 0), so
    they force a stop regardless of ``u``.
    """
    if raw <= 0:
        return float(math.ceil(raw))
    fl = math.floor(raw)
    return float(fl + 1) if u < raw - fl else float(fl)


def raw_threshold(tally: Tally, params: RuleParams) -> float:
    c_t = effective_c(params, tally.rounds)
    return c_t * math.sqrt(tally.weight_sq_sum) - params.epsilon * tally.weight_sum


def threshold(tally: Tally, params: RuleParams, rng: np.random.Generator) -> ThresholdDraw:
    """Draw this round's threshold. Consumes exactly one uniform from ``rng``.

    With ``params.randomized`` off, ``rounded`` carries the raw value.
    """
    if tally.rounds < 1:
        raise ValueError("threshold needs at least one observed answer")
    raw = raw_threshold(tally, params)
    u = rng.random()
    if not params.randomized:
        return ThresholdDraw(raw, raw)
    return ThresholdDraw(raw, round_threshold(raw, u))


def top_two_gap(votes: np.ndarray) -> float:
    top, second = np.sort(votes)[::-1][:2]
    return float(top - second)


def select(votes: np.ndarray, rng: np.random.Generator) -> int:
    """Weighted-vote maximiser; a tie draws one uniform and picks among the maximisers."""
    best = np.flatnonzero(votes == votes.max())
    if len(best) == 1:
        return int(best[0])
    return int(best[int(rng.random() * len(best))])


def decide(tally: Tally, params: RuleParams, rng: np.random.Generator) -> Decision:
    draw = threshold(tally, params, rng)
    gap = top_two_gap(tally.votes)
    if gap >= draw.rounded or tally.rounds >= params.max_rounds:
        return Decision(select(tally.votes, rng))
    return CONTINUE


def decide_unweighted(counts: np.ndarray, params: RuleParams, rng: np.random.Generator) -> Decision:
    """Plain vote-count rule ``top - second >= C*sqrt(t) - eps*t``.

    Kept separate from :func:`decide` so the weighted rule can be checked
    against it; it follows the same randomness contract.
    """
    counts = np.asarray(counts)
    t = int(counts.sum())
    if t < 1:
        raise ValueError("decision needs at least one answer")
    raw = effective_c(params, t) * math.sqrt(t) - params.epsilon * t
    u = rng.random()
    target = round_threshold(raw, u) if params.randomized else raw
    ordered = np.sort(counts)[::-1]
    if ordered[0] - ordered[1] >= target or t >= params.max_rounds:
        return Decision(select(counts.astype(float), rng))
    return CONTINUE


def run_hit(
    hit: HitSpec,
    answer_stream: Iterable[tuple[int, float]],
    params: RuleParams,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Feed ``(answer, weight)`` pairs to the rule until it stops.

    Returns ``(selected answer, cost)`` where cost is the number of answers used.
    """
    tally = Tally.for_hit(hit)
    for answer, weight in answer_stream:
        observe(tally, answer, weight)
        decision = decide(tally, params, rng)
        if decision.stop:
            return decision.selected, tally.rounds
    raise RuntimeError(f"answer stream for HIT {hit.id!r} ran out after {tally.rounds} rounds")


# -- vectorised engine ------------------------------------------------------

AnswerBlock = Callable[[np.ndarray, int, int], tuple[np.ndarray, np.ndarray]]
DecisionBlock = Callable[[np.ndarray, int, int], np.ndarray]
DecisionValue = Callable[[int, int], float]


@dataclass
class BatchResult:
    selected: np.ndarray
    cost: np.ndarray


def run_batch(
    n_hits: int,
    answer_count: int,
    params: RuleParams,
    answers_block: AnswerBlock,
    decision_block: DecisionBlock,
    decision_value: DecisionValue,
    block: int = 32,
) -> BatchResult:
    """Run the stopping rule on many HITs at once, one round at a time.

    ``answers_block(ids, t0, size)`` returns the answers and weights of HITs
    ``ids`` for rounds ``t0 .. t0+size-1``. ``decision_block(ids, start, size)``
    returns decision-stream positions ``start .. start+size-1`` of each HIT and
    ``decision_value(i, pos)`` a single position. Results equal :func:`run_hit`
    applied HIT by HIT to the same streams.
    """
    votes = np.zeros((n_hits, answer_count))
    wsum = np.zeros(n_hits)
    wsq = np.zeros(n_hits)
    selected = np.full(n_hits, -1, dtype=np.int64)
    cost = np.zeros(n_hits, dtype=np.int64)

    active = np.arange(n_hits)
    ans_blk = w_blk = dec_blk = blk_rows = None
    for t in range(1, params.max_rounds + 1):
        if active.size == 0:
            break
        col = (t - 1) % block
        if col == 0:
            size = min(block, params.max_rounds - t + 1)
            ans_blk, w_blk = answers_block(active, t, size)
            dec_blk = decision_block(active, t - 1, size)
            blk_rows = active
        # rows of the current block belonging to still-active HITs
        rows = np.searchsorted(blk_rows, active)
        a = ans_blk[rows, col]
        w = w_blk[rows, col]
        votes[active, a] += w
        wsum[active] += w
        wsq[active] += w * w

        c_t = effective_c(params, t)
        raw = c_t * np.sqrt(wsq[active]) - params.epsilon * wsum[active]
        u = dec_blk[rows, col]
        if params.randomized:
            fl = np.floor(raw)
            target = np.where(raw <= 0, np.ceil(raw), np.where(u < raw - fl, fl + 1, fl))
        else:
            target = raw
        v = votes[active]
        if answer_count == 2:
            gap = np.abs(v[:, 0] - v[:, 1])
        else:
            srt = np.sort(v, axis=1)
            gap = srt[:, -1] - srt[:, -2]
        stop = (gap >= target) | (t >= params.max_rounds)
        if not stop.any():
            continue

        done = active[stop]
        vd = votes[done]
        top = vd.max(axis=1)
        is_max = vd == top[:, None]
        n_max = is_max.sum(axis=1)
        sel = is_max.argmax(axis=1)
        for j in np.flatnonzero(n_max > 1):
            # the tie-break uniform follows the t rounding draws
            u_tie = decision_value(int(done[j]), t)
            best = np.flatnonzero(is_max[j])
            sel[j] = best[int(u_tie * len(best))]
        selected[done] = sel
        cost[done] = t
        active = active[~stop]
    return BatchResult(selected, cost)
