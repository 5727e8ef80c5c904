"""Seeded simulated workloads and answer samplers.

Three workloads are provided:

* uniform-bias: two-answer HITs whose bias is uniform on an interval; every
  worker answers from the HIT's own distribution;
* group table: nine worker groups by nine HIT groups with an error rate per
  cell, built from a baseline column plus the percent-point differences in
  :data:`GROUP_ERROR_DIFF`;
* a worker quality distribution (success rate per worker) for the gold-HIT
  experiments, where HITs are homogeneous.

Per-HIT randomness comes from :mod:`crowdstop.rng` sub-streams so that a
HIT's answers do not depend on which other HITs are simulated, or in what order.
"""

from __future__ import annotations

import csv
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import HitSpec, QualityClass
from .rng import stream
from .weights import WeightScheme

N_GROUPS = 9

# error(W_i, H_j) - error(W_0, H_j) in percent points; row j = HIT group H_j,
# column i-1 = worker group W_i for i = 1..8.
GROUP_ERROR_DIFF = np.array(
    [
        [0, 0, 0, 1, 1, 1, 2, 4],
        [1, 1, 2, 2, 3, 4, 6, 15],
        [1, 3, 3, 4, 6, 8, 11, 20],
        [1, 4, 4, 7, 7, 11, 16, 27],
        [4, 7, 8, 12, 13, 17, 23, 36],
        [5, 9, 11, 14, 18, 20, 26, 43],
        [7, 11, 15, 18, 22, 25, 30, 47],
        [11, 14, 19, 21, 25, 26, 33, 48],
        [19, 24, 27, 29, 31, 35, 39, 50],
    ],
    dtype=float,
)

# Stand-in for the unpublished error(W_0, H_j) column.
DEFAULT_BASELINE = tuple(round(0.02 + 0.03 * j, 10) for j in range(N_GROUPS))

MAX_ERROR = 0.5


def class_of_group(group: int) -> QualityClass:
    """Worker groups 0-2 are good, 3-5 average, 6-8 bad."""
    return (QualityClass.GOOD, QualityClass.AVERAGE, QualityClass.BAD)[group // 3]


# -- answer sampling ----------------------------------------------------------


def answer_from_uniform(hit: HitSpec, u: float, error_rate: Optional[float] = None) -> int:
    if error_rate is None:
        cum = np.cumsum(hit.truth)
        return int(min(np.searchsorted(cum, u, side="right"), hit.answer_count - 1))
    if hit.answer_count != 2:
        raise ValueError("error-rate sampling is defined for two-answer HITs only")
    correct = hit.correct
    return 1 - correct if u < error_rate else correct


def sample_answer(hit: HitSpec, rng: np.random.Generator, error_rate: Optional[float] = None) -> int:
    """Draw one worker answer.

    With ``error_rate`` the worker gives the wrong one of two answers with that
    probability; otherwise the answer is an IID draw from ``hit.truth``.
    """
    if error_rate is not None and not 0 <= error_rate <= 1:
        raise ValueError(f"error_rate must be in [0, 1], got {error_rate}")
    return answer_from_uniform(hit, rng.random(), error_rate)


# -- uniform bias -------------------------------------------------------------


@dataclass(frozen=True)
class UniformBiasSpec:
    n_hits: int = 10_000
    bias_low: float = 0.1
    bias_high: float = 0.6

    def __post_init__(self):
        if self.n_hits < 1:
            raise ValueError(f"n_hits must be >= 1, got {self.n_hits}")
        if not 0 <= self.bias_low <= 1 or not 0 <= self.bias_high <= 1:
            raise ValueError("bias bounds must lie in [0, 1]")
        if self.bias_low > self.bias_high:
            raise ValueError(f"bias_low {self.bias_low} > bias_high {self.bias_high}")


def gen_uniform_bias(cfg: UniformBiasSpec, seed: int) -> list[HitSpec]:
    rng = stream(seed, "workload")
    biases = rng.uniform(cfg.bias_low, cfg.bias_high, cfg.n_hits)
    return [HitSpec(i, ((1 + b) / 2, (1 - b) / 2)) for i, b in enumerate(biases)]


# -- group table --------------------------------------------------------------


@dataclass(frozen=True)
class GroupTableSpec:
    n_hits: int = 10_000
    n_workers: int = 1_000
    baseline: Optional[Sequence[float]] = DEFAULT_BASELINE
    diff_table: tuple[tuple[float, ...], ...] = tuple(map(tuple, GROUP_ERROR_DIFF.tolist()))

    def __post_init__(self):
        if self.n_hits < 1 or self.n_workers < 1:
            raise ValueError("n_hits and n_workers must be >= 1")
        if self.baseline is not None:
            object.__setattr__(self, "baseline", tuple(float(b) for b in self.baseline))
        object.__setattr__(self, "diff_table", tuple(tuple(float(x) for x in row) for row in self.diff_table))

    def error_matrix(self) -> np.ndarray:
        """Error rate indexed by ``[worker group, HIT group]``, clamped to [0, 0.5]."""
        if self.baseline is None:
            raise ValueError("group-table workload needs a baseline column (error of W_0 per HIT group)")
        base = np.asarray(self.baseline, dtype=float)
        diff = np.asarray(self.diff_table, dtype=float)
        if base.shape != (N_GROUPS,) or diff.shape != (N_GROUPS, N_GROUPS - 1):
            raise ValueError("baseline must have 9 entries and diff_table shape (9, 8)")
        err = np.empty((N_GROUPS, N_GROUPS))
        err[0] = base
        err[1:] = (base[:, None] + diff / 100.0).T
        return np.clip(err, 0.0, MAX_ERROR)


@dataclass
class GroupTable:
    hits: list[HitSpec]
    worker_group: np.ndarray
    errors: np.ndarray  # [worker group, HIT group]

    @property
    def n_workers(self) -> int:
        return len(self.worker_group)

    @property
    def worker_class(self) -> np.ndarray:
        return np.array([class_of_group(g) for g in self.worker_group], dtype=np.int64)

    @property
    def hit_group(self) -> np.ndarray:
        return np.array([h.group for h in self.hits], dtype=np.int64)

    def error(self, worker: int, hit: int) -> float:
        return float(self.errors[self.worker_group[worker], self.hits[hit].group])


def _balanced_groups(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(np.arange(n) * N_GROUPS // n)


def gen_group_table(cfg: GroupTableSpec, seed: int) -> GroupTable:
    err = cfg.error_matrix()
    rng = stream(seed, "workload")
    worker_group = _balanced_groups(cfg.n_workers, rng)
    hit_group = _balanced_groups(cfg.n_hits, rng)
    # a HIT's distribution is the worker-averaged one (workers split evenly)
    mean_err = err.mean(axis=0)
    hits = [HitSpec(i, (1 - mean_err[g], mean_err[g]), group=int(g)) for i, g in enumerate(hit_group)]
    return GroupTable(hits, worker_group, err)


# -- worker quality distribution ---------------------------------------------


@dataclass(frozen=True)
class QualityDistSpec:
    """Distribution of worker success rates on two-answer HITs.

    ``parametric`` draws ``0.5 + 0.5 * Beta(beta_a, beta_b)``; ``table`` treats
    ``rates`` as success rates at evenly spaced rank percentiles and samples
    the linearly interpolated quantile function.
    """

    mode: str = "parametric"
    n_workers: int = 1_000
    rates: tuple[float, ...] = ()
    beta_a: float = 5.0
    beta_b: float = 2.0

    def __post_init__(self):
        if self.mode not in ("parametric", "table"):
            raise ValueError(f"mode must be 'parametric' or 'table', got {self.mode!r}")
        if self.n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {self.n_workers}")
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if self.mode == "table":
            if not self.rates:
                raise ValueError("table mode needs at least one success rate")
            if any(not 0.5 < r <= 1.0 for r in self.rates):
                raise ValueError("success rates must lie in (0.5, 1.0]")
        elif self.beta_a <= 0 or self.beta_b <= 0:
            raise ValueError("beta parameters must be positive")

    @property
    def mean(self) -> float:
        if self.mode == "parametric":
            return 0.5 + 0.5 * self.beta_a / (self.beta_a + self.beta_b)
        r = np.asarray(self.rates, dtype=float)
        if len(r) == 1:
            return float(r[0])
        # mean of a piecewise-linear quantile function on [0, 1]
        return float(np.mean((r[:-1] + r[1:]) / 2))


def sample_quality(cfg: QualityDistSpec, seed: int) -> np.ndarray:
    rng = stream(seed, "quality")
    if cfg.mode == "parametric":
        rates = 0.5 + 0.5 * rng.beta(cfg.beta_a, cfg.beta_b, cfg.n_workers)
        # Beta draws can hit 0.0 in floating point; keep rates strictly above 0.5
        return np.clip(rates, np.nextafter(0.5, 1.0), 1.0)
    r = np.asarray(cfg.rates, dtype=float)
    if len(r) == 1:
        return np.full(cfg.n_workers, r[0])
    u = rng.random(cfg.n_workers)
    return np.interp(u, np.linspace(0.0, 1.0, len(r)), r)


def gold_hits(n_hits: int, mean_success: float) -> list[HitSpec]:
    """Homogeneous two-answer HITs whose correct answer is 0."""
    return [HitSpec(i, (mean_success, 1 - mean_success)) for i in range(n_hits)]


# -- per-HIT answer sources ----------------------------------------------------


class PositionalStream:
    """Per-HIT uniform streams addressed by position instead of consumed.

    Position ``k`` of HIT ``i`` is the ``k``-th ``random()`` value of
    ``stream(seed, purpose, i)`` (after whatever ``head`` draws first), so many
    simulated runs can share one cache and still see exactly what a freshly
    created generator would produce. The first ``dense`` positions of every HIT
    are drawn together on first use; later positions are drawn per HIT.
    """

    def __init__(self, seed: int, purpose: str, n: int, dense: int, head=None):
        self.seed = seed
        self.purpose = purpose
        self.n = n
        self.dense_width = dense
        self._head_fn = head
        self._gens: list[Optional[np.random.Generator]] = [None] * n
        self._heads: list = [None] * n
        self._dense: Optional[np.ndarray] = None
        self._overflow: dict[int, np.ndarray] = {}

    def _gen(self, i: int) -> np.random.Generator:
        g = self._gens[i]
        if g is None:
            g = self._gens[i] = stream(self.seed, self.purpose, i)
            if self._head_fn is not None:
                self._heads[i] = self._head_fn(g)
        return g

    def head(self, i: int):
        self._gen(i)
        return self._heads[i]

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            self._dense = np.stack([self._gen(i).random(self.dense_width) for i in range(self.n)])
        return self._dense

    def row(self, i: int, start: int, stop: int) -> np.ndarray:
        d = self.dense_width
        dense = self.dense  # must precede any overflow draw
        if stop <= d:
            return dense[i, start:stop]
        extra = self._overflow.get(i, np.empty(0))
        need = stop - d - len(extra)
        if need > 0:
            extra = np.concatenate([extra, self._gen(i).random(max(need, d))])
            self._overflow[i] = extra
        full_head = dense[i, start:d] if start < d else np.empty(0)
        return np.concatenate([full_head, extra[max(start - d, 0) : stop - d]])

    def take(self, ids: np.ndarray, start: int, size: int) -> np.ndarray:
        if start + size <= self.dense_width:
            return self.dense[ids, start : start + size]
        return np.stack([self.row(int(i), start, start + size) for i in ids])

    def value(self, i: int, pos: int) -> float:
        return float(self.row(i, pos, pos + 1)[0])

    def cursor(self, i: int) -> "StreamCursor":
        return StreamCursor(self, i)


class StreamCursor:
    """Sequential ``random()`` reader over one HIT's positional stream."""

    def __init__(self, stream_: PositionalStream, i: int):
        self._s = stream_
        self._i = i
        self.pos = 0

    def random(self) -> float:
        v = self._s.value(self._i, self.pos)
        self.pos += 1
        return v


DENSE_ROUNDS = 128


class AnswerSource:
    """Answers, weights and decision uniforms for every HIT of a workload.

    Answer uniforms come from the ``answers`` sub-stream of each HIT and the
    rounding/tie-break uniforms from its ``decisions`` sub-stream. The source
    is a read-only cache, so one instance can serve any number of runs.
    """

    def __init__(self, hits: list[HitSpec], seed: int, max_rounds: int, answer_head=None):
        if not hits:
            raise ValueError("workload has no HITs")
        self.hits = hits
        self.seed = seed
        self.max_rounds = max_rounds
        dense = min(max_rounds + 1, DENSE_ROUNDS)
        self._ans = PositionalStream(seed, "answers", len(hits), dense, answer_head)
        self._dec = PositionalStream(seed, "decisions", len(hits), dense)

    @property
    def answer_count(self) -> int:
        return self.hits[0].answer_count

    def decisions(self, i: int) -> StreamCursor:
        """Decision stream of HIT ``i`` for :func:`~crowdstop.stopping.run_hit`."""
        return self._dec.cursor(i)

    def decision_block(self, ids: np.ndarray, start: int, size: int) -> np.ndarray:
        return self._dec.take(ids, start, size)

    def decision_value(self, i: int, pos: int) -> float:
        return self._dec.value(i, pos)

    def run(self, params):
        from .stopping import run_batch

        if params.max_rounds > self.max_rounds:
            raise ValueError(f"source prepared for {self.max_rounds} rounds, rule needs {params.max_rounds}")
        return run_batch(len(self.hits), self.answer_count, params, self.answers_block,
                         self.decision_block, self.decision_value)


class DistributionSource(AnswerSource):
    """Each answer is an IID draw from the HIT's own distribution, weight 1."""

    def __init__(self, hits, seed, max_rounds):
        super().__init__(hits, seed, max_rounds)
        k = hits[0].answer_count
        if any(h.answer_count != k for h in hits):
            raise ValueError("all HITs in a batch must have the same number of answers")
        self._cum = np.array([np.cumsum(h.truth) for h in hits])

    def answers(self, i: int) -> Iterator[tuple[int, float]]:
        hit = self.hits[i]
        u = self._ans.row(i, 0, self.max_rounds)
        for t in range(self.max_rounds):
            yield answer_from_uniform(hit, float(u[t])), 1.0

    def answers_block(self, ids: np.ndarray, t0: int, size: int):
        u = self._ans.take(ids, t0 - 1, size)
        cum = self._cum[ids]
        ans = (u[:, :, None] >= cum[:, None, :]).sum(axis=2)
        np.minimum(ans, self.answer_count - 1, out=ans)
        return ans, np.ones_like(u)


class TableSource(AnswerSource):
    """Workers arrive in a per-HIT random order; each errs at its cell's rate.

    The arrival order is the first draw of each HIT's answer stream. Weights
    come from ``scheme`` applied to the worker's quality class and the HIT-local
    round number (weight 1 without a scheme).
    """

    def __init__(self, table: GroupTable, seed: int, max_rounds: int, scheme: Optional[WeightScheme] = None):
        if max_rounds > table.n_workers:
            raise ValueError(f"max_rounds {max_rounds} exceeds the {table.n_workers} available workers")
        n_workers = table.n_workers
        super().__init__(table.hits, seed, max_rounds,
                         answer_head=lambda g: g.permutation(n_workers)[:max_rounds])
        self.table = table
        self._wclass = table.worker_class
        self._wgroup = np.asarray(table.worker_group)
        self._hgroup = table.hit_group
        self._orders: Optional[np.ndarray] = None
        self.set_scheme(scheme)

    def set_scheme(self, scheme: Optional[WeightScheme]) -> None:
        """Switch vote weights; the cached answer streams are kept."""
        self.scheme = scheme
        if scheme is None:
            self._weights = np.ones((len(QualityClass), self.max_rounds))
        else:
            self._weights = scheme.table(self.max_rounds)

    def order(self, i: int) -> np.ndarray:
        return self._ans.head(i)

    @property
    def orders(self) -> np.ndarray:
        if self._orders is None:
            self._ans.dense  # creates every generator, drawing its arrival order first
            self._orders = np.stack([self.order(i) for i in range(len(self.hits))])
        return self._orders

    def answers(self, i: int) -> Iterator[tuple[int, float]]:
        order = self.order(i)
        hit = self.hits[i]
        u = self._ans.row(i, 0, self.max_rounds)
        for t in range(1, self.max_rounds + 1):
            w = int(order[t - 1])
            err = self.table.error(w, i)
            yield answer_from_uniform(hit, float(u[t - 1]), err), float(self._weights[self._wclass[w], t - 1])

    def answers_block(self, ids: np.ndarray, t0: int, size: int):
        workers = self.orders[ids, t0 - 1 : t0 - 1 + size]
        u = self._ans.take(ids, t0 - 1, size)
        err = self.table.errors[self._wgroup[workers], self._hgroup[ids][:, None]]
        # correct answer is 0 for every table HIT
        ans = (u < err).astype(np.int64)
        weights = self._weights[self._wclass[workers], np.arange(t0 - 1, t0 - 1 + size)[None, :]]
        return ans, weights


# -- audit dumps ----------------------------------------------------------------


@contextmanager
def _text_out(dest):
    if hasattr(dest, "write"):
        yield dest
    else:
        with open(dest, "w", newline="") as fh:
            yield fh


def dump_hits_csv(hits: list[HitSpec], dest) -> None:
    """Write one row per HIT to a path or open text stream."""
    k = max(h.answer_count for h in hits) if hits else 2
    with _text_out(dest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hit_id", "group", *[f"p{a}" for a in range(k)]])
        for h in hits:
            w.writerow([h.id, "" if h.group is None else h.group, *[f"{p:.6g}" for p in h.truth]])


def dump_workers_csv(groups: Optional[np.ndarray], rates: Optional[np.ndarray], dest) -> None:
    n = len(groups) if groups is not None else len(rates)
    with _text_out(dest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["worker_id", "group", "quality_class", "success_rate"])
        for i in range(n):
            g = "" if groups is None else int(groups[i])
            q = "" if groups is None else class_of_group(int(groups[i])).name.lower()
            r = "" if rates is None else f"{rates[i]:.6g}"
            w.writerow([i, g, q, r])
