"""Comparing varying-C curves at matched error rates.

A curve is the set of (error rate, average cost) points obtained by sweeping C
with everything else fixed. Two curves are compared by interpolating cost as
a function of error rate on a shared grid, along each curve's efficient
frontier. When the results carry several
replications (distinct seeds), the difference is computed per replication and
its standard error is taken across replications.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def curve_key(result) -> tuple[str, float]:
    return (result.scheme, result.epsilon)


def frontier(points: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Efficient (error rate, cost) points of one curve, sorted by error rate.

    A point is dropped when another point of the same curve is no worse on both
    axes, so the returned cost strictly decreases as error grows.
    """
    pts = sorted((p.error_rate, p.avg_cost) for p in points)
    errs, costs = [], []
    for e, k in pts:
        if costs and k >= costs[-1]:
            continue
        if errs and e == errs[-1]:
            costs[-1] = k
            continue
        errs.append(e)
        costs.append(k)
    return np.array(errs), np.array(costs)


def interp_cost(points: Sequence, error: float) -> float:
    """Cost at ``error`` along the curve's frontier; NaN outside its error range."""
    errs, costs = frontier(points)
    if len(errs) == 0 or error < errs[0] or error > errs[-1]:
        return float("nan")
    return float(np.interp(error, errs, costs))


@dataclass(frozen=True)
class MatchedPoint:
    error_rate: float
    cost_a: float
    cost_b: float
    diff: float  # cost_b - cost_a, averaged over replications
    se: float  # NaN with a single replication

    @property
    def ratio(self) -> float:
        return self.cost_a / self.cost_b


def _by_seed(results, key) -> dict[int, list]:
    out: dict[int, list] = defaultdict(list)
    for r in results:
        if curve_key(r) == key:
            out[r.seed].append(r)
    return out


def compare_curves(
    results: Sequence,
    a: tuple[str, float],
    b: tuple[str, float],
    error_min: float,
    error_max: float,
    n_grid: int = 21,
) -> list[MatchedPoint]:
    """Costs of curves ``a`` and ``b`` at matched error rates in ``[error_min, error_max]``.

    Only grid points covered by both curves in every replication are returned.
    """
    ra, rb = _by_seed(results, a), _by_seed(results, b)
    seeds = sorted(set(ra) & set(rb))
    if not seeds:
        raise ValueError(f"no replication contains both curves {a} and {b}")
    grid = np.linspace(error_min, error_max, n_grid)
    out = []
    for e in grid:
        ca = np.array([interp_cost(ra[s], e) for s in seeds])
        cb = np.array([interp_cost(rb[s], e) for s in seeds])
        if np.isnan(ca).any() or np.isnan(cb).any():
            continue
        d = cb - ca
        se = float(np.std(d, ddof=1) / np.sqrt(len(d))) if len(d) > 1 else float("nan")
        out.append(MatchedPoint(float(e), float(ca.mean()), float(cb.mean()), float(d.mean()), se))
    return out


def lies_below(matched: Sequence[MatchedPoint], n_se: float = 2.0) -> bool:
    """True when curve ``a`` is cheaper than ``b`` by ``n_se`` standard errors at every matched point."""
    if not matched:
        return False
    return all(m.diff > 0 and (np.isnan(m.se) or m.diff >= n_se * m.se) for m in matched)
