"""Regret and classification metrics plus bound-audit helpers.

Regret comes in three exact flavors here: conditional regret against the
local oracle (synthetic worlds only, no Monte-Carlo needed), exact
pseudo-regret of an exponential-weights ensemble (its distribution is a
deterministic function of the losses), and the per-cell decomposition of
the contextual variant. Classification quality is reported as overall,
negative-class and positive-class error rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import SyntheticWorld, UnsupportedOracleError

__all__ = [
    "LLTrace",
    "RunSummary",
    "FnrTuningError",
    "conditional_regret",
    "exact_pseudo_regret",
    "contextual_pseudo_regret",
    "classification_metrics",
    "improvement_ratio",
    "tune_fnr_threshold",
]


@dataclass
class LLTrace:
    """Per-round record of one local learner: instance and chosen rule."""

    learner: int
    xs: list
    chosen: list


def conditional_regret(trace: LLTrace, world) -> np.ndarray:
    """Cumulative sum of pi*(x_t) - pi_{a_t}(x_t) along the trace.

    Exact because the synthetic world exposes its accuracy functions;
    dataset worlds have no oracle and are rejected.
    """
    if not isinstance(world, SyntheticWorld):
        raise UnsupportedOracleError("conditional regret needs known accuracy functions")
    gaps = np.empty(len(trace.xs))
    for t, (x, a) in enumerate(zip(trace.xs, trace.chosen)):
        _, best = world.best_rule(trace.learner, x)
        gaps[t] = best - world.accuracy(trace.learner, a, x)
    return np.cumsum(gaps)


def exact_pseudo_regret(loss_matrix, q_trajectory) -> float:
    """Best-learner cumulative reward minus the ensemble's expected reward.

    Computed from losses as sum_t <q_t, l_t> - min_i sum_t l_i(t), which
    is identical in value and exact given the deterministic q trajectory.
    """
    losses = np.asarray(loss_matrix, dtype=float)
    q = np.asarray(q_trajectory, dtype=float)
    if losses.shape != q.shape:
        raise ValueError(f"loss matrix {losses.shape} and q trajectory {q.shape} disagree")
    return float((q * losses).sum() - losses.sum(axis=0).min())


def contextual_pseudo_regret(loss_matrix, q_trajectory, cells) -> tuple[float, dict[int, float]]:
    """Total and per-cell pseudo-regret against the per-cell best learner."""
    losses = np.asarray(loss_matrix, dtype=float)
    q = np.asarray(q_trajectory, dtype=float)
    cells = np.asarray(cells)
    if losses.shape != q.shape or cells.shape[0] != losses.shape[0]:
        raise ValueError("loss matrix, q trajectory and cell ids disagree in shape")
    per_cell: dict[int, float] = {}
    for flat in np.unique(cells):
        rows = cells == flat
        per_cell[int(flat)] = exact_pseudo_regret(losses[rows], q[rows])
    return float(sum(per_cell.values())), per_cell


def classification_metrics(predictions, labels, positive, negative) -> tuple[float, float, float]:
    """(overall, negative-class, positive-class) error rates.

    The class-conditional rates are errors among true-negative and
    true-positive instances respectively. A class that never occurs gets
    NaN, never a fake zero.
    """
    n = n_pos = n_neg = err = err_pos = err_neg = 0
    for p, y in zip(predictions, labels):
        n += 1
        wrong = p != y
        err += wrong
        if y == positive:
            n_pos += 1
            err_pos += wrong
        elif y == negative:
            n_neg += 1
            err_neg += wrong
        else:
            raise ValueError(f"label {y!r} is neither {positive!r} nor {negative!r}")
    if n == 0:
        raise ValueError("empty trace")
    per = err / n
    fpr = err_neg / n_neg if n_neg else math.nan
    fnr = err_pos / n_pos if n_pos else math.nan
    return per, fpr, fnr


def improvement_ratio(pm_b: float, pm_a: float) -> float:
    """Relative gain of A over B: (PM(B) - PM(A)) / PM(B)."""
    if pm_b <= 0:
        raise ValueError(f"reference metric must be positive, got {pm_b}")
    return (pm_b - pm_a) / pm_b


class FnrTuningError(RuntimeError):
    """No decision tilt in the search range kept the FNR under target."""

    def __init__(self, message: str, probes: list[tuple[float, float]]):
        super().__init__(message)
        self.probes = probes


def tune_fnr_threshold(
    runner,
    target: float = 0.03,
    lo: float = 0.5,
    hi: float = 4.0,
    window: float = 0.002,
    max_iters: int = 20,
) -> float:
    """Bisect the decision tilt until the mean FNR sits just below target.

    ``runner`` maps a candidate tilt h to a mean FNR (larger h flags more
    positives, so FNR decreases in h). Stops once the FNR lands in
    (target - window, target] or after ``max_iters`` evaluations, returning
    the last feasible h; raises FnrTuningError when even the largest tilt
    cannot reach the target.
    """
    probes: list[tuple[float, float]] = []

    def probe(h: float) -> float:
        fnr = runner(h)
        probes.append((h, fnr))
        return fnr

    feasible = None
    f_lo = probe(lo)
    if f_lo <= target:
        feasible = lo
        if f_lo > target - window:
            return lo
    f_hi = probe(hi)
    if f_hi > target:
        raise FnrTuningError(
            f"FNR {f_hi:.4f} at h={hi} still above target {target}", probes
        )
    feasible = hi if feasible is None else feasible
    if f_hi > target - window:
        return hi
    a, b = lo, hi  # FNR(a) > target >= FNR(b)
    while len(probes) < max_iters:
        mid = 0.5 * (a + b)
        f_mid = probe(mid)
        if f_mid <= target:
            feasible = mid
            if f_mid > target - window:
                return mid
            b = mid
        else:
            a = mid
    return feasible


@dataclass
class RunSummary:
    """Aggregated outcome of one seeded run."""

    seed: int
    n_rounds: int
    el_per: float
    el_fpr: float
    el_fnr: float
    ll_per: list = field(default_factory=list)
    ll_fpr: list = field(default_factory=list)
    ll_fnr: list = field(default_factory=list)
    explore_fraction: float = math.nan
    explore_per: float = math.nan
    exploit_per: float = math.nan
    regrets: dict = field(default_factory=dict)  # name -> final value
    bounds: dict = field(default_factory=dict)  # name -> bound value
    extras: dict = field(default_factory=dict)

    @property
    def best_ll_per(self) -> float:
        return min(self.ll_per) if self.ll_per else math.nan

    @property
    def worst_ll_per(self) -> float:
        return max(self.ll_per) if self.ll_per else math.nan

    @property
    def avg_ll_per(self) -> float:
        return sum(self.ll_per) / len(self.ll_per) if self.ll_per else math.nan
