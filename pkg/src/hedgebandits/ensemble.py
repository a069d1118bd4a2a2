"""Ensemble learners that fuse local-learner predictions.

Three fusion strategies share one exponential-weights core:

* anytime hedge: sample one learner from the softmax of negated
  cumulative losses, with learning rate eta(n) = sqrt(ln M / n) so no
  horizon input is needed;
* weighted majority: deterministic label vote weighted by the same
  distribution;
* contextual hedge: an independent hedge instance per cell of a
  partition of the ensemble's context space.

An active filter can restrict any of them to the learners currently
exploiting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .partition import CellId, Partition, cell_of, cells_of

__all__ = [
    "HedgeState",
    "CHState",
    "ah_distribution",
    "ah_choose",
    "ah_update",
    "wm_fuse",
    "ch_arrive",
    "ch_update",
    "ch_step",
    "active_filter",
    "audit_hedge_bound",
    "audit_ch_bound",
    "hedge_q_trajectory",
    "ch_q_trajectory",
]


@dataclass
class HedgeState:
    """Cumulative 0/1 losses of M learners and the rounds elapsed."""

    M: int
    losses: list = field(default=None)  # type: ignore[assignment]
    t: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"need at least one learner, got M={self.M}")
        if self.losses is None:
            self.losses = [0] * self.M
        else:
            self.losses = [int(l) for l in self.losses]
            if len(self.losses) != self.M:
                raise ValueError(f"expected {self.M} losses, got {len(self.losses)}")


def _eta(M: int, n: int) -> float:
    return math.sqrt(math.log(M) / n)


def _softmax_neg(eta: float, losses) -> list[float]:
    # exp(-eta*(L - min L)) keeps every exponent in [-inf, 0]
    lo = min(losses)
    ws = [math.exp(-eta * (l - lo)) for l in losses]
    total = sum(ws)
    return [w / total for w in ws]


def ah_distribution(state: HedgeState) -> list[float]:
    """Follow-probability vector for the upcoming round.

    With t rounds already absorbed, the upcoming round is n = t + 1 and
    q_i is proportional to exp(-eta(n) * L_i).
    """
    if state.M == 1:
        return [1.0]
    return _softmax_neg(_eta(state.M, state.t + 1), state.losses)


def _sample(q, rng) -> int:
    u = rng.random()
    acc = 0.0
    for i, qi in enumerate(q):
        acc += qi
        if u < acc:
            return i
    return len(q) - 1


def ah_choose(state: HedgeState, predictions, rng) -> tuple[object, int]:
    """Sample a learner from the hedge distribution and relay its label."""
    if len(predictions) != state.M:
        raise ValueError(f"expected {state.M} predictions, got {len(predictions)}")
    q = ah_distribution(state)
    i = _sample(q, rng)
    return predictions[i], i


def ah_update(state: HedgeState, losses, active=None) -> None:
    """Accumulate one round of 0/1 losses (full information).

    ``active`` optionally restricts accumulation to a subset of learner
    indices; the round still counts toward the elapsed time.
    """
    if len(losses) != state.M:
        raise ValueError(f"expected {state.M} losses, got {len(losses)}")
    acc = state.losses
    if active is None:
        for i in range(state.M):
            l = losses[i]
            if l != 0 and l != 1:
                raise ValueError(f"losses must be 0/1, got {l!r}")
            acc[i] += l
    else:
        for l in losses:
            if l != 0 and l != 1:
                raise ValueError(f"losses must be 0/1, got {l!r}")
        for i in active:
            acc[i] += losses[i]
    state.t += 1


def wm_fuse(q, predictions, rng) -> object:
    """Label with the largest total follow-probability behind it.

    Exact weight ties are broken uniformly at random so repeated audits
    stay well defined even for symmetric states.
    """
    weights: dict[object, float] = {}
    for qi, label in zip(q, predictions):
        weights[label] = weights.get(label, 0.0) + qi
    best = max(weights.values())
    ties = [label for label, w in weights.items() if w == best]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def active_filter(exploit_flags, rng) -> list[int]:
    """Indices of learners currently exploiting.

    When nobody exploits, falls back to a single learner chosen uniformly
    at random; downstream fusion restricts its weights and updates to the
    returned subset.
    """
    chosen = [i for i, flag in enumerate(exploit_flags) if flag]
    if not chosen:
        return [int(rng.integers(len(exploit_flags)))]
    return chosen


def restrict(q, subset) -> list[float]:
    """Renormalize a distribution over a subset of indices (zero elsewhere)."""
    out = [0.0] * len(q)
    total = sum(q[i] for i in subset)
    if total <= 0.0:
        for i in subset:
            out[i] = 1.0 / len(subset)
        return out
    for i in subset:
        out[i] = q[i] / total
    return out


@dataclass
class CHState:
    """One hedge instance per visited cell of the context partition."""

    M: int
    partition: Partition
    count_includes_current: bool = True
    cells: dict[int, HedgeState] = field(default_factory=dict)
    arrivals: dict[int, int] = field(default_factory=dict)

    def cell_state(self, cell: CellId) -> HedgeState:
        hs = self.cells.get(cell.flat)
        if hs is None:
            hs = HedgeState(self.M)
            self.cells[cell.flat] = hs
        return hs


def _arrive_at(state: CHState, cell: CellId) -> tuple[CellId, list[float]]:
    hs = state.cell_state(cell)
    n = state.arrivals.get(cell.flat, 0) + 1
    state.arrivals[cell.flat] = n
    if not state.count_includes_current:
        n = max(n - 1, 1)
    if state.M == 1:
        return cell, [1.0]
    return cell, _softmax_neg(_eta(state.M, n), hs.losses)


def ch_arrive(state: CHState, context) -> tuple[CellId, list[float]]:
    """Register a context arrival and return (cell, follow distribution).

    The arrival counter feeds the cell's learning rate. By default the
    count includes the arrival being processed, which makes a one-cell
    partition behave exactly like plain anytime hedge; set
    ``count_includes_current=False`` to use the pre-arrival count instead.
    """
    return _arrive_at(state, cell_of(context, state.partition))


def ch_update(state: CHState, cell: CellId, losses, active=None) -> None:
    """Accumulate one round of losses in the matched cell only."""
    ah_update(state.cell_state(cell), losses, active=active)


def ch_step(state: CHState, context, predictions, true_label, rng) -> tuple[object, int]:
    """One contextual-hedge round: locate, sample, predict, update.

    Only the matched cell's state changes. Returns the issued label and
    the index of the learner that was followed.
    """
    cell, q = ch_arrive(state, context)
    i = _sample(q, rng)
    losses = [int(p != true_label) for p in predictions]
    ch_update(state, cell, losses)
    return predictions[i], i


def audit_hedge_bound(T: int, M: int) -> float:
    """Pseudo-regret ceiling 2*sqrt(T*ln M) for anytime hedge."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    return 2.0 * math.sqrt(T * math.log(M))


def audit_ch_bound(T: int, M: int, m_el: int, d_el: int) -> float:
    """Contextual pseudo-regret ceiling 2*sqrt(T*m_el^d_el*ln M)."""
    if m_el < 1 or d_el < 1:
        raise ValueError("m_el and d_el must be >= 1")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    return 2.0 * math.sqrt(T * m_el**d_el * math.log(M))


def hedge_q_trajectory(loss_matrix) -> np.ndarray:
    """Full q trajectory of anytime hedge on a (T, M) 0/1 loss matrix.

    The distribution is a deterministic function of past losses, which is
    what makes exact pseudo-regret computable without Monte-Carlo.
    """
    losses = np.asarray(loss_matrix, dtype=float)
    T, M = losses.shape
    if M == 1:
        return np.ones((T, 1))
    prior = np.vstack([np.zeros((1, M)), np.cumsum(losses, axis=0)[:-1]])
    eta = np.sqrt(math.log(M) / np.arange(1, T + 1, dtype=float))
    w = -eta[:, None] * prior
    w -= w.max(axis=1, keepdims=True)
    q = np.exp(w)
    return q / q.sum(axis=1, keepdims=True)


def ch_q_trajectory(loss_matrix, contexts, partition: Partition) -> tuple[np.ndarray, np.ndarray]:
    """q trajectory of contextual hedge plus the flat cell id per round.

    Each cell runs an independent anytime hedge clocked by its own arrival
    count, so the trajectory restricted to one cell equals plain hedge on
    that cell's loss subsequence.
    """
    losses = np.asarray(loss_matrix, dtype=float)
    T, M = losses.shape
    cells = cells_of(contexts, partition)
    q = np.empty((T, M))
    for flat in np.unique(cells):
        rows = np.flatnonzero(cells == flat)
        q[rows] = hedge_q_trajectory(losses[rows])
    return q, cells
