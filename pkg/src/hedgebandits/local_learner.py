"""Per-cell UCB index learner over a finite set of prediction rules.

Each local learner partitions its instance space into hypercubes
(:mod:`hedgebandits.partition`) and keeps, per (cell, rule), a pull count
and a sample-mean accuracy. Rule selection maximizes an optimistic index:
the sample mean plus an inflation term that shrinks with the pull count.
Feedback is bandit by default (only the selected rule's statistics are
updated); a full-information mode is available for rule sets whose rewards
are all observable from the label alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .partition import CellId, Partition, cell_of

__all__ = [
    "MALIGNANT",
    "BENIGN",
    "LLConfig",
    "LLState",
    "ConfidenceReport",
    "index",
    "select",
    "select_binary",
    "update",
    "confidence_epsilon",
    "approximation_gap",
    "audit_regret_bound",
    "state_to_dict",
    "state_from_dict",
]

MALIGNANT = "M"
BENIGN = "B"


@dataclass(frozen=True)
class LLConfig:
    """Static configuration of one local learner."""

    rule_count: int
    dim: int
    horizon: int
    m: int
    alpha: float = 2.0
    hoelder_L: float = 1.0
    hyper: float = 1.0  # binary-label decision tilt; never touches statistics
    full_information: bool = False

    def __post_init__(self):
        if self.rule_count < 1:
            raise ValueError(f"rule_count must be >= 1, got {self.rule_count}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.hoelder_L < 0:
            raise ValueError(f"hoelder_L must be >= 0, got {self.hoelder_L}")
        if self.hyper <= 0:
            raise ValueError(f"hyper must be > 0, got {self.hyper}")


class _CellStats:
    """Pull counts and success counts for one visited cell.

    Sample means are derived as successes/count so that mean*count is an
    integer by construction and mean comparisons are exact.
    """

    __slots__ = ("counts", "successes")

    def __init__(self, rule_count: int):
        self.counts = [0] * rule_count
        self.successes = [0] * rule_count

    def mean(self, rule: int) -> float:
        n = self.counts[rule]
        return self.successes[rule] / n if n else 0.0

    def means(self) -> list[float]:
        return [self.mean(f) for f in range(len(self.counts))]


def _log_constant(rule_count: int, m: int, dim: int, horizon: int) -> float:
    # normalization inside the inflation term: 1 + 2*ln(2*|F|*m^d*T^(3/2))
    return 1.0 + 2.0 * math.log(2.0 * rule_count * float(m) ** dim * horizon**1.5)


class LLState:
    """Mutable learning state: sparse per-cell, per-rule statistics.

    Cells are materialized on first visit, so memory scales with the number
    of distinct cells seen rather than with m^dim.
    """

    def __init__(self, config: LLConfig):
        self.config = config
        self.partition = Partition(dim=config.dim, m=config.m)
        self.cells: dict[int, _CellStats] = {}
        self._beta = _log_constant(config.rule_count, config.m, config.dim, config.horizon)

    def stats_at(self, cell: CellId) -> _CellStats:
        st = self.cells.get(cell.flat)
        if st is None:
            st = _CellStats(self.config.rule_count)
            self.cells[cell.flat] = st
        return st

    def visit_count(self, cell: CellId) -> int:
        st = self.cells.get(cell.flat)
        return sum(st.counts) if st is not None else 0


def index(state: LLState, cell: CellId, rule: int) -> float:
    """Optimistic accuracy index of ``rule`` in ``cell``; +inf when unpulled."""
    st = state.cells.get(cell.flat)
    n = st.counts[rule] if st is not None else 0
    if n == 0:
        return math.inf
    return st.successes[rule] / n + math.sqrt(2.0 * state._beta / n)


def _select_in_cell(state: LLState, cell: CellId, rng) -> tuple[int, bool]:
    """Argmax of the index with uniform random tie-breaking.

    Returns (rule, exploit). The step counts as exploitation when the
    chosen rule also maximizes the sample mean; a cell with no pulls at
    all is exploratory by definition.
    """
    st = state.cells.get(cell.flat)
    if st is None or not any(st.counts):
        rule = int(rng.integers(state.config.rule_count))
        return rule, False
    best, ties = -math.inf, []
    for f in range(state.config.rule_count):
        n = st.counts[f]
        g = math.inf if n == 0 else st.successes[f] / n + math.sqrt(2.0 * state._beta / n)
        if g > best:
            best, ties = g, [f]
        elif g == best:
            ties.append(f)
    rule = ties[0] if len(ties) == 1 else int(ties[rng.integers(len(ties))])
    means = st.means()
    return rule, means[rule] == max(means)


def select(state: LLState, x, rng) -> tuple[int, bool]:
    """Pick a rule for instance ``x``: (rule id, exploit flag)."""
    return _select_in_cell(state, cell_of(x, state.partition), rng)


def _binary_in_cell(state: LLState, cell: CellId) -> tuple[str, int, bool]:
    """Two-rule label decision: malignant iff hyper*g_malignant >= g_benign.

    Rule 0 always predicts malignant, rule 1 always predicts benign; ties
    go to malignant. Returns (label, rule, exploit).
    """
    if state.config.rule_count != 2:
        raise ValueError("binary selection requires exactly 2 prediction rules")
    st = state.cells.get(cell.flat)
    if st is None:
        return MALIGNANT, 0, False
    n1, n2 = st.counts
    if n1 == 0 and n2 == 0:
        return MALIGNANT, 0, False
    beta2 = 2.0 * state._beta
    mean1 = st.successes[0] / n1 if n1 else 0.0
    mean2 = st.successes[1] / n2 if n2 else 0.0
    g1 = math.inf if n1 == 0 else mean1 + math.sqrt(beta2 / n1)
    g2 = math.inf if n2 == 0 else mean2 + math.sqrt(beta2 / n2)
    if state.config.hyper * g1 >= g2:
        return MALIGNANT, 0, mean1 >= mean2
    return BENIGN, 1, mean2 >= mean1


def select_binary(state: LLState, x) -> str:
    """Label prediction for the two-constant-rule binary configuration."""
    label, _, _ = _binary_in_cell(state, cell_of(x, state.partition))
    return label


def update(state: LLState, cell: CellId, rule: int, reward: int) -> None:
    """Fold one 0/1 reward into the chosen (cell, rule) statistics."""
    if reward not in (0, 1):
        raise ValueError(f"reward must be 0 or 1, got {reward!r}")
    st = state.stats_at(cell)
    st.counts[rule] += 1
    st.successes[rule] += reward


@dataclass(frozen=True)
class ConfidenceReport:
    epsilon: float
    coverage_level: float


def approximation_gap(config: LLConfig) -> float:
    """Deterministic accuracy loss from pooling a cell: 2*L*d^(a/2)*T^(-a/(2a+d))."""
    a, d = config.alpha, config.dim
    return 2.0 * config.hoelder_L * d ** (a / 2.0) * config.horizon ** (-a / (2.0 * a + d))


def confidence_epsilon(state: LLState, cell: CellId, rule: int) -> ConfidenceReport:
    """Suboptimality radius of the chosen rule, valid with prob. >= 1 - 1/T.

    Combines the estimation radius sqrt((8/N)*(normalization)) with the
    approximation gap of the partition. Undefined until the rule has been
    pulled at least once in the cell.
    """
    st = state.cells.get(cell.flat)
    n = st.counts[rule] if st is not None else 0
    if n == 0:
        raise ValueError("confidence is undefined for an unpulled (cell, rule) pair")
    eps = math.sqrt(8.0 * state._beta / n) + approximation_gap(state.config)
    return ConfidenceReport(epsilon=eps, coverage_level=1.0 - 1.0 / state.config.horizon)


def audit_regret_bound(config: LLConfig) -> float:
    """Closed-form regret ceiling for the tuned granularity.

    Evaluates T^((a+d)/(2a+d))*C + T^(d/(2a+d))*2^d*|F| + 1 with
    C = 2*A_m*sqrt(|F|)*2^(d/2) + 2*L*d^(a/2) and
    A_m = 2*sqrt(2*(normalization)). Values above T mean the guarantee is
    vacuous for that configuration.
    """
    a, d, F, T = config.alpha, config.dim, config.rule_count, config.horizon
    beta = _log_constant(F, config.m, d, T)
    a_m = 2.0 * math.sqrt(2.0 * beta)
    c = 2.0 * a_m * math.sqrt(F) * 2.0 ** (d / 2.0) + 2.0 * config.hoelder_L * d ** (a / 2.0)
    return T ** ((a + d) / (2.0 * a + d)) * c + T ** (d / (2.0 * a + d)) * 2.0**d * F + 1.0


def state_to_dict(state: LLState) -> dict:
    """Snapshot of config and visited-cell statistics (JSON-ready)."""
    cfg = state.config
    return {
        "config": {
            "rule_count": cfg.rule_count,
            "dim": cfg.dim,
            "horizon": cfg.horizon,
            "m": cfg.m,
            "alpha": cfg.alpha,
            "hoelder_L": cfg.hoelder_L,
            "hyper": cfg.hyper,
            "full_information": cfg.full_information,
        },
        "cells": {
            str(flat): {"counts": list(st.counts), "successes": list(st.successes)}
            for flat, st in sorted(state.cells.items())
        },
    }


def state_from_dict(payload: dict) -> LLState:
    """Rebuild an LLState from a snapshot produced by state_to_dict."""
    state = LLState(LLConfig(**payload["config"]))
    for flat, entry in payload["cells"].items():
        st = _CellStats(state.config.rule_count)
        st.counts = [int(c) for c in entry["counts"]]
        st.successes = [int(s) for s in entry["successes"]]
        state.cells[int(flat)] = st
    return state
