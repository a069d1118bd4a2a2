"""Round generators for online evaluation.

Two kinds of world produce the per-step tuples (instances, label, per-rule
rewards): a synthetic world whose rule accuracies are known functions,
enabling exact oracles and regret audits, and a dataset world that replays
ingested rows with constant-label prediction rules. A corruption transform
degrades the feedback labels without touching the clean labels used for
scoring.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .partition import Partition  # noqa: F401  (re-exported context for callers)

__all__ = [
    "UnsupportedOracleError",
    "PredictionRule",
    "Round",
    "SyntheticWorld",
    "DatasetWorld",
    "draw_round",
    "local_oracle",
    "corrupt_labels",
    "default_synthetic_world",
    "synthetic_world_from_spec",
    "synthetic_world_spec",
    "certify_hoelder",
]


class UnsupportedOracleError(RuntimeError):
    """Raised when an exact-accuracy query reaches a world without one."""


@dataclass(frozen=True)
class PredictionRule:
    """Either a constant-label classifier or a stochastic rule with a known
    accuracy function over the instance space."""

    rule_id: int
    kind: str  # "constant" | "stochastic"
    label: object = None
    accuracy: object = None  # callable x -> [0,1] for the stochastic kind

    def __post_init__(self):
        if self.kind not in ("constant", "stochastic"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "constant" and self.label is None:
            raise ValueError("constant rule needs a label")
        if self.kind == "stochastic" and not callable(self.accuracy):
            raise ValueError("stochastic rule needs an accuracy function")


_UNSET = object()


@dataclass
class Round:
    """Everything one time step exposes to the learners and the scorer.

    ``feedback_label`` is what the learners observe (None means missing);
    ``true_label`` is what the metrics are scored against.
    """

    instances: list
    true_label: object
    rule_rewards: list  # per learner, 0/1 array aligned with its rules
    rule_predictions: list  # per learner, label per rule
    el_context: object = None
    feedback_label: object = _UNSET

    def __post_init__(self):
        if self.feedback_label is _UNSET:
            self.feedback_label = self.true_label

    def reward(self, learner: int, rule: int) -> int:
        return int(self.rule_rewards[learner][rule])


class SyntheticWorld:
    """World with known Hoelder-continuous accuracy functions per rule.

    The label alphabet is {0, 1} with the truth fixed at 1: a rule's
    prediction equals 1 exactly when its coupled Bernoulli trial succeeds,
    so reward and prediction correctness coincide by construction. Each
    learner's rules share one uniform draw per round, which couples their
    rewards monotonically in accuracy.
    """

    def __init__(self, dims, rules, alpha: float, hoelder_L: float, el_dim: int | None = None):
        self.dims = list(dims)
        self.rules = [list(r) for r in rules]
        if len(self.rules) != len(self.dims):
            raise ValueError("need one rule list per learner")
        for rl in self.rules:
            for r in rl:
                if r.kind != "stochastic":
                    raise ValueError("synthetic worlds use stochastic rules")
        self.alpha = float(alpha)
        self.hoelder_L = float(hoelder_L)
        self.el_dim = el_dim
        self.labels = (0, 1)

    @property
    def n_learners(self) -> int:
        return len(self.dims)

    def accuracy(self, learner: int, rule: int, x) -> float:
        return float(self.rules[learner][rule].accuracy(np.asarray(x, dtype=float)))

    def best_rule(self, learner: int, x) -> tuple[int, float]:
        """Exact argmax of accuracy at x; ties go to the lowest rule id."""
        best_f, best_pi = 0, -1.0
        for f in range(len(self.rules[learner])):
            pi = self.accuracy(learner, f, x)
            if pi > best_pi:
                best_f, best_pi = f, pi
        return best_f, best_pi

    def draw_round(self, rng) -> Round:
        instances, rewards, preds = [], [], []
        for i, d in enumerate(self.dims):
            x = rng.random(d)
            u = rng.random()  # shared across this learner's rules
            r = np.fromiter(
                (1 if u <= self.accuracy(i, f, x) else 0 for f in range(len(self.rules[i]))),
                dtype=np.int64,
                count=len(self.rules[i]),
            )
            instances.append(x)
            rewards.append(r)
            preds.append([int(v) for v in r])
        ctx = rng.random(self.el_dim) if self.el_dim else None
        return Round(
            instances=instances,
            true_label=1,
            rule_rewards=rewards,
            rule_predictions=preds,
            el_context=ctx,
        )


class DatasetWorld:
    """World replaying normalized dataset rows with constant-label rules.

    Every learner has rule 0 = always predict the positive label and
    rule 1 = always predict the negative label, so a rule's reward is
    simply whether its label matches the ground truth.
    """

    def __init__(self, dataset, assignment, pool=None):
        self.dataset = dataset
        self.assignment = assignment
        self.pool = np.arange(dataset.n_rows) if pool is None else np.asarray(pool)
        if len(self.pool) == 0:
            raise ValueError("empty instance pool")
        self.labels = (dataset.positive_label, dataset.negative_label)
        self.rules = [
            [
                PredictionRule(0, "constant", label=dataset.positive_label),
                PredictionRule(1, "constant", label=dataset.negative_label),
            ]
            for _ in assignment.ll_features
        ]
        self._slices = [dataset.features[:, idx] for idx in assignment.ll_features]
        self._el_slice = (
            dataset.features[:, assignment.el_features] if len(assignment.el_features) else None
        )

    @property
    def n_learners(self) -> int:
        return len(self.rules)

    def round_for_row(self, row: int) -> Round:
        y = self.dataset.labels[row]
        pos, neg = self.labels
        r = np.array([int(y == pos), int(y == neg)], dtype=np.int64)
        return Round(
            instances=[sl[row] for sl in self._slices],
            true_label=y,
            rule_rewards=[r] * self.n_learners,
            rule_predictions=[[pos, neg]] * self.n_learners,
            el_context=self._el_slice[row] if self._el_slice is not None else None,
        )

    def draw_round(self, rng) -> Round:
        return self.round_for_row(int(self.pool[rng.integers(len(self.pool))]))


def draw_round(world, rng) -> Round:
    """Draw one i.i.d. round from the world's instance distribution."""
    return world.draw_round(rng)


def local_oracle(world, learner: int, x) -> tuple[int, float]:
    """Exact best rule and its accuracy; synthetic worlds only."""
    if not isinstance(world, SyntheticWorld):
        raise UnsupportedOracleError("local oracle requires known accuracy functions")
    return world.best_rule(learner, x)


def corrupt_labels(stream, missing_rate: float, flip_rate: float, rng, labels):
    """Degrade the feedback labels of a round stream.

    Per round, with probability ``missing_rate`` the feedback label is
    dropped (learners skip their updates), otherwise with probability
    ``flip_rate`` it is flipped to the other label of the binary alphabet.
    The clean true label is left untouched for scoring.
    """
    if not (0.0 <= missing_rate <= 1.0 and 0.0 <= flip_rate <= 1.0):
        raise ValueError("rates must lie in [0,1]")
    if missing_rate + flip_rate > 1.0:
        raise ValueError("missing_rate + flip_rate must not exceed 1")
    a, b = labels
    swap = {a: b, b: a}
    for rnd in stream:
        u = rng.random()
        if u < missing_rate:
            yield dataclasses.replace(rnd, feedback_label=None)
        elif u < missing_rate + flip_rate:
            yield dataclasses.replace(rnd, feedback_label=swap[rnd.true_label])
        else:
            yield dataclasses.replace(rnd, feedback_label=rnd.true_label)


def _affine_mean(intercept: float, slope: float):
    def accuracy(x):
        return intercept + slope * float(np.mean(x))

    return accuracy


def default_synthetic_world(d: int = 1, alpha: float = 1.0, n_learners: int = 1) -> SyntheticWorld:
    """Two-rule benchmark world with a known accuracy crossing.

    Rule 0 has accuracy 0.5 + 0.4*mean(x), rule 1 has 0.9 - 0.4*mean(x);
    the best rule switches at mean(x) = 0.5 and the declared constant
    L = 0.4*d^(1-alpha/2) is certified empirically.
    """
    rules = [
        [
            PredictionRule(0, "stochastic", accuracy=_affine_mean(0.5, 0.4)),
            PredictionRule(1, "stochastic", accuracy=_affine_mean(0.9, -0.4)),
        ]
        for _ in range(n_learners)
    ]
    L = 0.4 * d ** (1.0 - alpha / 2.0)
    return SyntheticWorld(dims=[d] * n_learners, rules=rules, alpha=alpha, hoelder_L=L)


def synthetic_world_from_spec(spec: dict) -> SyntheticWorld:
    """Build a synthetic world from its JSON description.

    Schema: {"dims": [int], "alpha": float, "hoelder_L": float,
    "el_dim": int|null, "rules": [[{"kind": "affine_mean",
    "intercept": float, "slope": float}, ...], ...]} with one inner rule
    list per learner.
    """
    rules = []
    for learner_rules in spec["rules"]:
        built = []
        for rid, r in enumerate(learner_rules):
            if r["kind"] != "affine_mean":
                raise ValueError(f"unknown accuracy form {r['kind']!r}")
            lo, hi = sorted((r["intercept"], r["intercept"] + r["slope"]))
            if lo < 0.0 or hi > 1.0:
                raise ValueError("accuracy function leaves [0,1]")
            built.append(
                PredictionRule(rid, "stochastic", accuracy=_affine_mean(r["intercept"], r["slope"]))
            )
        rules.append(built)
    return SyntheticWorld(
        dims=spec["dims"],
        rules=rules,
        alpha=spec["alpha"],
        hoelder_L=spec["hoelder_L"],
        el_dim=spec.get("el_dim"),
    )


def synthetic_world_spec(d: int = 1, alpha: float = 1.0, n_learners: int = 1) -> dict:
    """JSON description of the default benchmark world."""
    return {
        "dims": [d] * n_learners,
        "alpha": alpha,
        "hoelder_L": 0.4 * d ** (1.0 - alpha / 2.0),
        "el_dim": None,
        "rules": [
            [
                {"kind": "affine_mean", "intercept": 0.5, "slope": 0.4},
                {"kind": "affine_mean", "intercept": 0.9, "slope": -0.4},
            ]
            for _ in range(n_learners)
        ],
    }


def certify_hoelder(world: SyntheticWorld, n_pairs: int = 10_000, rng=None) -> float:
    """Worst excess of |pi(x)-pi(x')| over L*||x-x'||^alpha on random pairs.

    Non-positive means the declared (L, alpha) pair held on every sampled
    pair and every rule.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    worst = -np.inf
    for i, d in enumerate(world.dims):
        for f in range(len(world.rules[i])):
            xs = rng.random((n_pairs, d))
            ys = rng.random((n_pairs, d))
            for x, y in zip(xs, ys):
                gap = abs(world.accuracy(i, f, x) - world.accuracy(i, f, y))
                allowed = world.hoelder_L * float(np.linalg.norm(x - y)) ** world.alpha
                worst = max(worst, gap - allowed)
    return float(worst)
