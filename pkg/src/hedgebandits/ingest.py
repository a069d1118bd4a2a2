"""Breast-cancer dataset ingestion and per-run randomization.

Reads the UCI diagnostic layout (32 comma-separated fields: id, diagnosis
as M/B, then 30 real-valued attributes), min-max normalizes every feature
to [0,1] over the full file, and provides the per-run randomizations the
experiments need: disjoint feature assignment to the local learners,
context feature selection for the ensemble, and i.i.d. resampling with
replacement up to the evaluation horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .environment import DatasetWorld

__all__ = [
    "Dataset",
    "Assignment",
    "load_wdbc",
    "bundled_wdbc_path",
    "assign_features",
    "resample_rows",
    "resample_stream",
    "dump_normalized",
]

N_FEATURES = 30
POSITIVE = "M"  # malignant
NEGATIVE = "B"  # benign


SCHEMES = ("minmax", "rank")


@dataclass
class Dataset:
    """Normalized rows plus the statistics used to normalize them."""

    ids: list
    labels: np.ndarray  # "M"/"B" per row
    features: np.ndarray  # (n_rows, 30) in [0,1]
    feature_min: np.ndarray
    feature_max: np.ndarray
    scheme: str = "minmax"
    positive_label: str = POSITIVE
    negative_label: str = NEGATIVE

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _minmax(raw: np.ndarray) -> np.ndarray:
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    out = np.zeros_like(raw)
    nonzero = span > 0
    out[:, nonzero] = (raw[:, nonzero] - lo[nonzero]) / span[nonzero]
    # zero-range columns stay 0 by convention
    return out


def _rank(raw: np.ndarray) -> np.ndarray:
    """Average-rank transform per column, scaled into (0, 1).

    Centers every feature's median at 0.5 regardless of skew, so an
    even-sided grid splits each feature near its median. Idempotent: ranks
    of ranks are the ranks themselves.
    """
    n = raw.shape[0]
    out = np.empty_like(raw, dtype=float)
    for j in range(raw.shape[1]):
        _, inverse, counts = np.unique(raw[:, j], return_inverse=True, return_counts=True)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        avg_rank = starts + (counts + 1) / 2.0  # 1-based, ties averaged
        out[:, j] = (avg_rank[inverse] - 0.5) / n
    return out


def load_wdbc(path, scheme: str = "minmax") -> Dataset:
    """Parse a file in the UCI diagnostic layout and normalize it.

    ``scheme`` selects the normalization: "minmax" (default) maps each
    feature's observed range onto [0,1]; "rank" uses the average-rank
    transform, which is robust to skewed attribute scales. Malformed rows
    (wrong field count, non-numeric attribute, unknown diagnosis) raise
    ValueError naming the offending line.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown normalization scheme {scheme!r}; choose one of {SCHEMES}")
    ids: list = []
    labels: list = []
    rows: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 2 + N_FEATURES:
                raise ValueError(
                    f"line {lineno}: expected {2 + N_FEATURES} fields, got {len(fields)}"
                )
            if fields[1] not in (POSITIVE, NEGATIVE):
                raise ValueError(f"line {lineno}: unknown diagnosis {fields[1]!r}")
            try:
                values = [float(v) for v in fields[2:]]
            except ValueError as exc:
                raise ValueError(f"line {lineno}: non-numeric attribute ({exc})") from None
            ids.append(fields[0])
            labels.append(fields[1])
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    raw = np.asarray(rows, dtype=float)
    feats = _minmax(raw) if scheme == "minmax" else _rank(raw)
    return Dataset(
        ids=ids,
        labels=np.asarray(labels, dtype=object),
        features=feats,
        feature_min=raw.min(axis=0),
        feature_max=raw.max(axis=0),
        scheme=scheme,
    )


def bundled_wdbc_path() -> Path:
    """Location of the packaged copy of the diagnostic dataset."""
    return Path(resources.files("hedgebandits").joinpath("data/wdbc.csv"))


@dataclass
class Assignment:
    """Disjoint feature index lists per learner plus the ensemble context."""

    ll_features: list  # list of index lists, pairwise disjoint
    el_features: list  # context feature indices for the ensemble

    def __post_init__(self):
        seen: set[int] = set()
        for idx in self.ll_features:
            overlap = seen.intersection(idx)
            if overlap:
                raise ValueError(f"learners share features {sorted(overlap)}")
            seen.update(idx)


def assign_features(dataset: Dataset, M: int, d_i: int, d_el: int, rng, el_disjoint: bool = False) -> Assignment:
    """Randomly split features among learners and pick the context set.

    Learner lists are pairwise disjoint; the ensemble's context features
    are drawn from the full set by default (set ``el_disjoint`` to sample
    them from the leftover features only).
    """
    n = dataset.n_features
    if M * d_i > n:
        raise ValueError(f"{M} learners x {d_i} features exceed the {n} available")
    if d_el > n:
        raise ValueError(f"d_el={d_el} exceeds the {n} available features")
    perm = rng.permutation(n)
    ll = [sorted(int(j) for j in perm[i * d_i : (i + 1) * d_i]) for i in range(M)]
    if d_el == 0:
        el: list[int] = []
    elif el_disjoint:
        leftover = perm[M * d_i :]
        if d_el > len(leftover):
            raise ValueError(f"d_el={d_el} exceeds the {len(leftover)} unassigned features")
        el = sorted(int(j) for j in rng.choice(leftover, size=d_el, replace=False))
    else:
        el = sorted(int(j) for j in rng.choice(n, size=d_el, replace=False))
    return Assignment(ll_features=ll, el_features=el)


def resample_rows(dataset: Dataset, T: int, rng, holdout: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Row indices for T i.i.d. draws with replacement, plus the pool drawn from.

    ``holdout`` removes that fraction of rows (rounded up, drawn at random)
    from the eligible pool first, mirroring a train split consumed by
    offline baselines.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    n = dataset.n_rows
    if holdout is None or holdout == 0:
        pool = np.arange(n)
    else:
        if not 0 < holdout < 1:
            raise ValueError(f"holdout fraction must be in (0,1), got {holdout}")
        n_held = int(np.ceil(n * holdout))
        if n_held >= n:
            raise ValueError("holdout leaves an empty pool")
        held = rng.choice(n, size=n_held, replace=False)
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        pool = np.flatnonzero(mask)
    rows = pool[rng.integers(0, len(pool), size=T)]
    return rows, pool


def resample_stream(dataset: Dataset, assignment: Assignment, T: int, rng, holdout: float | None = None):
    """T rounds drawn i.i.d. with replacement from the eligible pool."""
    rows, pool = resample_rows(dataset, T, rng, holdout)
    world = DatasetWorld(dataset, assignment, pool=pool)
    return [world.round_for_row(int(r)) for r in rows]


def dump_normalized(dataset: Dataset, path) -> None:
    """Write the normalized table (id, diagnosis, 30 features) as CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(dataset.n_rows):
            feats = ",".join(repr(float(v)) for v in dataset.features[i])
            fh.write(f"{dataset.ids[i]},{dataset.labels[i]},{feats}\n")
