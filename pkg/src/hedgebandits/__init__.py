"""Contextual bandit local learners fused by exponential-weights ensembles.

Local learners run a per-cell UCB index over their prediction rules on a
hypercube partition of their instance space; an ensemble learner fuses
their label predictions with anytime hedge, weighted majority, or a
contextual hedge over its own context partition. Exact regret audits check
the measured behavior against closed-form ceilings, and an experiment
harness reproduces the medical-diagnosis benchmark at desk scale.
"""

from .ensemble import (
    CHState,
    HedgeState,
    active_filter,
    ah_choose,
    ah_distribution,
    ah_update,
    audit_ch_bound,
    audit_hedge_bound,
    ch_arrive,
    ch_step,
    ch_update,
    hedge_q_trajectory,
    wm_fuse,
)
from .environment import (
    DatasetWorld,
    PredictionRule,
    Round,
    SyntheticWorld,
    UnsupportedOracleError,
    corrupt_labels,
    default_synthetic_world,
    draw_round,
    local_oracle,
)
from .experiments import ExperimentConfig, ExperimentResult, config_for_mode, run, sweep
from .ingest import Assignment, Dataset, assign_features, load_wdbc, resample_stream
from .local_learner import (
    BENIGN,
    MALIGNANT,
    ConfidenceReport,
    LLConfig,
    LLState,
    audit_regret_bound,
    confidence_epsilon,
    index,
    select,
    select_binary,
    update,
)
from .metrics import (
    RunSummary,
    classification_metrics,
    conditional_regret,
    contextual_pseudo_regret,
    exact_pseudo_regret,
    improvement_ratio,
    tune_fnr_threshold,
)
from .partition import CellId, Partition, cell_of, doubling_schedule, partitioning_parameter

__version__ = "0.1.0"
