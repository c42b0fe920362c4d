"""Intersectional group fairness auditing.

Enumerates intersectional sensitive groups (including abstract ``+`` groups),
computes oriented per-group deficiencies, and scores models with Differential
Fairness and alpha-intersectional fairness.
"""

from ifaudit.errors import (
    AuditError,
    ConfigMismatchError,
    NoScorableGroupsError,
    ValidationError,
)
from ifaudit.lattice import (
    WILDCARD,
    GroupLattice,
    SensitiveAxis,
    enumerate_groups,
    format_key,
    group_members,
    matches,
    parse_key,
)
from ifaudit.measures import (
    ConfusionCounts,
    GroupMeasureTable,
    LabeledPredictions,
    MeasureKind,
    balanced_accuracy,
    build_measure_table,
    confusion_counts,
    deficiency,
    rate,
)
from ifaudit.metrics import (
    FairnessScores,
    PairScore,
    alpha_sweep,
    df_score,
    extreme_groups,
    if_alpha,
    pair_score,
    score_table,
)
from ifaudit.comparison import (
    ComparisonVerdict,
    EfficiencyCase,
    EfficiencyKind,
    classify_efficiency_case,
    compare_evaluations,
    crossover_alpha,
)
from ifaudit.config import AuditConfig, BootstrapConfig
from ifaudit.engine import AuditReport, ModelEvaluation, axis_sweep, bootstrap_ci, run_audit

__version__ = "0.1.0"

__all__ = [
    "WILDCARD",
    "AuditConfig",
    "AuditError",
    "AuditReport",
    "BootstrapConfig",
    "ComparisonVerdict",
    "ConfigMismatchError",
    "ConfusionCounts",
    "EfficiencyCase",
    "EfficiencyKind",
    "FairnessScores",
    "GroupLattice",
    "GroupMeasureTable",
    "LabeledPredictions",
    "MeasureKind",
    "ModelEvaluation",
    "NoScorableGroupsError",
    "PairScore",
    "SensitiveAxis",
    "ValidationError",
    "alpha_sweep",
    "axis_sweep",
    "balanced_accuracy",
    "bootstrap_ci",
    "build_measure_table",
    "classify_efficiency_case",
    "compare_evaluations",
    "confusion_counts",
    "crossover_alpha",
    "deficiency",
    "df_score",
    "enumerate_groups",
    "extreme_groups",
    "format_key",
    "group_members",
    "if_alpha",
    "matches",
    "pair_score",
    "parse_key",
    "rate",
    "run_audit",
    "score_table",
]
