"""End-to-end audits: lattice, measure tables, scores, bootstrap and axis sweeps."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ifaudit.config import AuditConfig
from ifaudit.errors import ValidationError
from ifaudit.lattice import GroupLattice, enumerate_groups
from ifaudit.measures import (
    GroupMeasureTable,
    LabeledPredictions,
    MeasureKind,
    balanced_accuracy,
    build_measure_table,
    cell_codes,
    confusion_counts,
    counts_from_codes,
    deficiency_array,
)
from ifaudit.metrics import FairnessScores, alpha_label, score_table, scores_from_array

log = logging.getLogger(__name__)

FORMAT_VERSION = "1.0"
UNRELIABLE_DROP_FRACTION = 0.5


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile intervals for DF and every grid IF over resampled replicas.

    Replicas with fewer than two scorable groups are dropped; the interval is
    flagged unreliable when more than half were dropped.
    """

    replicas: int
    dropped: int
    levels: tuple[float, float]
    stratified: bool
    intervals: tuple[tuple[str, Optional[float], Optional[float]], ...]

    @property
    def kept(self) -> int:
        return self.replicas - self.dropped

    @property
    def unreliable(self) -> bool:
        return self.dropped > UNRELIABLE_DROP_FRACTION * self.replicas

    def interval(self, name: str) -> tuple[Optional[float], Optional[float]]:
        for label, lo, hi in self.intervals:
            if label == name:
                return lo, hi
        raise KeyError(name)


@dataclass(frozen=True)
class ModelEvaluation:
    """One model's audit for one measure kind."""

    model: str
    kind: MeasureKind
    table: GroupMeasureTable
    scores: FairnessScores
    balanced_accuracy: Optional[float]
    bootstrap: Optional[BootstrapResult] = None

    @property
    def worst_group_rate(self) -> float:
        return self.kind.worst_rate(self.scores.m_max)

    def summary_row(self) -> dict:
        """Summary columns: utility, worst-off rate, DF, IF_0.5 and the grid."""
        row = {
            "model": self.model,
            "measure": self.kind.value,
            "balanced_accuracy": self.balanced_accuracy,
            "worst_group_rate": self.worst_group_rate,
            "DF": self.scores.df,
            "IF_0.5": self.scores.if_at(0.5),
        }
        for a, v in self.scores.if_curve:
            row.setdefault(alpha_label(a), v)
        return row


@dataclass(frozen=True)
class AuditReport:
    config: AuditConfig
    n_rows: int
    evaluations: tuple[ModelEvaluation, ...]
    format_version: str = FORMAT_VERSION

    @property
    def lattice(self) -> GroupLattice:
        return self.evaluations[0].table.lattice

    def evaluation(self, kind) -> ModelEvaluation:
        kind = MeasureKind.parse(kind)
        for ev in self.evaluations:
            if ev.kind is kind:
                return ev
        raise KeyError(kind.value)


def _check_data(data: LabeledPredictions, config: AuditConfig) -> None:
    if len(data) == 0:
        raise ValidationError("dataset is empty")
    if data.assignments.ndim != 2 or data.assignments.shape[1] != len(config.axes):
        raise ValidationError(
            f"data has {data.assignments.shape[-1]} sensitive columns, config declares {len(config.axes)}"
        )


def run_audit(data: LabeledPredictions, config: AuditConfig) -> AuditReport:
    _check_data(data, config)
    lattice = enumerate_groups(config.axes)
    overall = confusion_counts(data, np.arange(len(data)))
    utility = balanced_accuracy(overall)
    boot = bootstrap_ci(data, config, lattice) if config.bootstrap.replicas > 0 else {}

    evaluations = []
    for kind in config.measures:
        table = build_measure_table(
            data,
            lattice,
            kind,
            smoothing=config.smoothing,
            min_group_size=config.min_group_size,
            clamp=config.clamp,
        )
        scores = score_table(table, config.alpha_grid)
        evaluations.append(ModelEvaluation(config.model, kind, table, scores, utility, boot.get(kind)))
    return AuditReport(config=config, n_rows=len(data), evaluations=tuple(evaluations))


def _replica_rng(seed: int, replica: int) -> np.random.Generator:
    # one independent stream per replica: results do not depend on scheduling order
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))


def bootstrap_ci(
    data: LabeledPredictions, config: AuditConfig, lattice: Optional[GroupLattice] = None
) -> dict[MeasureKind, BootstrapResult]:
    """Row-resampling percentile intervals for DF and IF over the alpha grid."""
    bc = config.bootstrap
    if bc.replicas < 1 or bc.seed is None:
        raise ValidationError("bootstrap needs replicas >= 1 and a seed")
    _check_data(data, config)
    lattice = lattice or enumerate_groups(config.axes)
    codes = cell_codes(data, lattice)
    n = len(codes)
    cells = codes // 4
    strata = [np.flatnonzero(cells == c) for c in np.unique(cells)] if bc.stratified else None

    grid = config.alpha_grid
    samples = {k: [] for k in config.measures}
    for i in range(bc.replicas):
        rng = _replica_rng(bc.seed, i)
        if strata is None:
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.concatenate([s[rng.integers(0, len(s), size=len(s))] for s in strata])
        counts = counts_from_codes(codes[rows], lattice)
        for kind in config.measures:
            m = deficiency_array(kind, counts, config.smoothing, config.min_group_size)
            samples[kind].append(scores_from_array(m, grid, config.clamp))

    names = ["DF"] + [alpha_label(a) for a in grid]
    out = {}
    for kind, results in samples.items():
        kept = [np.concatenate(([df], ifs)) for df, ifs in (r for r in results if r is not None)]
        dropped = bc.replicas - len(kept)
        if kept:
            bounds = np.percentile(np.vstack(kept), bc.levels, axis=0)
            intervals = tuple((name, float(lo), float(hi)) for name, lo, hi in zip(names, *bounds))
        else:
            intervals = tuple((name, None, None) for name in names)
        result = BootstrapResult(bc.replicas, dropped, bc.levels, bc.stratified, intervals)
        if result.unreliable:
            log.warning("%s bootstrap unreliable: %d of %d replicas dropped", kind.value, dropped, bc.replicas)
        out[kind] = result
    return out


def axis_sweep(data: LabeledPredictions, config: AuditConfig) -> list[AuditReport]:
    """Re-audit on each prefix of the configured axis order, k = 1..p."""
    _check_data(data, config)
    return [run_audit(data.restrict_axes(k), config.prefix(k)) for k in range(1, len(config.axes) + 1)]

