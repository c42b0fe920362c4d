"""Per-group confusion counts, rates and oriented deficiencies.

Every measure kind is oriented so that ``m = 0`` is the best achievable value
and larger is worse; fairness scores only ever see ``m``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ifaudit.errors import NoScorableGroupsError, ValidationError
from ifaudit.lattice import GroupKey, GroupLattice, validate_assignments

DEFAULT_CLAMP = 1e-6

TOO_SMALL = "too small"
UNDEFINED_RATE = "undefined rate"

# column order of the (G, 4) count arrays
TP, FP, TN, FN = range(4)


class MeasureKind(str, enum.Enum):
    TPR_DEFICIENCY = "tpr_deficiency"
    FPR = "fpr"
    ACCURACY_DEFICIENCY = "accuracy_deficiency"

    @property
    def worst_rate_name(self) -> str:
        return {
            MeasureKind.TPR_DEFICIENCY: "min_tpr",
            MeasureKind.FPR: "max_fpr",
            MeasureKind.ACCURACY_DEFICIENCY: "min_accuracy",
        }[self]

    def worst_rate(self, m_max: float) -> float:
        """Convert the worst group's deficiency back to rate units."""
        if self is MeasureKind.FPR:
            return m_max
        return 1.0 - m_max

    @classmethod
    def parse(cls, value) -> "MeasureKind":
        if isinstance(value, cls):
            return value
        aliases = {"tpr": cls.TPR_DEFICIENCY, "accuracy": cls.ACCURACY_DEFICIENCY}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValidationError(f"unknown measure {value!r} (choose from {choices})") from None


@dataclass(frozen=True, eq=False)
class LabeledPredictions:
    """Binary labels, hard binary predictions and concrete group assignments.

    ``assignments`` is an (n, p) integer array of attribute indices.
    """

    labels: np.ndarray
    predictions: np.ndarray
    assignments: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        preds = np.asarray(self.predictions)
        assign = np.asarray(self.assignments)
        if labels.ndim != 1 or preds.ndim != 1:
            raise ValidationError("labels and predictions must be 1-d")
        if assign.ndim == 1 and assign.size == 0:
            assign = assign.reshape(0, 0)
        if not (len(labels) == len(preds) == len(assign)):
            raise ValidationError(
                f"length mismatch: {len(labels)} labels, {len(preds)} predictions, "
                f"{len(assign)} assignments"
            )
        for name, arr in (("labels", labels), ("predictions", preds)):
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValidationError(f"{name} must be strictly binary (0/1)")
        object.__setattr__(self, "labels", labels.astype(np.int8))
        object.__setattr__(self, "predictions", preds.astype(np.int8))
        object.__setattr__(self, "assignments", assign.astype(np.int64))

    def __len__(self) -> int:
        return len(self.labels)

    def equals(self, other: "LabeledPredictions") -> bool:
        return (
            np.array_equal(self.labels, other.labels)
            and np.array_equal(self.predictions, other.predictions)
            and np.array_equal(self.assignments, other.assignments)
        )

    def take(self, rows: np.ndarray) -> "LabeledPredictions":
        return LabeledPredictions(self.labels[rows], self.predictions[rows], self.assignments[rows])

    def restrict_axes(self, k: int) -> "LabeledPredictions":
        return LabeledPredictions(self.labels, self.predictions, self.assignments[:, :k])


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @classmethod
    def from_row(cls, row: Sequence[int]) -> "ConfusionCounts":
        return cls(tp=int(row[TP]), fp=int(row[FP]), tn=int(row[TN]), fn=int(row[FN]))


def confusion_counts(data: LabeledPredictions, members: Sequence[int]) -> ConfusionCounts:
    """Confusion counts over exactly the member rows."""
    idx = np.asarray(members, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= len(data)):
        raise IndexError(f"member index out of range for {len(data)} rows")
    y = data.labels[idx]
    yhat = data.predictions[idx]
    return ConfusionCounts(
        tp=int(np.sum((y == 1) & (yhat == 1))),
        fp=int(np.sum((y == 0) & (yhat == 1))),
        tn=int(np.sum((y == 0) & (yhat == 0))),
        fn=int(np.sum((y == 1) & (yhat == 0))),
    )


def rate(kind: MeasureKind, c: ConfusionCounts, smoothing: float = 0.0) -> Optional[float]:
    """Raw (optionally additively smoothed) rate, or None if undefined.

    TPR = (tp+k)/(tp+fn+2k), FPR = (fp+k)/(fp+tn+2k), accuracy = (tp+tn+k)/(n+2k).
    """
    if smoothing < 0:
        raise ValueError(f"smoothing must be non-negative, got {smoothing}")
    kind = MeasureKind.parse(kind)
    if kind is MeasureKind.TPR_DEFICIENCY:
        num, den = c.tp, c.tp + c.fn
    elif kind is MeasureKind.FPR:
        num, den = c.fp, c.fp + c.tn
    else:
        num, den = c.tp + c.tn, c.n
    den = den + 2 * smoothing
    if den == 0:
        return None
    return (num + smoothing) / den


def deficiency(kind: MeasureKind, value: Optional[float]) -> Optional[float]:
    """Orient a rate so that 0 is best: 1-TPR, FPR, 1-accuracy."""
    if value is None:
        return None
    if MeasureKind.parse(kind) is MeasureKind.FPR:
        return value
    return 1.0 - value


def balanced_accuracy(c: ConfusionCounts) -> Optional[float]:
    """(TPR + TNR) / 2, or None when either class is absent."""
    if c.positives == 0 or c.negatives == 0:
        return None
    return (c.tp / c.positives + c.tn / c.negatives) / 2


def cell_codes(data: LabeledPredictions, lattice: GroupLattice) -> np.ndarray:
    """Per-row code ``4 * concrete_cell + confusion_slot`` (cells in row-major order)."""
    cells = lattice.concrete_index(data.assignments)
    y = data.labels.astype(np.int64)
    yhat = data.predictions.astype(np.int64)
    slot = np.where(y == 1, np.where(yhat == 1, TP, FN), np.where(yhat == 1, FP, TN))
    return cells * 4 + slot


def counts_from_codes(codes: np.ndarray, lattice: GroupLattice) -> np.ndarray:
    """(|G|, 4) group counts from per-row cell codes; abstract rows sum concrete cells."""
    n_cells = int(np.prod(lattice.shape))
    concrete = np.bincount(codes, minlength=n_cells * 4).reshape(n_cells, 4)
    return lattice.membership @ concrete


def group_counts(data: LabeledPredictions, lattice: GroupLattice) -> np.ndarray:
    """(|G|, 4) tp/fp/tn/fn counts for every lattice group."""
    return counts_from_codes(cell_codes(data, lattice), lattice)


def deficiency_array(
    kind: MeasureKind,
    counts: np.ndarray,
    smoothing: float = 0.0,
    min_group_size: int = 1,
) -> np.ndarray:
    """Vectorised deficiencies for a stack of count rows; NaN marks exclusion.

    Applies the same exclusion policy as :func:`build_measure_table`.
    """
    kind = MeasureKind.parse(kind)
    counts = np.asarray(counts)
    tp, fp, tn, fn = (counts[..., i].astype(np.float64) for i in range(4))
    if kind is MeasureKind.TPR_DEFICIENCY:
        num, den = tp, tp + fn
    elif kind is MeasureKind.FPR:
        num, den = fp, fp + tn
    else:
        num, den = tp + tn, tp + fp + tn + fn
    den = den + 2 * smoothing
    size = counts.sum(axis=-1)
    ok = (den != 0) & (size >= min_group_size)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (num + smoothing) / den
    m = r if kind is MeasureKind.FPR else 1.0 - r
    return np.where(ok, m, np.nan)


@dataclass(frozen=True)
class GroupRow:
    key: GroupKey
    concrete: bool
    counts: ConfusionCounts
    rate: Optional[float]
    m: Optional[float]
    excluded_reason: Optional[str] = None

    @property
    def size(self) -> int:
        return self.counts.n

    @property
    def positives(self) -> int:
        return self.counts.positives

    @property
    def negatives(self) -> int:
        return self.counts.negatives

    @property
    def defined(self) -> bool:
        return self.m is not None


@dataclass(frozen=True)
class GroupMeasureTable:
    """One row per lattice group, in lattice order, plus the settings used."""

    lattice: GroupLattice
    kind: MeasureKind
    rows: tuple[GroupRow, ...]
    smoothing: float = 0.0
    clamp: float = DEFAULT_CLAMP
    min_group_size: int = 1

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def defined_rows(self) -> tuple[GroupRow, ...]:
        return tuple(r for r in self.rows if r.defined)

    @property
    def n_defined(self) -> int:
        return sum(r.defined for r in self.rows)

    def deficiencies(self) -> dict[GroupKey, float]:
        """``key -> m`` for every scorable group, in lattice order."""
        return {r.key: r.m for r in self.rows if r.defined}

    def m_array(self) -> np.ndarray:
        return np.array([np.nan if r.m is None else r.m for r in self.rows], dtype=np.float64)

    def row(self, key: GroupKey) -> GroupRow:
        return self.rows[self.lattice.index_of(key)]

    def settings(self) -> dict:
        return {
            "smoothing": self.smoothing,
            "clamp": self.clamp,
            "min_group_size": self.min_group_size,
        }


def build_measure_table(
    data: LabeledPredictions,
    lattice: GroupLattice,
    kind: MeasureKind,
    *,
    smoothing: float = 0.0,
    min_group_size: int = 1,
    clamp: float = DEFAULT_CLAMP,
) -> GroupMeasureTable:
    """Measure every lattice group; small or undefined groups are excluded, never imputed."""
    kind = MeasureKind.parse(kind)
    if min_group_size < 1:
        raise ValidationError(f"min_group_size must be >= 1, got {min_group_size}")
    if smoothing < 0 or not math.isfinite(smoothing):
        raise ValidationError(f"smoothing must be a finite non-negative number, got {smoothing}")
    if not clamp > 0:
        raise ValidationError(f"clamp must be positive, got {clamp}")
    validate_assignments(data.assignments, lattice.axes)

    rows = []
    for key, concrete, raw in zip(lattice.groups, lattice.concrete_mask, group_counts(data, lattice)):
        counts = ConfusionCounts.from_row(raw)
        r = rate(kind, counts, smoothing)
        reason = None
        if counts.n < min_group_size:
            reason = TOO_SMALL
        elif r is None:
            reason = UNDEFINED_RATE
        m = None if reason else deficiency(kind, r)
        rows.append(GroupRow(key, concrete, counts, r, m, reason))

    table = GroupMeasureTable(lattice, kind, tuple(rows), float(smoothing), float(clamp), int(min_group_size))
    if table.n_defined == 0:
        raise NoScorableGroupsError(f"no scorable groups for measure {kind.value}")
    return table
