"""Baseline-vs-candidate comparison of two evaluations of the same audit.

All deltas are ``candidate - baseline`` in deficiency units, so a negative
``worst_off_delta`` means the candidate improves the worst-off group.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from ifaudit.errors import ConfigMismatchError

if TYPE_CHECKING:
    from ifaudit.engine import ModelEvaluation

DEFAULT_TAU = 1e-9


class EfficiencyKind(str, enum.Enum):
    # y >= x >= 0: candidate is worse on both extremes
    BOTH_WORSE_DOMINANT = "both_worse_dominant"
    # y <= x <= 0: candidate is better on both extremes
    BOTH_BETTER_DOMINANT = "both_better_dominant"
    MIXED = "mixed"


@dataclass(frozen=True)
class EfficiencyCase:
    """Case of the (best m, worst m) shift from baseline (a, b) to candidate (a', b').

    ``uniform_dominance`` states whether the shift orders IF for every alpha:
    in the both-worse case that holds iff ``x*b <= y*a``, in the both-better
    case iff ``x*b >= y*a``. It is None for mixed shifts. For positive worst values the
    conditions are evaluated as ``a'/b' <= a/b`` (resp. ``>=``), the ratios
    IF itself uses, which avoids cancellation in ``x`` and ``y``.
    """

    kind: EfficiencyKind
    x: float
    y: float
    uniform_dominance: Optional[bool]
    degenerate: bool = False


def _ratio(lo: float, hi: float) -> float:
    # an all-zero pair has no relative disparity, like lo == hi
    return 1.0 if hi == 0 else lo / hi


def classify_efficiency_case(a: float, b: float, a2: float, b2: float, tol: float = 0.0) -> EfficiencyCase:
    for lo, hi, who in ((a, b, "baseline"), (a2, b2, "candidate")):
        if not 0.0 <= lo <= hi:
            raise ValueError(f"{who} extremes must satisfy 0 <= best <= worst, got ({lo}, {hi})")
    a, b, a2, b2 = (float(v) for v in (a, b, a2, b2))
    x, y = a2 - a, b2 - b
    degenerate = abs(x) <= tol and abs(y) <= tol
    q, q2 = _ratio(a, b), _ratio(a2, b2)
    if y >= x - tol and x >= -tol:
        return EfficiencyCase(EfficiencyKind.BOTH_WORSE_DOMINANT, x, y, q2 <= q + tol, degenerate)
    if y <= x + tol and x <= tol:
        return EfficiencyCase(EfficiencyKind.BOTH_BETTER_DOMINANT, x, y, q2 >= q - tol, degenerate)
    return EfficiencyCase(EfficiencyKind.MIXED, x, y, None, degenerate)


def crossover_alpha(baseline_pair: tuple[float, float], candidate_pair: tuple[float, float]) -> Optional[float]:
    """Alpha in (0, 1) where the two affine IF curves cross, else None.

    Pairs are ``(delta_abs, delta_rel)`` of each model's extreme groups.
    """
    (abs1, rel1), (abs2, rel2) = baseline_pair, candidate_pair
    d_rel = rel2 - rel1  # difference at alpha = 0
    d_abs = abs2 - abs1  # difference at alpha = 1
    slope = d_abs - d_rel
    if slope == 0:
        return None
    root = -d_rel / slope
    if 0.0 < root < 1.0:
        return root
    return None


@dataclass(frozen=True)
class ComparisonVerdict:
    measure: str
    baseline_model: str
    candidate_model: str
    worst_off_delta: float
    best_off_delta: float
    df_delta: float
    if_delta: tuple[tuple[float, float], ...]
    leveling_down: bool
    efficiency: EfficiencyCase
    crossover_alpha: Optional[float]
    tau: float
    strict: bool = False

    @property
    def worst_off_status(self) -> str:
        return _status(self.worst_off_delta, self.tau)

    @property
    def best_off_status(self) -> str:
        return _status(self.best_off_delta, self.tau)

    def if_delta_at(self, alpha: float) -> float:
        return dict(self.if_delta)[alpha]


def _status(delta: float, tau: float) -> str:
    if delta < -tau:
        return "improves"
    if delta > tau:
        return "harms"
    return "unchanged"


def check_comparable(baseline: "ModelEvaluation", candidate: "ModelEvaluation") -> None:
    problems = []
    if baseline.kind != candidate.kind:
        problems.append(f"measure {baseline.kind.value} vs {candidate.kind.value}")
    if baseline.table.lattice.axes != candidate.table.lattice.axes:
        problems.append("sensitive axes differ")
    if baseline.table.settings() != candidate.table.settings():
        problems.append(f"table settings {baseline.table.settings()} vs {candidate.table.settings()}")
    if baseline.scores.alphas != candidate.scores.alphas:
        problems.append("alpha grids differ")
    if problems:
        raise ConfigMismatchError("evaluations are not comparable: " + "; ".join(problems))


def compare_evaluations(
    baseline: "ModelEvaluation",
    candidate: "ModelEvaluation",
    tau: float = DEFAULT_TAU,
    *,
    strict: bool = False,
) -> ComparisonVerdict:
    """Quantify how the candidate moves the extreme groups and both scores.

    Leveling down: the best-off group gets worse by more than ``tau`` while the
    worst-off group does not improve by more than ``tau``. With ``strict`` the
    second condition is required of every group scorable in both tables.
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    check_comparable(baseline, candidate)
    s1, s2 = baseline.scores, candidate.scores
    worst = s2.m_max - s1.m_max
    best = s2.m_min - s1.m_min

    if strict:
        m1, m2 = baseline.table.deficiencies(), candidate.table.deficiencies()
        no_group_improved = all(m2[k] - m1[k] >= -tau for k in m1.keys() & m2.keys())
        leveling = best > tau and no_group_improved
    else:
        leveling = best > tau and worst >= -tau

    c1, c2 = s1.curve(), s2.curve()
    return ComparisonVerdict(
        measure=baseline.kind.value,
        baseline_model=baseline.model,
        candidate_model=candidate.model,
        worst_off_delta=worst,
        best_off_delta=best,
        df_delta=s2.df - s1.df,
        if_delta=tuple((a, c2[a] - c1[a]) for a in s1.alphas),
        leveling_down=leveling,
        efficiency=classify_efficiency_case(s1.m_min, s1.m_max, s2.m_min, s2.m_max, tol=tau),
        crossover_alpha=crossover_alpha((s1.delta_abs, s1.delta_rel), (s2.delta_abs, s2.delta_rel)),
        tau=tau,
        strict=strict,
    )

