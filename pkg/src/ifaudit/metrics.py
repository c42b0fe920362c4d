"""Differential Fairness and alpha-intersectional fairness scores.

For a pair of groups with deficiencies ``m_a``, ``m_b``:

    delta_abs = max(m_a, m_b)                       # harm to the worse group
    delta_rel = 1 - min(m_a, m_b) / max(m_a, m_b)   # relative disparity, 0 if both are 0
    I_alpha   = alpha * delta_abs + (1 - alpha) * delta_rel

Both components grow with the larger value and shrink with the smaller one, so
the maximum over all pairs is always attained by the (argmin, argmax) pair and
the curve ``alpha -> IF_alpha`` is affine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Optional, Sequence, Union

import numpy as np

from ifaudit.errors import NoScorableGroupsError
from ifaudit.lattice import WILDCARD, GroupKey
from ifaudit.measures import DEFAULT_CLAMP, GroupMeasureTable

DEFAULT_ALPHA_GRID = tuple(i / 10 for i in range(11))

Values = Union[Mapping[Hashable, float], Sequence[float], np.ndarray]


def alpha_label(alpha: float) -> str:
    """Column/field name for an alpha value, e.g. ``IF_0.5``."""
    return f"IF_{alpha:.12g}"


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def check_grid(grid: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(check_alpha(a) for a in grid)
    if not grid:
        raise ValueError("alpha grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class PairScore:
    delta_abs: float
    delta_rel: float
    i_alpha: float
    alpha: float
    group_a: Optional[Hashable] = None
    group_b: Optional[Hashable] = None


def _components(m_a: float, m_b: float) -> tuple[float, float]:
    hi, lo = max(m_a, m_b), min(m_a, m_b)
    rel = 0.0 if hi == 0 else 1.0 - lo / hi
    return hi, rel


def pair_score(m_a: float, m_b: float, alpha: float) -> PairScore:
    alpha = check_alpha(alpha)
    for m in (m_a, m_b):
        if not 0.0 <= m <= 1.0:
            raise ValueError(f"deficiency must lie in [0, 1], got {m}")
    d_abs, d_rel = _components(m_a, m_b)
    return PairScore(d_abs, d_rel, alpha * d_abs + (1 - alpha) * d_rel, alpha)


def _key_order(label) -> tuple:
    if isinstance(label, tuple):
        return tuple((1, 0) if v == WILDCARD else (0, v) for v in label)
    return (label,)


def _prepare(values: Values, clamp: Optional[float]) -> tuple[list, np.ndarray]:
    if isinstance(values, Mapping):
        labels = sorted(values, key=_key_order)
        arr = np.array([values[k] for k in labels], dtype=np.float64)
    else:
        arr = np.asarray(values, dtype=np.float64).ravel()
        labels = list(range(len(arr)))
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise ValueError("deficiencies must lie in [0, 1]")
    if clamp is not None:
        if not clamp > 0:
            raise ValueError(f"clamp must be positive, got {clamp}")
        arr = np.clip(arr, clamp, 1.0)
    return labels, arr


def _require_pairs(arr: np.ndarray) -> None:
    if len(arr) < 2:
        raise NoScorableGroupsError(f"need at least 2 defined groups, got {len(arr)}")


def extreme_groups(values: Values) -> tuple:
    """``(argmin m, argmax m)``; ties go to the lexicographically first key."""
    labels, arr = _prepare(values, None)
    if not len(arr):
        raise NoScorableGroupsError("no defined groups")
    # np.argmin/argmax return the first occurrence, and labels are sorted
    return labels[int(np.argmin(arr))], labels[int(np.argmax(arr))]


def if_alpha(values: Values, alpha: float, *, clamp: Optional[float] = None) -> PairScore:
    """IF_alpha and its maximising pair, evaluated on the extreme groups."""
    labels, arr = _prepare(values, clamp)
    _require_pairs(arr)
    lo, hi = int(np.argmin(arr)), int(np.argmax(arr))
    s = pair_score(arr[lo], arr[hi], alpha)
    return PairScore(s.delta_abs, s.delta_rel, s.i_alpha, s.alpha, labels[lo], labels[hi])


def df_score(values: Values, clamp: float = DEFAULT_CLAMP) -> float:
    """Differential Fairness: natural log of max m / min m after clamping to [clamp, 1]."""
    if clamp is None:
        raise ValueError("df_score requires a positive clamp")
    _, arr = _prepare(values, clamp)
    _require_pairs(arr)
    return math.log(arr.max() / arr.min())


def alpha_sweep(
    values: Values, grid: Sequence[float] = DEFAULT_ALPHA_GRID, *, clamp: Optional[float] = None
) -> dict[float, float]:
    grid = check_grid(grid)
    _, arr = _prepare(values, clamp)
    _require_pairs(arr)
    lo, hi = arr.min(), arr.max()
    return {a: pair_score(lo, hi, a).i_alpha for a in grid}


@dataclass(frozen=True)
class FairnessScores:
    """Scores of one measure table.

    ``m_min``/``m_max`` are the raw deficiencies of the extreme groups;
    ``delta_abs``/``delta_rel`` are the extreme pair's components after
    clamping, which is what ``df`` and ``if_curve`` are computed from.
    """

    df: float
    if_curve: tuple[tuple[float, float], ...]
    min_group: GroupKey
    max_group: GroupKey
    m_min: float
    m_max: float
    delta_abs: float
    delta_rel: float
    clamp: float
    log_base: str = "e"

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.if_curve)

    def curve(self) -> dict[float, float]:
        return dict(self.if_curve)

    def if_at(self, alpha: float) -> float:
        """IF at any alpha, on or off the stored grid."""
        alpha = check_alpha(alpha)
        return alpha * self.delta_abs + (1 - alpha) * self.delta_rel


def score_table(table: GroupMeasureTable, grid: Sequence[float] = DEFAULT_ALPHA_GRID) -> FairnessScores:
    """DF, IF curve and extreme groups over the table's scorable groups."""
    grid = check_grid(grid)
    values = table.deficiencies()
    if len(values) < 2:
        raise NoScorableGroupsError(
            f"no scorable groups: {len(values)} defined group(s) for {table.kind.value}, need 2"
        )
    g_min, g_max = extreme_groups(values)
    m_min, m_max = values[g_min], values[g_max]
    lo, hi = (min(max(v, table.clamp), 1.0) for v in (m_min, m_max))
    curve = tuple((a, pair_score(lo, hi, a).i_alpha) for a in grid)
    d_abs, d_rel = _components(lo, hi)
    return FairnessScores(
        df=math.log(hi / lo),
        if_curve=curve,
        min_group=g_min,
        max_group=g_max,
        m_min=m_min,
        m_max=m_max,
        delta_abs=d_abs,
        delta_rel=d_rel,
        clamp=table.clamp,
    )


def scores_from_array(m: np.ndarray, grid: Sequence[float], clamp: float):
    """Vectorised ``(df, if_values)`` for a deficiency vector with NaN exclusions.

    Returns None when fewer than two groups are defined. Used on bootstrap
    replicas, where building full tables would dominate the runtime.
    """
    m = np.asarray(m, dtype=np.float64)
    defined = m[~np.isnan(m)]
    if len(defined) < 2:
        return None
    lo = min(max(defined.min(), clamp), 1.0)
    hi = min(max(defined.max(), clamp), 1.0)
    d_abs, d_rel = _components(lo, hi)
    grid = np.asarray(grid, dtype=np.float64)
    return math.log(hi / lo), grid * d_abs + (1 - grid) * d_rel
