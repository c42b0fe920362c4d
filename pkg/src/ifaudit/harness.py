"""Synthetic generators and independent oracles for exploring metric behaviour.

The oracles here deliberately avoid the fast paths in :mod:`ifaudit.metrics`:
they enumerate every pair of groups instead of relying on the extreme pair.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ifaudit.comparison import EfficiencyKind, classify_efficiency_case, crossover_alpha
from ifaudit.errors import ValidationError
from ifaudit.lattice import GroupKey, SensitiveAxis, enumerate_groups, validate_key
from ifaudit.measures import LabeledPredictions

# slack for float round-off when checking dominance on a grid
DOMINANCE_TOL = 1e-12


@dataclass(frozen=True)
class SyntheticProfile:
    """Per-group deficiencies with an optional planted (argmin, argmax) index pair."""

    values: tuple[float, ...]
    planted: Optional[tuple[int, int]] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("profile values must lie in [0, 1]")
        object.__setattr__(self, "values", values)
        if self.planted is not None:
            lo, hi = self.planted
            if values[lo] != min(values) or values[hi] != max(values):
                raise ValueError("planted extremes are not the true argmin/argmax")

    def __len__(self) -> int:
        return len(self.values)


def random_profile(rng: np.random.Generator, n: int, *, low: float = 0.0, high: float = 1.0,
                   zero_prob: float = 0.0, tie_prob: float = 0.0) -> SyntheticProfile:
    """Random deficiencies; optionally inject exact zeros and duplicated values."""
    v = rng.uniform(low, high, size=n)
    if zero_prob:
        v[rng.random(n) < zero_prob] = 0.0
    if tie_prob and n > 1:
        dup = rng.random(n) < tie_prob
        v[dup] = v[rng.integers(0, n, size=int(dup.sum()))]
    return SyntheticProfile(tuple(v), (int(np.argmin(v)), int(np.argmax(v))))


def brute_force_if_alpha(profile, alpha: float) -> float:
    """Exact maximum of I_alpha over every unordered pair of distinct groups."""
    values = profile.values if isinstance(profile, SyntheticProfile) else tuple(profile)
    if len(values) < 2:
        raise ValueError("need at least 2 values")
    best = -math.inf
    for u, v in itertools.combinations(values, 2):
        hi, lo = (u, v) if u >= v else (v, u)
        rel = 0.0 if hi == 0 else 1.0 - lo / hi
        best = max(best, alpha * hi + (1 - alpha) * rel)
    return best


def pair_matrix(values: Sequence[float], alphas: Sequence[float]) -> np.ndarray:
    """(len(alphas), n, n) array of I_alpha for every ordered pair (i, j)."""
    v = np.asarray(values, dtype=np.float64)
    hi = np.maximum(v[:, None], v[None, :])
    lo = np.minimum(v[:, None], v[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(hi == 0, 0.0, 1.0 - lo / hi)
    a = np.asarray(alphas, dtype=np.float64)[:, None, None]
    return a * hi + (1 - a) * rel


def brute_force_if_grid(values: Sequence[float], alphas: Sequence[float]) -> np.ndarray:
    """Vectorised brute force: max over all i < j pairs, one value per alpha."""
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 values")
    iu = np.triu_indices(n, k=1)
    return pair_matrix(values, alphas)[:, iu[0], iu[1]].max(axis=1)


# -- planted datasets --------------------------------------------------------


@dataclass(frozen=True)
class PlantedGroup:
    """Exact composition of one concrete group: TPR over positives, FPR over negatives."""

    size: int
    positives: int
    tpr: float = 1.0
    fpr: float = 0.0

    @property
    def negatives(self) -> int:
        return self.size - self.positives

    def counts(self) -> tuple[int, int, int, int]:
        """(tp, fn, fp, tn), or ValidationError when a rate is not representable."""
        if not 0 <= self.positives <= self.size:
            raise ValidationError(f"positives {self.positives} outside 0..{self.size}")
        tp = _exact(self.tpr * self.positives, "tpr", self.tpr, self.positives)
        fp = _exact(self.fpr * self.negatives, "fpr", self.fpr, self.negatives)
        return tp, self.positives - tp, fp, self.negatives - fp


def _exact(x: float, name: str, value: float, base: int) -> int:
    k = round(x)
    if abs(x - k) > 1e-9 or not 0 <= k <= base:
        raise ValidationError(f"{name}={value} is not representable with {base} examples")
    return int(k)


@dataclass(frozen=True)
class PlantedDataset:
    axes: tuple[SensitiveAxis, ...]
    groups: Mapping[GroupKey, PlantedGroup]
    data: LabeledPredictions = field(repr=False)


def generate_planted_dataset(
    axes: Sequence[SensitiveAxis],
    groups: Mapping[GroupKey, PlantedGroup],
    shuffle_seed: Optional[int] = None,
) -> PlantedDataset:
    """Deterministic dataset whose per-group counts equal the planted ones exactly.

    Concrete groups absent from ``groups`` are left empty. Rows are emitted in
    lattice order unless ``shuffle_seed`` is given.
    """
    axes = tuple(axes)
    lattice = enumerate_groups(axes)
    labels, preds, assign = [], [], []
    clean = {}
    for key, g in groups.items():
        key = validate_key(key, axes)
        if not lattice.concrete_mask[lattice.index_of(key)]:
            raise ValidationError(f"planted groups must be concrete, got {key!r}")
        clean[key] = g
    for key in lattice.concrete_groups:
        g = clean.get(key)
        if g is None:
            continue
        tp, fn, fp, tn = g.counts()
        for y, yhat, count in ((1, 1, tp), (1, 0, fn), (0, 1, fp), (0, 0, tn)):
            labels += [y] * count
            preds += [yhat] * count
            assign += [key] * count
    labels = np.array(labels, dtype=np.int8)
    preds = np.array(preds, dtype=np.int8)
    assign = np.array(assign, dtype=np.int64).reshape(len(labels), len(axes))
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(len(labels))
        labels, preds, assign = labels[order], preds[order], assign[order]
    return PlantedDataset(axes, dict(clean), LabeledPredictions(labels, preds, assign))


def binary_axes(*names: str) -> tuple[SensitiveAxis, ...]:
    return tuple(SensitiveAxis(n, ("0", "1")) for n in names)


FIXTURE_AXES = (
    SensitiveAxis("gender", ("female", "male")),
    SensitiveAxis("race", ("african_american", "european_american")),
    SensitiveAxis("age", ("under_45", "over_45")),
)

# concrete cells of the bundled fixture, in lattice order
FIXTURE_GROUPS = {
    (0, 0, 0): PlantedGroup(size=60, positives=40, tpr=0.65, fpr=0.30),
    (0, 0, 1): PlantedGroup(size=50, positives=20, tpr=0.75, fpr=0.20),
    (0, 1, 0): PlantedGroup(size=80, positives=40, tpr=0.85, fpr=0.15),
    (0, 1, 1): PlantedGroup(size=70, positives=30, tpr=0.80, fpr=0.10),
    (1, 0, 0): PlantedGroup(size=40, positives=20, tpr=0.70, fpr=0.25),
    (1, 0, 1): PlantedGroup(size=50, positives=30, tpr=0.90, fpr=0.20),
    (1, 1, 0): PlantedGroup(size=100, positives=40, tpr=0.95, fpr=0.05),
    (1, 1, 1): PlantedGroup(size=90, positives=50, tpr=0.88, fpr=0.125),
}
FIXTURE_SHUFFLE_SEED = 1234


def planted_fixture() -> PlantedDataset:
    """The dataset shipped as ``ifaudit/fixtures/fixture.csv``."""
    return generate_planted_dataset(FIXTURE_AXES, FIXTURE_GROUPS, shuffle_seed=FIXTURE_SHUFFLE_SEED)


# -- efficiency-case exploration ------------------------------------------------


@dataclass(frozen=True)
class CaseStats:
    """Outcome of one efficiency case. ``violations`` must be zero."""

    case: str
    samples: int
    condition_false_draws: int
    dominated_when_condition: int
    violations: int
    dominated_without_condition: int
    classifier_disagreements: int


@dataclass(frozen=True)
class MixedStats:
    samples: int
    with_crossover: int
    crossover_sign_errors: int


@dataclass(frozen=True)
class ExplorerReport:
    both_worse: CaseStats
    both_better: CaseStats
    mixed: MixedStats
    counterexample_if0: tuple[float, float]
    counterexample_dominates: bool

    @property
    def ok(self) -> bool:
        return (
            self.both_worse.violations == 0
            and self.both_better.violations == 0
            and self.both_worse.classifier_disagreements == 0
            and self.both_better.classifier_disagreements == 0
            and self.mixed.with_crossover == self.mixed.samples
            and self.mixed.crossover_sign_errors == 0
            and not self.counterexample_dominates
        )


def _if_curves(a, b, grid):
    """IF on the grid for extremes (a, b); rows are samples."""
    a, b = np.asarray(a)[:, None], np.asarray(b)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(b == 0, 0.0, 1.0 - a / b)
    return grid[None, :] * b + (1 - grid[None, :]) * rel


def _draw_extremes(rng, n):
    u = rng.uniform(0.0, 1.0, size=(n, 2))
    return u.min(axis=1), u.max(axis=1)


def _explore_case(kind: EfficiencyKind, samples: int, rng, grid, batch: int = 4096) -> CaseStats:
    got = 0
    false_draws = dominated = violations = dominated_wo = disagreements = 0
    while got < samples:
        a, b = _draw_extremes(rng, batch)
        if kind is EfficiencyKind.BOTH_WORSE_DOMINANT:
            d = rng.uniform(0.0, 0.5, size=(batch, 2))
            x, y = d.min(axis=1), d.max(axis=1)
        else:
            d = rng.uniform(-0.5, 0.0, size=(batch, 2))
            x, y = d.max(axis=1), d.min(axis=1)
        a2, b2 = a + x, b + y
        ok = (a2 >= 0) & (b2 <= 1) & (b2 >= a2) & (b > 0) & (b2 > 0)
        a, b, x, y, a2, b2 = (v[ok] for v in (a, b, x, y, a2, b2))
        if kind is EfficiencyKind.BOTH_WORSE_DOMINANT:
            cond = x * b <= y * a
            diff = _if_curves(a2, b2, grid) - _if_curves(a, b, grid)
        else:
            cond = x * b >= y * a
            diff = _if_curves(a, b, grid) - _if_curves(a2, b2, grid)
        dom = (diff >= -DOMINANCE_TOL).all(axis=1)
        for i in range(len(a)):
            if not cond[i]:
                false_draws += 1
                dominated_wo += bool(dom[i])
                continue
            if got >= samples:
                continue
            got += 1
            verdict = classify_efficiency_case(a[i], b[i], a2[i], b2[i])
            if verdict.kind is not kind or verdict.uniform_dominance is not True:
                disagreements += 1
            if dom[i]:
                dominated += 1
            else:
                violations += 1
    return CaseStats(kind.value, got, false_draws, dominated, violations, dominated_wo, disagreements)


def _explore_mixed(samples: int, rng, grid, batch: int = 4096) -> MixedStats:
    got = with_cross = sign_errors = 0
    while got < samples:
        a, b = _draw_extremes(rng, batch)
        d = rng.uniform(-0.5, 0.5, size=(batch, 2))
        a2, b2 = a + d[:, 0], b + d[:, 1]
        ok = (a2 >= 0) & (b2 <= 1) & (b2 >= a2) & (b > 0) & (b2 > 0)
        for i in np.flatnonzero(ok):
            if got >= samples:
                break
            if classify_efficiency_case(a[i], b[i], a2[i], b2[i]).kind is not EfficiencyKind.MIXED:
                continue
            base = (b[i], 1.0 - a[i] / b[i])
            cand = (b2[i], 1.0 - a2[i] / b2[i])
            d_abs, d_rel = cand[0] - base[0], cand[1] - base[1]
            if not d_abs * d_rel < 0:
                continue
            got += 1
            root = crossover_alpha(base, cand)
            if root is None:
                continue
            with_cross += 1
            # the IF difference must change sign across the root and nowhere else
            diff = (grid * cand[0] + (1 - grid) * cand[1]) - (grid * base[0] + (1 - grid) * base[1])
            left, right = diff[grid < root - 1e-9], diff[grid > root + 1e-9]
            s0 = np.sign(d_rel)
            if (np.sign(left) == -s0).any() or (np.sign(right) == s0).any():
                sign_errors += 1
    return MixedStats(got, with_cross, sign_errors)


COUNTEREXAMPLE = (0.1, 0.9, 0.1, 0.1)


def efficiency_case_explorer(samples: int, seed: int, grid_points: int = 101) -> ExplorerReport:
    """Monte Carlo check of the all-alpha dominance conditions and crossovers."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, grid_points)
    worse = _explore_case(EfficiencyKind.BOTH_WORSE_DOMINANT, samples, rng, grid)
    better = _explore_case(EfficiencyKind.BOTH_BETTER_DOMINANT, samples, rng, grid)
    mixed = _explore_mixed(samples, rng, grid)

    a, b, x, y = COUNTEREXAMPLE
    base = _if_curves([a], [b], grid)[0]
    cand = _if_curves([a + x], [b + y], grid)[0]
    return ExplorerReport(
        worse,
        better,
        mixed,
        counterexample_if0=(float(base[0]), float(cand[0])),
        counterexample_dominates=bool((cand - base >= -DOMINANCE_TOL).all()),
    )
