import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ifaudit import AuditConfig, ConfigMismatchError, MeasureKind, SensitiveAxis, run_audit
from ifaudit.comparison import (
    DEFAULT_TAU,
    EfficiencyKind,
    check_comparable,
    classify_efficiency_case,
    compare_evaluations,
    crossover_alpha,
)
from ifaudit.harness import PlantedGroup, generate_planted_dataset

TPR = MeasureKind.TPR_DEFICIENCY
AXES = (SensitiveAxis("group", ("g0", "g1")),)


def evaluation(tprs, model="m", positives=100, **config):
    groups = {(i,): PlantedGroup(size=2 * positives, positives=positives, tpr=t, fpr=0.1) for i, t in enumerate(tprs)}
    data = generate_planted_dataset(AXES, groups).data
    cfg = AuditConfig(axes=AXES, measures=(TPR,), model=model, **config)
    return run_audit(data, cfg).evaluation(TPR)


def _if(a, b, alpha):
    rel = 0.0 if b == 0 else 1 - a / b
    return alpha * b + (1 - alpha) * rel


def test_worst_off_improvement():
    base = evaluation((0.43, 0.9))
    cand = evaluation((0.52, 0.9))
    v = compare_evaluations(base, cand)
    assert v.worst_off_delta == pytest.approx(-0.09, abs=1e-12)
    assert v.worst_off_status == "improves"
    assert not v.leveling_down


def test_leveling_down_with_tau():
    base = evaluation((0.9, 0.6), positives=20)
    cand = evaluation((0.75, 0.6), positives=20)
    v = compare_evaluations(base, cand, tau=0.01)
    assert v.leveling_down
    assert base.scores.df == pytest.approx(math.log(4)) and cand.scores.df == pytest.approx(math.log(1.6))
    assert v.worst_off_delta == pytest.approx(0.0, abs=1e-12)
    assert compare_evaluations(base, cand, tau=0.01, strict=True).leveling_down


def test_strict_leveling_down_requires_no_improvement():
    # worst-off unchanged overall, but the middle group improves
    axes = (SensitiveAxis("group", ("g0", "g1", "g2")),)

    def ev(tprs):
        groups = {(i,): PlantedGroup(size=40, positives=20, tpr=t) for i, t in enumerate(tprs)}
        return run_audit(generate_planted_dataset(axes, groups).data, AuditConfig(axes=axes, measures=(TPR,))).evaluation(TPR)

    base, cand = ev((0.9, 0.7, 0.6)), ev((0.8, 0.75, 0.6))
    assert compare_evaluations(base, cand).leveling_down
    assert not compare_evaluations(base, cand, strict=True).leveling_down


def test_identical_evaluations():
    ev = evaluation((0.6, 0.8))
    v = compare_evaluations(ev, ev)
    assert v.worst_off_delta == v.best_off_delta == v.df_delta == 0.0
    assert all(d == 0.0 for _, d in v.if_delta)
    assert not v.leveling_down
    assert v.crossover_alpha is None
    assert v.efficiency.degenerate


def test_mismatched_configs():
    with pytest.raises(ConfigMismatchError):
        check_comparable(evaluation((0.6, 0.8)), evaluation((0.6, 0.8), smoothing=1.0))
    with pytest.raises(ConfigMismatchError):
        check_comparable(evaluation((0.6, 0.8)), evaluation((0.6, 0.8), alpha_grid=(0.0, 1.0)))
    with pytest.raises(ValueError):
        compare_evaluations(evaluation((0.6, 0.8)), evaluation((0.6, 0.8)), tau=-1)


def test_efficiency_examples():
    c = classify_efficiency_case(0.2, 0.4, 0.3, 0.6)
    assert c.kind is EfficiencyKind.BOTH_WORSE_DOMINANT
    assert (c.x, c.y) == pytest.approx((0.1, 0.2))
    assert c.uniform_dominance is True
    assert all(_if(0.3, 0.6, a) >= _if(0.2, 0.4, a) for a in (0.0, 1.0))

    c = classify_efficiency_case(0.1, 0.9, 0.2, 1.0, tol=DEFAULT_TAU)
    assert c.kind is EfficiencyKind.BOTH_WORSE_DOMINANT and c.uniform_dominance is False
    assert _if(0.1, 0.9, 0.0) == pytest.approx(0.889, abs=1e-3) and _if(0.2, 1.0, 0.0) == pytest.approx(0.8)
    assert _if(0.1, 0.9, 1.0) == 0.9 and _if(0.2, 1.0, 1.0) == 1.0

    c = classify_efficiency_case(0.2, 0.4, 0.2, 0.4)
    assert c.degenerate and c.x == c.y == 0.0 and c.uniform_dominance is True

    assert classify_efficiency_case(0.2, 0.4, 0.3, 0.35).kind is EfficiencyKind.MIXED
    with pytest.raises(ValueError):
        classify_efficiency_case(0.5, 0.4, 0.3, 0.6)


def test_crossover_examples():
    assert crossover_alpha((0.40, 0.50), (0.30, 0.80)) == pytest.approx(0.75, abs=1e-12)
    assert crossover_alpha((0.4, 0.5), (0.4, 0.5)) is None
    assert crossover_alpha((0.4, 0.5), (0.5, 0.6)) is None


extremes = st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0)).map(sorted)


@given(extremes, extremes)
def test_uniform_dominance_is_exact(base, cand):
    (a, b), (a2, b2) = base, cand
    assume(b > 0 and b2 > 0)
    case = classify_efficiency_case(a, b, a2, b2)
    assume(case.kind is not EfficiencyKind.MIXED and not case.degenerate)
    grid = np.linspace(0, 1, 51)
    diff = np.array([_if(a2, b2, t) - _if(a, b, t) for t in grid])
    if case.kind is EfficiencyKind.BOTH_BETTER_DOMINANT:
        diff = -diff
    if case.uniform_dominance:
        assert (diff >= -1e-12).all()
    else:
        # the relative component strictly moves the other way, so alpha = 0 breaks dominance
        assert diff[0] < 1e-12


@given(st.tuples(*[st.floats(0.0, 1.0)] * 4))
def test_crossover_is_a_root(pairs):
    base, cand = pairs[:2], pairs[2:]
    root = crossover_alpha(base, cand)
    if root is None:
        return
    assert 0 < root < 1
    f = lambda p, t: t * p[0] + (1 - t) * p[1]
    assert f(base, root) == pytest.approx(f(cand, root), abs=1e-9)
