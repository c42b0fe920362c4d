import itertools
import json
import math

import numpy as np
import pytest

from ifaudit import (
    AuditConfig,
    BootstrapConfig,
    MeasureKind,
    NoScorableGroupsError,
    SensitiveAxis,
    ValidationError,
    axis_sweep,
    bootstrap_ci,
    run_audit,
)
from ifaudit.fileio import load_dataset
from ifaudit.harness import FIXTURE_AXES, FIXTURE_GROUPS, PlantedGroup, binary_axes, generate_planted_dataset
from ifaudit.measures import LabeledPredictions
from ifaudit.metrics import score_table

from conftest import GOLDEN

TPR, FPR = MeasureKind.TPR_DEFICIENCY, MeasureKind.FPR


def _oracle_scores(groups, p, kind):
    """Pool planted counts over every wildcard pattern and score the extremes by hand."""
    m = {}
    for key in itertools.product(*([0, 1, "+"] for _ in range(p))):
        if all(v == "+" for v in key):
            continue
        tp = fn = fp = tn = 0
        for cell, g in groups.items():
            if all(k == "+" or k == c for k, c in zip(key, cell)):
                a, b, c, d = g.counts()
                tp, fn, fp, tn = tp + a, fn + b, fp + c, tn + d
        m[key] = 1 - tp / (tp + fn) if kind is TPR else fp / (fp + tn)
    lo, hi = min(m.values()), max(m.values())
    curve = {i / 10: (i / 10) * hi + (1 - i / 10) * (1 - lo / hi) for i in range(11)}
    return math.log(hi / lo), curve, lo, hi


@pytest.mark.parametrize("kind", [TPR, FPR])
def test_golden_report_matches_hand_oracle(kind):
    golden = json.loads((GOLDEN / "fixture_report.json").read_text())
    ev = next(e for e in golden["evaluations"] if e["measure"] == kind.value)
    df, curve, lo, hi = _oracle_scores(FIXTURE_GROUPS, 3, kind)
    assert ev["scores"]["df"] == float(f"{df:.12g}")
    assert ev["scores"]["m_min"] == float(f"{lo:.12g}") and ev["scores"]["m_max"] == float(f"{hi:.12g}")
    for point in ev["scores"]["if_curve"]:
        assert point["value"] == float(f"{curve[point['alpha']]:.12g}")
    assert len(ev["groups"]) == 26
    assert golden["n_rows"] == sum(g.size for g in FIXTURE_GROUPS.values())


def test_hand_values_of_fixture():
    # worst TPR 0.65 vs best 0.95; worst FPR 0.30 vs best 0.05
    df_tpr, curve_tpr, _, _ = _oracle_scores(FIXTURE_GROUPS, 3, TPR)
    df_fpr, _, _, _ = _oracle_scores(FIXTURE_GROUPS, 3, FPR)
    assert df_tpr == pytest.approx(math.log(7), abs=1e-12)
    assert df_fpr == pytest.approx(math.log(6), abs=1e-12)
    assert curve_tpr[0.5] == pytest.approx(0.5 * 0.35 + 0.5 * (1 - 0.05 / 0.35), abs=1e-12)


def test_fixture_audit_reproduces_oracle(fixture_csv, fixture_config_path):
    from ifaudit.config import load_config

    config = load_config(fixture_config_path)
    report = run_audit(load_dataset(fixture_csv, config), config)
    for kind in (TPR, FPR):
        df, curve, _, _ = _oracle_scores(FIXTURE_GROUPS, 3, kind)
        ev = report.evaluation(kind)
        assert ev.scores.df == pytest.approx(df, abs=1e-12)
        for a, v in ev.scores.if_curve:
            assert v == pytest.approx(curve[a], abs=1e-12)
        # every reported score is recomputable from the table
        assert score_table(ev.table, config.alpha_grid) == ev.scores


def test_two_group_example_end_to_end():
    axes = binary_axes("g")
    groups = {(0,): PlantedGroup(size=20, positives=10, tpr=0.6), (1,): PlantedGroup(size=20, positives=10, tpr=0.8)}
    report = run_audit(generate_planted_dataset(axes, groups).data, AuditConfig(axes=axes, measures=(TPR,)))
    s = report.evaluation(TPR).scores
    assert s.df == pytest.approx(math.log(2), abs=1e-12)
    assert s.if_at(0.5) == pytest.approx(0.45, abs=1e-12)


def test_perfect_predictor():
    axes = binary_axes("a", "b")
    groups = {k: PlantedGroup(size=10, positives=5, tpr=1.0, fpr=0.0) for k in itertools.product((0, 1), repeat=2)}
    config = AuditConfig(axes=axes)
    report = run_audit(generate_planted_dataset(axes, groups).data, config)
    for ev in report.evaluations:
        assert ev.scores.df == 0.0
        for a, v in ev.scores.if_curve:
            assert v == pytest.approx(a * config.clamp, abs=1e-18)
    assert report.evaluations[0].balanced_accuracy == 1.0


def test_single_populated_group_is_not_scorable():
    axes = binary_axes("a", "b")
    data = generate_planted_dataset(axes, {(0, 0): PlantedGroup(size=10, positives=5, tpr=0.6)}).data
    # one concrete cell still populates three groups: (0,0), (0,+) and (+,0)
    report = run_audit(data, AuditConfig(axes=axes, measures=(TPR,)))
    assert report.evaluation(TPR).table.n_defined == 3
    one_axis = binary_axes("a")
    data = generate_planted_dataset(one_axis, {(0,): PlantedGroup(size=10, positives=5, tpr=0.6)}).data
    with pytest.raises(NoScorableGroupsError):
        run_audit(data, AuditConfig(axes=one_axis, measures=(TPR,)))


def test_schema_mismatch():
    data = generate_planted_dataset(binary_axes("a"), {(0,): PlantedGroup(size=4, positives=2)}).data
    with pytest.raises(ValidationError):
        run_audit(data, AuditConfig(axes=binary_axes("a", "b")))
    empty = LabeledPredictions(np.array([], dtype=int), np.array([], dtype=int), np.zeros((0, 1), dtype=int))
    with pytest.raises(ValidationError):
        run_audit(empty, AuditConfig(axes=binary_axes("a")))


def _random_data(rng, n, axes, p_pos=0.5, acc=0.8):
    y = (rng.random(n) < p_pos).astype(int)
    yhat = np.where(rng.random(n) < acc, y, 1 - y)
    assign = np.stack([rng.integers(0, len(ax), n) for ax in axes], axis=1)
    return LabeledPredictions(y, yhat, assign)


def _boot_config(axes, **kw):
    return AuditConfig(axes=axes, bootstrap=BootstrapConfig(**kw))


def test_bootstrap_deterministic():
    axes = binary_axes("a", "b")
    data = _random_data(np.random.default_rng(0), 300, axes)
    cfg = _boot_config(axes, replicas=50, seed=11)
    assert bootstrap_ci(data, cfg) == bootstrap_ci(data, cfg)
    other = bootstrap_ci(data, _boot_config(axes, replicas=50, seed=12))
    assert other != bootstrap_ci(data, cfg)


def test_bootstrap_single_replica_is_degenerate():
    axes = binary_axes("a")
    data = _random_data(np.random.default_rng(1), 200, axes)
    result = bootstrap_ci(data, _boot_config(axes, replicas=1, seed=3))[TPR]
    for _, lo, hi in result.intervals:
        assert lo == hi


def test_bootstrap_unreliable_flag():
    axes = (SensitiveAxis("g", ("a", "b")),)
    # g=a: one positive among ten rows; g=b: a single positive row
    y = np.array([1] + [0] * 9 + [1])
    assign = np.array([[0]] * 10 + [[1]])
    data = LabeledPredictions(y, y.copy(), assign)
    result = bootstrap_ci(data, AuditConfig(axes=axes, measures=(TPR,), bootstrap=BootstrapConfig(1000, 5)))[TPR]
    assert result.dropped > 500 and result.unreliable
    assert result.kept == 1000 - result.dropped


def test_bootstrap_stratified_keeps_cell_sizes():
    axes = binary_axes("a")
    data = _random_data(np.random.default_rng(2), 100, axes)
    result = bootstrap_ci(data, _boot_config(axes, replicas=30, seed=1, stratified=True))
    assert result[TPR].stratified and result[TPR].dropped == 0


def test_bootstrap_requires_seed():
    axes = binary_axes("a")
    with pytest.raises(ValidationError):
        BootstrapConfig(replicas=10)
    data = _random_data(np.random.default_rng(2), 10, axes)
    with pytest.raises(ValidationError):
        bootstrap_ci(data, AuditConfig(axes=axes))


def test_bootstrap_interval_covers_point_estimate():
    axes = binary_axes("a")
    rng = np.random.default_rng(9)
    inside = 0
    trials = 20
    for t in range(trials):
        data = _random_data(rng, 4000, axes)
        cfg = _boot_config(axes, replicas=200, seed=t)
        report = run_audit(data, cfg)
        ev = report.evaluation(TPR)
        lo, hi = ev.bootstrap.interval("IF_0.5")
        inside += lo <= ev.scores.if_at(0.5) <= hi
    assert inside >= 0.9 * trials


def test_axis_sweep_sizes_and_prefix_consistency():
    axes = binary_axes("a", "b", "c")
    data = _random_data(np.random.default_rng(4), 800, axes)
    config = AuditConfig(axes=axes)
    reports = axis_sweep(data, config)
    assert [len(r.lattice) for r in reports] == [2, 8, 26]
    plain = run_audit(data.restrict_axes(1), AuditConfig(axes=axes[:1]))
    assert reports[0].evaluations == plain.evaluations


def test_axis_sweep_worst_group_monotone():
    axes = binary_axes("a", "b")
    groups = {k: PlantedGroup(size=20, positives=10, tpr=0.8) for k in itertools.product((0, 1), repeat=2)}
    groups[(0, 1)] = PlantedGroup(size=20, positives=10, tpr=0.3)
    data = generate_planted_dataset(axes, groups).data
    reports = axis_sweep(data, AuditConfig(axes=axes, measures=(TPR,)))
    worst = [r.evaluation(TPR).worst_group_rate for r in reports]
    assert worst[1] <= worst[0]
    assert worst[1] == pytest.approx(0.3)


def test_summary_row_columns():
    axes = binary_axes("a")
    data = _random_data(np.random.default_rng(5), 100, axes)
    row = run_audit(data, AuditConfig(axes=axes)).evaluation(FPR).summary_row()
    assert list(row)[:6] == ["model", "measure", "balanced_accuracy", "worst_group_rate", "DF", "IF_0.5"]
    assert len(row) == 6 + 10
