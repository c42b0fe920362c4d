"""Dataset ingestion, report documents and flat CSV emissions.

Numbers in every emitted document are rendered with 12 significant digits so
golden files compare byte-for-byte across platforms.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ifaudit.comparison import ComparisonVerdict, EfficiencyCase, EfficiencyKind
from ifaudit.config import AuditConfig
from ifaudit.engine import FORMAT_VERSION, AuditReport, BootstrapResult, ModelEvaluation
from ifaudit.errors import ValidationError
from ifaudit.lattice import enumerate_groups
from ifaudit.measures import ConfusionCounts, GroupMeasureTable, GroupRow, LabeledPredictions, MeasureKind
from ifaudit.metrics import FairnessScores

SIG_DIGITS = 12
_FORMATS = {".csv": "csv", ".jsonl": "jsonl", ".ndjson": "jsonl"}


# -- ingestion ---------------------------------------------------------------


def detect_format(path, config: Optional[AuditConfig] = None, fmt: Optional[str] = None) -> str:
    fmt = fmt or (config.input_format if config else None) or _FORMATS.get(Path(path).suffix.lower())
    if fmt not in ("csv", "jsonl"):
        raise ValidationError(f"cannot infer input format of {Path(path).name}; set 'format' to csv or jsonl")
    return fmt


def _read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"empty file: {path.name}")
        return list(reader.fieldnames), list(reader)


def _read_jsonl(path: Path) -> tuple[Optional[list[str]], list[dict]]:
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise ValidationError(f"line {lineno}: expected a JSON object")
            records.append(rec)
    return None, records


def _binary(value, row: int, column: str) -> int:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, float)) and value in (0, 1):
        return int(value)
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return int(value.strip())
    raise ValidationError(f"row {row}: column {column!r} value {value!r} is not 0/1")


def _label(value) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def load_dataset(path, config: AuditConfig, fmt: Optional[str] = None) -> LabeledPredictions:
    """Load and validate every row; unknown attribute labels are errors."""
    path = Path(path)
    fmt = detect_format(path, config, fmt)
    header, records = _read_csv(path) if fmt == "csv" else _read_jsonl(path)
    if not records:
        raise ValidationError(f"empty file: {path.name} has no data rows")

    required = [config.label_column, config.prediction_column, *config.axis_columns]
    if header is not None:
        missing = [c for c in required if c not in header]
        if missing:
            raise ValidationError(f"missing column {missing[0]!r} in {path.name}")

    n, p = len(records), len(config.axes)
    labels = np.empty(n, dtype=np.int8)
    preds = np.empty(n, dtype=np.int8)
    assign = np.empty((n, p), dtype=np.int64)
    lookup = [{a: i for i, a in enumerate(ax.attributes)} for ax in config.axes]
    for i, rec in enumerate(records):
        row = i + 1
        for col in required:
            if col not in rec:
                raise ValidationError(f"row {row}: missing column {col!r}")
        labels[i] = _binary(rec[config.label_column], row, config.label_column)
        preds[i] = _binary(rec[config.prediction_column], row, config.prediction_column)
        for j, (ax, col) in enumerate(zip(config.axes, config.axis_columns)):
            value = _label(rec[col])
            if value not in lookup[j]:
                raise ValidationError(f"row {row}: unknown attribute {value!r} for axis {ax.name!r}")
            assign[i, j] = lookup[j][value]
    return LabeledPredictions(labels, preds, assign)


# -- numbers -----------------------------------------------------------------


def round_sig(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def _rounded(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, np.generic):
        return _rounded(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc: dict) -> str:
    return json.dumps(_rounded(doc), indent=2, allow_nan=False) + "\n"


def fmt_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


# -- report documents --------------------------------------------------------


def _row_dict(table: GroupMeasureTable, row: GroupRow) -> dict:
    c = row.counts
    return {
        "group": table.lattice.format_key(row.key),
        "concrete": row.concrete,
        "size": row.size,
        "positives": row.positives,
        "negatives": row.negatives,
        "tp": c.tp,
        "fp": c.fp,
        "tn": c.tn,
        "fn": c.fn,
        "rate": row.rate,
        "m": row.m,
        "defined": row.defined,
        "excluded_reason": row.excluded_reason,
    }


def _scores_dict(table: GroupMeasureTable, s: FairnessScores) -> dict:
    return {
        "df": s.df,
        "log_base": s.log_base,
        "clamp": s.clamp,
        "min_group": table.lattice.format_key(s.min_group),
        "max_group": table.lattice.format_key(s.max_group),
        "m_min": s.m_min,
        "m_max": s.m_max,
        "delta_abs": s.delta_abs,
        "delta_rel": s.delta_rel,
        "if_curve": [{"alpha": a, "value": v} for a, v in s.if_curve],
    }


def _bootstrap_dict(b: Optional[BootstrapResult]) -> Optional[dict]:
    if b is None:
        return None
    return {
        "replicas": b.replicas,
        "kept": b.kept,
        "dropped": b.dropped,
        "unreliable": b.unreliable,
        "levels": list(b.levels),
        "stratified": b.stratified,
        "intervals": [{"score": name, "lower": lo, "upper": hi} for name, lo, hi in b.intervals],
    }


def evaluation_to_dict(ev: ModelEvaluation) -> dict:
    t = ev.table
    return {
        "measure": ev.kind.value,
        "model": ev.model,
        "balanced_accuracy": ev.balanced_accuracy,
        "worst_group_rate_name": ev.kind.worst_rate_name,
        "worst_group_rate": ev.worst_group_rate,
        "summary": ev.summary_row(),
        "scores": _scores_dict(t, ev.scores),
        "bootstrap": _bootstrap_dict(ev.bootstrap),
        "table_settings": t.settings(),
        "groups": [_row_dict(t, r) for r in t.rows],
    }


def report_to_dict(report: AuditReport) -> dict:
    lattice = report.lattice
    return {
        "format_version": report.format_version,
        "tool": "ifaudit",
        "model": report.config.model,
        "n_rows": report.n_rows,
        "lattice": {
            "axes": [ax.name for ax in lattice.axes],
            "n_groups": len(lattice),
            "n_concrete": sum(lattice.concrete_mask),
        },
        "config": report.config.to_dict(),
        "evaluations": [evaluation_to_dict(ev) for ev in report.evaluations],
    }


def report_to_json(report: AuditReport) -> str:
    return dumps(report_to_dict(report))


def _evaluation_from_dict(d: dict, config: AuditConfig, lattice) -> ModelEvaluation:
    kind = MeasureKind.parse(d["measure"])
    settings = d["table_settings"]
    rows = []
    for i, g in enumerate(d["groups"]):
        key = lattice.parse_key(g["group"])
        if i >= len(lattice) or lattice.groups[i] != key:
            raise ValidationError(f"group rows out of lattice order at {g['group']!r}")
        counts = ConfusionCounts(tp=g["tp"], fp=g["fp"], tn=g["tn"], fn=g["fn"])
        rows.append(GroupRow(key, bool(g["concrete"]), counts, g["rate"], g["m"], g["excluded_reason"]))
    if len(rows) != len(lattice):
        raise ValidationError(f"report lists {len(rows)} groups, lattice has {len(lattice)}")
    table = GroupMeasureTable(
        lattice, kind, tuple(rows), float(settings["smoothing"]), float(settings["clamp"]), int(settings["min_group_size"])
    )
    s = d["scores"]
    scores = FairnessScores(
        df=s["df"],
        if_curve=tuple((float(e["alpha"]), e["value"]) for e in s["if_curve"]),
        min_group=lattice.parse_key(s["min_group"]),
        max_group=lattice.parse_key(s["max_group"]),
        m_min=s["m_min"],
        m_max=s["m_max"],
        delta_abs=s["delta_abs"],
        delta_rel=s["delta_rel"],
        clamp=s["clamp"],
        log_base=s["log_base"],
    )
    b = d.get("bootstrap")
    boot = None
    if b is not None:
        boot = BootstrapResult(
            replicas=b["replicas"],
            dropped=b["dropped"],
            levels=tuple(b["levels"]),
            stratified=b["stratified"],
            intervals=tuple((e["score"], e["lower"], e["upper"]) for e in b["intervals"]),
        )
    return ModelEvaluation(d["model"], kind, table, scores, d["balanced_accuracy"], boot)


def report_from_dict(d: dict) -> AuditReport:
    try:
        version = d["format_version"]
        if str(version).split(".")[0] != FORMAT_VERSION.split(".")[0]:
            raise ValidationError(f"unsupported report format version {version!r}")
        config = AuditConfig.from_dict(d["config"])
        lattice = enumerate_groups(config.axes)
        evaluations = tuple(_evaluation_from_dict(e, config, lattice) for e in d["evaluations"])
        if not evaluations:
            raise ValidationError("report contains no evaluations")
        return AuditReport(config=config, n_rows=d["n_rows"], evaluations=evaluations, format_version=version)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed report document: {exc!r}") from None


def report_from_json(text: str) -> AuditReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"report is not valid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise ValidationError("report document must be a JSON object")
    return report_from_dict(doc)


def load_report(path) -> AuditReport:
    return report_from_json(Path(path).read_text(encoding="utf-8"))


# -- comparison verdicts -----------------------------------------------------


def verdict_to_dict(v: ComparisonVerdict) -> dict:
    return {
        "measure": v.measure,
        "baseline_model": v.baseline_model,
        "candidate_model": v.candidate_model,
        "worst_off_delta": v.worst_off_delta,
        "worst_off_status": v.worst_off_status,
        "best_off_delta": v.best_off_delta,
        "best_off_status": v.best_off_status,
        "df_delta": v.df_delta,
        "if_delta": [{"alpha": a, "delta": d} for a, d in v.if_delta],
        "leveling_down": v.leveling_down,
        "efficiency": {
            "case": v.efficiency.kind.value,
            "x": v.efficiency.x,
            "y": v.efficiency.y,
            "uniform_dominance": v.efficiency.uniform_dominance,
            "degenerate": v.efficiency.degenerate,
        },
        "crossover_alpha": v.crossover_alpha,
        "tau": v.tau,
        "strict": v.strict,
    }


def verdict_from_dict(d: dict) -> ComparisonVerdict:
    eff = d["efficiency"]
    return ComparisonVerdict(
        measure=d["measure"],
        baseline_model=d["baseline_model"],
        candidate_model=d["candidate_model"],
        worst_off_delta=d["worst_off_delta"],
        best_off_delta=d["best_off_delta"],
        df_delta=d["df_delta"],
        if_delta=tuple((e["alpha"], e["delta"]) for e in d["if_delta"]),
        leveling_down=d["leveling_down"],
        efficiency=EfficiencyCase(
            EfficiencyKind(eff["case"]), eff["x"], eff["y"], eff["uniform_dominance"], eff["degenerate"]
        ),
        crossover_alpha=d["crossover_alpha"],
        tau=d["tau"],
        strict=d["strict"],
    )


def verdicts_to_json(verdicts: Sequence[ComparisonVerdict]) -> str:
    return dumps(
        {
            "format_version": FORMAT_VERSION,
            "tool": "ifaudit",
            "comparisons": [verdict_to_dict(v) for v in verdicts],
        }
    )


def verdicts_from_json(text: str) -> list[ComparisonVerdict]:
    return [verdict_from_dict(d) for d in json.loads(text)["comparisons"]]


# -- CSV emissions -----------------------------------------------------------


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_number(x) for x in row])
    return buf.getvalue()


def summary_csv(evaluations: Sequence[ModelEvaluation]) -> str:
    """One row per evaluation: model, measure, BA, worst-off rate, DF, IF_0.5, grid IFs."""
    rows = [ev.summary_row() for ev in evaluations]
    header = list(rows[0])
    for r in rows[1:]:
        if list(r) != header:
            raise ValidationError("summary rows span different alpha grids")
    return _csv_text(header, ([r[h] for h in header] for r in rows))


GROUP_COLUMNS = (
    "group", "concrete", "size", "positives", "negatives", "tp", "fp", "tn", "fn",
    "rate", "m", "defined", "excluded_reason",
)


def groups_csv(ev: ModelEvaluation) -> str:
    """Every enumerated group, excluded ones included with their reason."""
    rows = (_row_dict(ev.table, r) for r in ev.table.rows)
    return _csv_text(GROUP_COLUMNS, ([d[c] for c in GROUP_COLUMNS] for d in rows))


def curve_csv(ev: ModelEvaluation) -> str:
    """``(alpha, IF_alpha, DF)`` points, one per grid value."""
    s = ev.scores
    return _csv_text(("alpha", "IF_alpha", "DF"), ((a, v, s.df) for a, v in s.if_curve))


def sweep_csv(reports: Sequence[AuditReport]) -> str:
    """Worst-off rate per number of axes, one row per measure."""
    ks = [len(r.config.axes) for r in reports]
    header = ["model", "measure", "rate"] + [f"k{k}" for k in ks]
    rows = []
    for kind in reports[0].config.measures:
        evs = [r.evaluation(kind) for r in reports]
        rows.append([reports[0].config.model, kind.value, kind.worst_rate_name] + [e.worst_group_rate for e in evs])
    return _csv_text(header, rows)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_report(report: AuditReport, out: Optional[Path] = None, csv_dir: Optional[Path] = None) -> list[Path]:
    """Write the JSON document and, optionally, the flat CSV emissions."""
    written = []
    if out is not None:
        out = Path(out)
        _write(out, report_to_json(report))
        written.append(out)
    if csv_dir is not None:
        csv_dir = Path(csv_dir)
        targets = {csv_dir / "summary.csv": summary_csv(report.evaluations)}
        for ev in report.evaluations:
            targets[csv_dir / f"groups_{ev.kind.value}.csv"] = groups_csv(ev)
            targets[csv_dir / f"alpha_curve_{ev.kind.value}.csv"] = curve_csv(ev)
        for path, text in targets.items():
            _write(path, text)
            written.append(path)
    return written


def write_text(path, text: str) -> Path:
    path = Path(path)
    _write(path, text)
    return path

