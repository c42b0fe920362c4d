"""Regenerate the bundled fixture dataset, its config, and the golden report.

Run from the repository root: ``python3 scripts/make_fixtures.py``.
"""

import csv
import json
from pathlib import Path

from ifaudit.cli import main
from ifaudit.harness import FIXTURE_AXES, planted_fixture

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "src" / "ifaudit" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"

CONFIG = {
    "model": "fixture_model",
    "format": "csv",
    "label_column": "y",
    "prediction_column": "yhat",
    "axes": [{"name": ax.name, "column": ax.name, "attributes": list(ax.attributes)} for ax in FIXTURE_AXES],
    "measures": ["tpr_deficiency", "fpr"],
    "alpha_grid": [i / 10 for i in range(11)],
    "smoothing": 0.0,
    "clamp": 1e-6,
    "min_group_size": 1,
    "bootstrap": {"replicas": 1000, "seed": 20240917, "levels": [2.5, 97.5], "stratified": False},
}


def write_dataset(path: Path) -> None:
    data = planted_fixture().data
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", "yhat", *(ax.name for ax in FIXTURE_AXES)])
        for y, yhat, cell in zip(data.labels, data.predictions, data.assignments):
            w.writerow([int(y), int(yhat), *(ax.attributes[c] for ax, c in zip(FIXTURE_AXES, cell))])


def main_() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    write_dataset(FIXTURES / "fixture.csv")
    (FIXTURES / "fixture_config.json").write_text(json.dumps(CONFIG, indent=2) + "\n", encoding="utf-8")
    code = main([
        "audit",
        "--input", str(FIXTURES / "fixture.csv"),
        "--config", str(FIXTURES / "fixture_config.json"),
        "--out", str(GOLDEN / "fixture_report.json"),
        "--csv-dir", str(GOLDEN),
    ])
    raise SystemExit(code)


if __name__ == "__main__":
    main_()
