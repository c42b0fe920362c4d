"""Declarative audit configuration (JSON or YAML file)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from ifaudit.errors import ValidationError
from ifaudit.lattice import SensitiveAxis
from ifaudit.measures import DEFAULT_CLAMP, MeasureKind
from ifaudit.metrics import DEFAULT_ALPHA_GRID, check_grid

_TOP_KEYS = {
    "model",
    "format",
    "label_column",
    "prediction_column",
    "axes",
    "measures",
    "alpha_grid",
    "smoothing",
    "clamp",
    "min_group_size",
    "bootstrap",
    "axis_sweep",
}
_BOOTSTRAP_KEYS = {"replicas", "seed", "levels", "stratified"}
_AXIS_KEYS = {"name", "column", "attributes"}


@dataclass(frozen=True)
class BootstrapConfig:
    replicas: int = 0
    seed: Optional[int] = None
    levels: tuple[float, float] = (2.5, 97.5)
    stratified: bool = False

    def __post_init__(self):
        if isinstance(self.replicas, bool) or not isinstance(self.replicas, int) or self.replicas < 0:
            raise ValidationError(f"bootstrap.replicas must be a non-negative integer, got {self.replicas!r}")
        if self.replicas > 0 and self.seed is None:
            raise ValidationError("bootstrap.seed is required when bootstrap.replicas > 0")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0):
            raise ValidationError(f"bootstrap.seed must be a non-negative integer, got {self.seed!r}")
        levels = tuple(float(v) for v in self.levels)
        if len(levels) != 2 or not 0.0 <= levels[0] < levels[1] <= 100.0:
            raise ValidationError(f"bootstrap.levels must be two increasing percentiles, got {self.levels!r}")
        object.__setattr__(self, "levels", levels)

    def to_dict(self) -> dict:
        return {
            "replicas": self.replicas,
            "seed": self.seed,
            "levels": list(self.levels),
            "stratified": self.stratified,
        }


@dataclass(frozen=True)
class AuditConfig:
    axes: tuple[SensitiveAxis, ...]
    axis_columns: tuple[str, ...] = ()
    label_column: str = "y"
    prediction_column: str = "yhat"
    measures: tuple[MeasureKind, ...] = (MeasureKind.TPR_DEFICIENCY, MeasureKind.FPR)
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    smoothing: float = 0.0
    clamp: float = DEFAULT_CLAMP
    min_group_size: int = 1
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    axis_sweep: bool = False
    model: str = "model"
    input_format: Optional[str] = None

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValidationError("config declares no sensitive axes")
        object.__setattr__(self, "axes", axes)
        cols = tuple(self.axis_columns) or tuple(ax.name for ax in axes)
        if len(cols) != len(axes):
            raise ValidationError("axis_columns must match the number of axes")
        object.__setattr__(self, "axis_columns", cols)
        referenced = [self.label_column, self.prediction_column, *cols]
        if len(set(referenced)) != len(referenced):
            raise ValidationError(f"columns must be distinct, got {referenced}")

        measures = tuple(MeasureKind.parse(m) for m in self.measures)
        if not measures or len(set(measures)) != len(measures):
            raise ValidationError("measures must be a non-empty list without duplicates")
        object.__setattr__(self, "measures", measures)
        try:
            object.__setattr__(self, "alpha_grid", check_grid(self.alpha_grid))
        except ValueError as exc:
            raise ValidationError(f"alpha_grid: {exc}") from None

        if not (isinstance(self.smoothing, (int, float)) and math.isfinite(self.smoothing) and self.smoothing >= 0):
            raise ValidationError(f"smoothing must be finite and >= 0, got {self.smoothing!r}")
        if not (isinstance(self.clamp, (int, float)) and 0 < self.clamp < 1):
            raise ValidationError(f"clamp must lie in (0, 1), got {self.clamp!r}")
        if isinstance(self.min_group_size, bool) or not isinstance(self.min_group_size, int) or self.min_group_size < 1:
            raise ValidationError(f"min_group_size must be an integer >= 1, got {self.min_group_size!r}")
        object.__setattr__(self, "smoothing", float(self.smoothing))
        object.__setattr__(self, "clamp", float(self.clamp))
        if self.input_format not in (None, "csv", "jsonl"):
            raise ValidationError(f"format must be 'csv' or 'jsonl', got {self.input_format!r}")

    def prefix(self, k: int) -> "AuditConfig":
        """Same audit restricted to the first ``k`` axes."""
        if not 1 <= k <= len(self.axes):
            raise ValueError(f"k must be in 1..{len(self.axes)}")
        return replace(self, axes=self.axes[:k], axis_columns=self.axis_columns[:k])

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "format": self.input_format,
            "label_column": self.label_column,
            "prediction_column": self.prediction_column,
            "axes": [
                {"name": ax.name, "column": col, "attributes": list(ax.attributes)}
                for ax, col in zip(self.axes, self.axis_columns)
            ],
            "measures": [m.value for m in self.measures],
            "alpha_grid": list(self.alpha_grid),
            "smoothing": self.smoothing,
            "clamp": self.clamp,
            "min_group_size": self.min_group_size,
            "bootstrap": self.bootstrap.to_dict(),
            "axis_sweep": self.axis_sweep,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditConfig":
        if not isinstance(d, dict):
            raise ValidationError("config must be a mapping")
        unknown = set(d) - _TOP_KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if "axes" not in d or not isinstance(d["axes"], list):
            raise ValidationError("config requires an 'axes' list")

        axes, columns = [], []
        for i, entry in enumerate(d["axes"]):
            if not isinstance(entry, dict) or "name" not in entry or "attributes" not in entry:
                raise ValidationError(f"axes[{i}] needs 'name' and 'attributes'")
            extra = set(entry) - _AXIS_KEYS
            if extra:
                raise ValidationError(f"axes[{i}] has unknown keys {sorted(extra)}")
            if not isinstance(entry["attributes"], list):
                raise ValidationError(f"axes[{i}].attributes must be a list")
            axes.append(SensitiveAxis(str(entry["name"]), tuple(str(a) for a in entry["attributes"])))
            columns.append(str(entry.get("column", entry["name"])))

        boot = d.get("bootstrap") or {}
        if not isinstance(boot, dict) or set(boot) - _BOOTSTRAP_KEYS:
            raise ValidationError(f"bootstrap must be a mapping with keys {sorted(_BOOTSTRAP_KEYS)}")
        bootstrap = BootstrapConfig(
            replicas=boot.get("replicas", 0),
            seed=boot.get("seed"),
            levels=tuple(boot.get("levels", (2.5, 97.5))),
            stratified=bool(boot.get("stratified", False)),
        )
        kwargs = dict(
            axes=tuple(axes),
            axis_columns=tuple(columns),
            bootstrap=bootstrap,
            input_format=d.get("format"),
        )
        for key in ("label_column", "prediction_column", "smoothing", "clamp", "min_group_size", "model"):
            if key in d:
                kwargs[key] = d[key]
        if "measures" in d:
            kwargs["measures"] = tuple(d["measures"])
        if "alpha_grid" in d:
            kwargs["alpha_grid"] = tuple(d["alpha_grid"])
        if "axis_sweep" in d:
            kwargs["axis_sweep"] = bool(d["axis_sweep"])
        for key in ("label_column", "prediction_column", "model"):
            if key in kwargs and not isinstance(kwargs[key], str):
                raise ValidationError(f"{key} must be a string")
        return cls(**kwargs)


def load_config(path) -> AuditConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ValidationError(f"cannot parse config {path.name}: {exc}".splitlines()[0]) from None
    return AuditConfig.from_dict(raw)
