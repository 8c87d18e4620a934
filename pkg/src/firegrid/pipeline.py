"""Preprocess -> classify -> no-spray filter, producing target lists for dispatch."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from .geodata import (
    DEFAULT_CELL_SIZE_M,
    LAND_COVER,
    FeatureGrid,
    GeoDataError,
    MaskSpec,
    align_layers,
    apply_mask,
    load_layer,
    schema_for,
)
from .learners import RandomForestModel, load_model, model_id, vote_fraction_many

COORD_DIGITS = 6


class SchemaMismatchError(ValueError):
    pass


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _key(lat: float, lon: float) -> tuple[float, float]:
    return (round(lat, COORD_DIGITS), round(lon, COORD_DIGITS))


@dataclass(frozen=True)
class Target:
    lat: float
    lon: float
    vote_fraction: float


@dataclass(frozen=True)
class TargetReport:
    task: str
    targets: tuple[Target, ...]
    total_cells: int
    masked_cells: int
    positive_cells: int
    suppressed_cells: int
    model_id: str
    metadata: Mapping = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "task": self.task,
            "model_id": self.model_id,
            "counts": {
                "total_cells": self.total_cells,
                "masked_cells": self.masked_cells,
                "positive_cells": self.positive_cells,
                "suppressed_cells": self.suppressed_cells,
            },
            "targets": [
                {"lat": t.lat, "lon": t.lon, "vote_fraction": t.vote_fraction} for t in self.targets
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TargetReport":
        counts = doc["counts"]
        return cls(
            task=doc["task"],
            targets=tuple(Target(float(t["lat"]), float(t["lon"]), float(t["vote_fraction"])) for t in doc["targets"]),
            total_cells=int(counts["total_cells"]),
            masked_cells=int(counts["masked_cells"]),
            positive_cells=int(counts["positive_cells"]),
            suppressed_cells=int(counts["suppressed_cells"]),
            model_id=doc["model_id"],
            metadata=doc.get("metadata", {}),
        )


def save_report(report: TargetReport, json_path: str | Path, csv_path: str | Path | None = None) -> None:
    Path(json_path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if csv_path is not None:
        with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["lat", "lon", "vote_fraction"])
            for t in report.targets:
                writer.writerow([repr(t.lat), repr(t.lon), repr(t.vote_fraction)])


def load_report(path: str | Path) -> TargetReport:
    return TargetReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class NoSpraySpec:
    cells: frozenset = frozenset()
    landcover_codes: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "cells", frozenset(_key(lat, lon) for lat, lon in self.cells))
        object.__setattr__(self, "landcover_codes", frozenset(int(c) for c in self.landcover_codes))


def load_no_spray(path: str | Path) -> NoSpraySpec:
    """JSON ``{"cells": [[lat, lon], ...], "landcover_codes": [...]}``; both keys optional."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return NoSpraySpec(
        cells=frozenset(tuple(map(float, c)) for c in doc.get("cells", [])),
        landcover_codes=frozenset(doc.get("landcover_codes", [])),
    )


def classify_grid(grid: FeatureGrid, model: RandomForestModel) -> TargetReport:
    """Run every unmasked cell through the forest; positives become targets."""
    if grid.schema != model.schema:
        raise SchemaMismatchError(
            f"grid is a {grid.schema.task} grid but the model was trained for {model.schema.task}"
        )
    live = grid.unmasked()
    fractions = vote_fraction_many(model, [c.features for c in live]) if live else []
    targets = [Target(c.lat, c.lon, float(f)) for c, f in zip(live, fractions) if f >= 0.5]
    targets.sort(key=lambda t: (t.lat, t.lon))
    return TargetReport(
        task=grid.schema.task,
        targets=tuple(targets),
        total_cells=len(grid.cells),
        masked_cells=len(grid.cells) - len(live),
        positive_cells=len(targets),
        suppressed_cells=0,
        model_id=model_id(model),
    )


def filter_no_spray(report: TargetReport, spec: NoSpraySpec, grid: FeatureGrid) -> TargetReport:
    """Drop prevention targets inside no-spray cells or land-cover classes.

    Detection reports pass through unchanged: an active fire is suppressed
    along its perimeter regardless.
    """
    if report.task != "prevention":
        return report
    lc = grid.schema.index(LAND_COVER)
    cover = {_key(c.lat, c.lon): int(c.features[lc]) for c in grid.cells}
    kept = [
        t
        for t in report.targets
        if _key(t.lat, t.lon) not in spec.cells
        and cover.get(_key(t.lat, t.lon)) not in spec.landcover_codes
    ]
    dropped = len(report.targets) - len(kept)
    return replace(report, targets=tuple(kept), suppressed_cells=report.suppressed_cells + dropped)


# ---------------------------------------------------------------------------
# End-to-end runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    task: str
    layers: Mapping[str, str]
    model_path: str
    out_dir: str
    mask: MaskSpec = field(default_factory=MaskSpec)
    no_spray_path: str | None = None
    cell_size_m: float = DEFAULT_CELL_SIZE_M


def _file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_hash(config: PipelineConfig) -> str:
    """Hash of everything that determines the targets, by content rather than path."""
    doc = {
        "task": config.task,
        "layers": {name: _file_digest(p) for name, p in sorted(config.layers.items())},
        "no_spray": _file_digest(config.no_spray_path) if config.no_spray_path else None,
        "cell_size_m": config.cell_size_m,
        "mask": {
            "excluded_landcover_codes": sorted(config.mask.excluded_landcover_codes),
            "landcover_reasons": {str(k): v for k, v in sorted(config.mask.landcover_reasons.items())},
            "rainfall_threshold": config.mask.rainfall_threshold,
        },
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def data_timestamp(paths) -> str:
    """``SOURCE_DATE_EPOCH`` if set, else the newest input mtime, as UTC ISO-8601.

    Wall-clock time would make otherwise identical runs differ byte-wise.
    """
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        ts = float(epoch)
    else:
        ts = max((Path(p).stat().st_mtime for p in paths), default=0.0)
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).isoformat()


def build_grid(config: PipelineConfig) -> FeatureGrid:
    """Load, align and mask the configured layers."""
    schema = schema_for(config.task)
    try:
        missing = [name for name in schema.required_layers() if name not in config.layers]
        if missing:
            raise GeoDataError(f"missing required layer: {missing[0]}")
        # land_cover leads both schemas, so the grid is keyed on its coordinates
        layers = [load_layer(config.layers[name], name) for name in schema.required_layers()]
    except (OSError, ValueError) as exc:
        raise StageError("load", exc) from exc
    try:
        grid = align_layers(layers, schema, config.cell_size_m)
    except ValueError as exc:
        raise StageError("align", exc) from exc
    return apply_mask(grid, config.mask)


def _run(config: PipelineConfig, expected_task: str) -> TargetReport:
    if config.task != expected_task:
        raise StageError("config", ValueError(f"config task is {config.task!r}, expected {expected_task!r}"))
    grid = build_grid(config)
    try:
        model = load_model(config.model_path)
    except (OSError, ValueError) as exc:
        raise StageError("load_model", exc) from exc
    try:
        report = classify_grid(grid, model)
    except ValueError as exc:
        raise StageError("classify", exc) from exc
    if config.task == "prevention" and config.no_spray_path:
        try:
            spec = load_no_spray(config.no_spray_path)
        except (OSError, ValueError, TypeError) as exc:
            raise StageError("no_spray", exc) from exc
        report = filter_no_spray(report, spec, grid)
    # the model is left out: a pipeline run may have just rewritten it
    inputs = list(config.layers.values())
    if config.no_spray_path:
        inputs.append(config.no_spray_path)
    report = replace(
        report,
        metadata={"timestamp": data_timestamp(inputs), "config_hash": config_hash(config), "model_id": report.model_id},
    )
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_report(report, out / "targets.json", out / "targets.csv")
    return report


def run_prevention(config: PipelineConfig) -> TargetReport:
    return _run(config, "prevention")


def run_detection(config: PipelineConfig) -> TargetReport:
    return _run(config, "detection")
