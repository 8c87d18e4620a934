"""Raster layer ingestion, grid alignment, vegetation indices and masking.

Layers are plain CSV files (``lat,lon,value``), one per parameter. They are
aligned onto the coordinates of the first layer, NDVI/BAI are derived from the
raw reflectance bands, and cells where a fire cannot start (water, ice,
developed land, ...) are masked before anything is classified.

This module also owns the labeled-dataset CSV format and a seeded synthetic
generator used in place of the hand-labeled training data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

LAND_COVER = "land_cover"
RAW_PARAMETERS = (
    "land_cover",
    "wind_speed",
    "precipitation_rate",
    "soil_moisture",
    "temperature",
    "nir",
    "red",
    "swir",
    "humidity",
    "ozone",
    "co2",
)
DERIVED_INPUTS = {"ndvi": ("nir", "red"), "bai": ("nir", "swir")}
UNIT_INTERVAL_PARAMETERS = {"soil_moisture", "nir", "red", "swir"}

# NLCD 2019 legend.
NLCD_CLASSES = {
    11: "Open Water",
    12: "Perennial Ice/Snow",
    21: "Developed, Open Space",
    22: "Developed, Low Intensity",
    23: "Developed, Medium Intensity",
    24: "Developed, High Intensity",
    31: "Barren Land",
    41: "Deciduous Forest",
    42: "Evergreen Forest",
    43: "Mixed Forest",
    51: "Dwarf Scrub",
    52: "Shrub/Scrub",
    71: "Grassland/Herbaceous",
    72: "Sedge/Herbaceous",
    73: "Lichens",
    74: "Moss",
    81: "Pasture/Hay",
    82: "Cultivated Crops",
    90: "Woody Wetlands",
    95: "Emergent Herbaceous Wetlands",
}

MASK_REASONS = (
    "water",
    "ice_snow",
    "developed",
    "barren",
    "moss",
    "wetland",
    "rainfall",
    "missing_data",
)

DEFAULT_LANDCOVER_REASONS = {
    11: "water",
    12: "ice_snow",
    21: "developed",
    22: "developed",
    23: "developed",
    24: "developed",
    31: "barren",
    74: "moss",
    90: "wetland",
    95: "wetland",
}
DEFAULT_RAINFALL_THRESHOLD = 1e-5  # kg/(m^2 s)
DEFAULT_CELL_SIZE_M = 111.0
EARTH_RADIUS_M = 6_371_008.8


class GeoDataError(ValueError):
    """Raised for unreadable or out-of-contract geodata input."""


class DegenerateIndexError(GeoDataError):
    """Normalized-difference index with a zero denominator."""


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaskSchema:
    task: str
    feature_order: tuple[str, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_order)

    def required_layers(self) -> tuple[str, ...]:
        """Raw layers needed to assemble this schema, in first-use order."""
        needed: list[str] = []
        for name in self.feature_order:
            for raw in DERIVED_INPUTS.get(name, (name,)):
                if raw not in needed:
                    needed.append(raw)
        return tuple(needed)

    def index(self, name: str) -> int:
        return self.feature_order.index(name)

    def to_dict(self) -> dict:
        return {"task": self.task, "feature_order": list(self.feature_order)}


PREVENTION = TaskSchema(
    "prevention",
    ("land_cover", "wind_speed", "precipitation_rate", "soil_moisture", "temperature", "ndvi"),
)
DETECTION = TaskSchema(
    "detection",
    ("land_cover", "humidity", "temperature", "ndvi", "bai", "ozone", "co2"),
)
SCHEMAS = {"prevention": PREVENTION, "detection": DETECTION}


def schema_for(task: str) -> TaskSchema:
    try:
        return SCHEMAS[task]
    except KeyError:
        raise GeoDataError(f"unknown task {task!r}; expected one of {sorted(SCHEMAS)}") from None


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------


def _check_coordinate(lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
        raise GeoDataError(f"coordinate out of range: ({lat}, {lon})")


@dataclass(frozen=True)
class ParameterLayer:
    parameter_id: str
    cells: Mapping[tuple[float, float], float]

    def __post_init__(self):
        if self.parameter_id not in RAW_PARAMETERS:
            raise GeoDataError(f"unknown parameter {self.parameter_id!r}")
        for (lat, lon), value in self.cells.items():
            _check_coordinate(lat, lon)
            _check_value(self.parameter_id, value)

    def __len__(self) -> int:
        return len(self.cells)


def _check_value(parameter_id: str, value: float) -> None:
    if not math.isfinite(value):
        raise GeoDataError(f"{parameter_id}: non-finite value {value}")
    if parameter_id in UNIT_INTERVAL_PARAMETERS and not 0.0 <= value <= 1.0:
        raise GeoDataError(f"{parameter_id}: value {value} outside [0, 1]")
    if parameter_id == LAND_COVER and (value != int(value) or int(value) not in NLCD_CLASSES):
        raise GeoDataError(f"land_cover: {value} is not a known class code")


def load_layer(path: str | Path, parameter_id: str) -> ParameterLayer:
    """Read a ``lat,lon,value`` CSV. Rows with an empty value are skipped."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"layer file not found: {path}")
    cells: dict[tuple[float, float], float] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["lat", "lon", "value"]:
            raise GeoDataError(f"{path}:1: expected header 'lat,lon,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise GeoDataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                lat, lon = float(row[0]), float(row[1])
                raw = row[2].strip()
                value = float(raw) if raw else None
            except ValueError as exc:
                raise GeoDataError(f"{path}:{lineno}: {exc}") from None
            try:
                _check_coordinate(lat, lon)
                if value is not None:
                    _check_value(parameter_id, value)
            except GeoDataError as exc:
                raise GeoDataError(f"{path}:{lineno}: {exc}") from None
            if value is None:
                continue
            if (lat, lon) in cells:
                raise GeoDataError(f"{path}:{lineno}: duplicate coordinate ({lat}, {lon})")
            cells[(lat, lon)] = value
    return ParameterLayer(parameter_id, cells)


def write_layer(layer: ParameterLayer, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lat", "lon", "value"])
        for (lat, lon), value in layer.cells.items():
            writer.writerow([repr(lat), repr(lon), repr(value)])


# ---------------------------------------------------------------------------
# Indices
# ---------------------------------------------------------------------------


def _normalized_difference(a: float, b: float, name: str) -> float:
    denom = a + b
    if denom == 0:
        raise DegenerateIndexError(f"{name}: zero denominator")
    return (a - b) / denom


def compute_ndvi(nir: float, red: float) -> float:
    """Normalized Difference Vegetation Index, (nir - red) / (nir + red)."""
    return _normalized_difference(nir, red, "ndvi")


def compute_bai(nir: float, swir: float) -> float:
    """Burned-area index as (nir - swir) / (nir + swir)."""
    return _normalized_difference(nir, swir, "bai")


_INDEX_FUNCS = {"ndvi": compute_ndvi, "bai": compute_bai}


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridCell:
    lat: float
    lon: float
    features: tuple[float, ...]
    masked: bool = False
    mask_reason: str | None = None

    def __post_init__(self):
        if self.masked != (self.mask_reason is not None):
            raise GeoDataError("masked must be true exactly when mask_reason is set")
        if self.mask_reason is not None and self.mask_reason not in MASK_REASONS:
            raise GeoDataError(f"unknown mask reason {self.mask_reason!r}")
        if not self.masked and not all(math.isfinite(v) for v in self.features):
            raise GeoDataError(f"unmasked cell ({self.lat}, {self.lon}) has missing features")

    def with_mask(self, reason: str) -> "GridCell":
        return replace(self, masked=True, mask_reason=reason)


@dataclass(frozen=True)
class FeatureGrid:
    schema: TaskSchema
    cells: tuple[GridCell, ...]
    cell_size_m: float = DEFAULT_CELL_SIZE_M

    def __post_init__(self):
        coords = {(c.lat, c.lon) for c in self.cells}
        if len(coords) != len(self.cells):
            raise GeoDataError("grid contains duplicate coordinates")
        for c in self.cells:
            if len(c.features) != self.schema.n_features:
                raise GeoDataError(
                    f"cell ({c.lat}, {c.lon}) has {len(c.features)} features, "
                    f"schema {self.schema.task} needs {self.schema.n_features}"
                )

    def unmasked(self) -> list[GridCell]:
        return [c for c in self.cells if not c.masked]

    def to_dict(self) -> dict:
        return {
            "cell_size_m": self.cell_size_m,
            "schema": self.schema.to_dict(),
            "cells": [
                {
                    "lat": c.lat,
                    "lon": c.lon,
                    "features": [v if math.isfinite(v) else None for v in c.features],
                    "masked": c.masked,
                    "mask_reason": c.mask_reason,
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureGrid":
        schema = schema_for(doc["schema"]["task"])
        if list(doc["schema"]["feature_order"]) != list(schema.feature_order):
            raise GeoDataError("grid snapshot feature order does not match its task")
        cells = tuple(
            GridCell(
                lat=float(c["lat"]),
                lon=float(c["lon"]),
                features=tuple(math.nan if v is None else float(v) for v in c["features"]),
                masked=bool(c["masked"]),
                mask_reason=c["mask_reason"],
            )
            for c in doc["cells"]
        )
        return cls(schema, cells, float(doc["cell_size_m"]))


def save_grid(grid: FeatureGrid, path: str | Path) -> None:
    Path(path).write_text(json.dumps(grid.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_grid(path: str | Path) -> FeatureGrid:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return FeatureGrid.from_dict(doc)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise GeoDataError(f"{path}: invalid grid snapshot ({exc})") from None


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters. Broadcasts over numpy arrays."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlmb = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


class _Lookup:
    """Nearest-coordinate lookup within a distance tolerance."""

    def __init__(self, layer: ParameterLayer, tolerance_m: float):
        self.cells = layer.cells
        self.tolerance_m = tolerance_m
        keys = list(layer.cells)
        self.lats = np.array([k[0] for k in keys], dtype=float)
        self.lons = np.array([k[1] for k in keys], dtype=float)
        self.values = np.array([layer.cells[k] for k in keys], dtype=float)

    def get(self, lat: float, lon: float) -> float | None:
        exact = self.cells.get((lat, lon))
        if exact is not None:
            return exact
        if self.values.size == 0:
            return None
        d = haversine_m(lat, lon, self.lats, self.lons)
        i = int(np.argmin(d))
        return float(self.values[i]) if d[i] <= self.tolerance_m else None


def align_layers(
    layers: Sequence[ParameterLayer],
    schema: TaskSchema,
    cell_size_m: float = DEFAULT_CELL_SIZE_M,
) -> FeatureGrid:
    """Assemble a feature grid on the coordinates of ``layers[0]``.

    Every other layer contributes its value at the nearest coordinate within
    half a cell. Cells lacking a required value, or whose NDVI/BAI denominator
    is zero, are kept but masked as ``missing_data``.
    """
    if cell_size_m <= 0:
        raise GeoDataError("cell_size_m must be positive")
    if not layers:
        raise GeoDataError("no layers supplied")
    by_id = {layer.parameter_id: layer for layer in layers}
    for name in schema.required_layers():
        if name not in by_id:
            raise GeoDataError(f"missing required layer: {name}")
    tol = cell_size_m / 2
    lookups = {name: _Lookup(by_id[name], tol) for name in schema.required_layers()}

    cells = []
    for lat, lon in layers[0].cells:
        raw = {name: lk.get(lat, lon) for name, lk in lookups.items()}
        features = []
        reason = None
        for name in schema.feature_order:
            if name in _INDEX_FUNCS:
                a, b = (raw[r] for r in DERIVED_INPUTS[name])
                if a is None or b is None:
                    value = None
                else:
                    try:
                        value = _INDEX_FUNCS[name](a, b)
                    except DegenerateIndexError:
                        value = None
            else:
                value = raw[name]
            if value is None:
                reason = "missing_data"
                value = math.nan
            features.append(float(value))
        cells.append(GridCell(lat, lon, tuple(features), reason is not None, reason))
    return FeatureGrid(schema, tuple(cells), float(cell_size_m))


# ---------------------------------------------------------------------------
# Masking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaskSpec:
    excluded_landcover_codes: frozenset[int] = frozenset(DEFAULT_LANDCOVER_REASONS)
    rainfall_threshold: float = DEFAULT_RAINFALL_THRESHOLD
    landcover_reasons: Mapping[int, str] = field(
        default_factory=lambda: dict(DEFAULT_LANDCOVER_REASONS)
    )

    def __post_init__(self):
        object.__setattr__(
            self, "excluded_landcover_codes", frozenset(int(c) for c in self.excluded_landcover_codes)
        )
        if not self.rainfall_threshold >= 0:
            raise GeoDataError("rainfall_threshold must be >= 0")
        for code in self.excluded_landcover_codes:
            if code not in self.landcover_reasons:
                raise GeoDataError(f"no mask reason configured for land-cover code {code}")
            if self.landcover_reasons[code] not in MASK_REASONS:
                raise GeoDataError(f"bad mask reason for code {code}")


def apply_mask(grid: FeatureGrid, spec: MaskSpec) -> FeatureGrid:
    """Mask excluded land cover (both tasks) and rainfall (prevention only).

    Cells are only ever masked, never unmasked; existing reasons are kept.
    """
    lc = grid.schema.index(LAND_COVER)
    rain = (
        grid.schema.index("precipitation_rate")
        if "precipitation_rate" in grid.schema.feature_order
        else None
    )
    out = []
    for cell in grid.cells:
        if not cell.masked:
            code = cell.features[lc]
            if code == int(code) and int(code) in spec.excluded_landcover_codes:
                cell = cell.with_mask(spec.landcover_reasons[int(code)])
            elif rain is not None and cell.features[rain] > spec.rainfall_threshold:
                cell = cell.with_mask("rainfall")
        out.append(cell)
    return replace(grid, cells=tuple(out))


# ---------------------------------------------------------------------------
# Labeled data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Labeled coordinate samples; label 1 is hotspot (prevention) or wildfire (detection)."""

    schema: TaskSchema
    coords: np.ndarray  # (n, 2) lat, lon
    X: np.ndarray  # (n, d)
    y: np.ndarray  # (n,) int

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(-1, self.schema.n_features)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        coords = np.asarray(self.coords, dtype=float).reshape(-1, 2)
        if not (len(X) == len(y) == len(coords)):
            raise GeoDataError("coords, X and y must have the same number of rows")
        if np.any((y != 0) & (y != 1)):
            raise GeoDataError("labels must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def task(self) -> str:
        return self.schema.task

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.schema, self.coords[idx], self.X[idx], self.y[idx])

    def class_counts(self) -> tuple[int, int]:
        return int(np.sum(self.y == 0)), int(np.sum(self.y == 1))


def load_labeled_dataset(path: str | Path, schema: TaskSchema) -> LabeledDataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"labeled file not found: {path}")
    expected = ["lat", "lon", *schema.feature_order, "label"]
    coords, rows, labels = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise GeoDataError(f"{path}: empty file, expected header {','.join(expected)}")
        header = [h.strip() for h in header]
        if len(header) != len(expected):
            raise GeoDataError(
                f"{path}:1: expected {len(expected)} columns for {schema.task}, got {len(header)}"
            )
        if header != expected:
            raise GeoDataError(f"{path}:1: expected header {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise GeoDataError(
                    f"{path}:{lineno}: expected {len(expected)} columns, got {len(row)}"
                )
            try:
                values = [float(v) for v in row[:-1]]
            except ValueError as exc:
                raise GeoDataError(f"{path}:{lineno}: {exc}") from None
            label = row[-1].strip()
            if label not in ("0", "1"):
                raise GeoDataError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
            _check_coordinate(values[0], values[1])
            coords.append(values[:2])
            rows.append(values[2:])
            labels.append(int(label))
    return LabeledDataset(
        schema,
        np.array(coords, dtype=float).reshape(-1, 2),
        np.array(rows, dtype=float).reshape(-1, schema.n_features),
        np.array(labels, dtype=np.int64),
    )


def write_labeled_dataset(ds: LabeledDataset, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lat", "lon", *ds.schema.feature_order, "label"])
        for (lat, lon), x, label in zip(ds.coords, ds.X, ds.y):
            writer.writerow([repr(float(lat)), repr(float(lon)), *(repr(float(v)) for v in x), int(label)])


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureProfile:
    """Gaussian (mean, std) per continuous feature; land cover is drawn separately."""

    means: Mapping[str, float]
    stds: Mapping[str, float]


@dataclass(frozen=True)
class SynthConfig:
    """Class-conditional distributions for :func:`synth_generate`.

    Positives come from ``risky``. Negatives are an equal-weight mixture of the
    ``safe_components``; each component names the features it draws from
    ``safe`` (the rest come from ``risky``). Components where only NDVI is
    safe, with NDVI either below or above the risky mid band, make the
    boundary non-monotone in NDVI, which a linear model cannot follow.

    ``overlap`` scales every standard deviation.
    """

    risky: Mapping[str, float]
    safe: Mapping[str, float]
    safe_ndvi_high: float | None
    stds: Mapping[str, float]
    safe_components: tuple[tuple[str, ...], ...]
    landcover_codes: tuple[int, ...] = (41, 42, 43, 52, 71, 81)
    overlap: float = 1.0
    bounds: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: {
            "wind_speed": (0.0, math.inf),
            "precipitation_rate": (0.0, math.inf),
            "soil_moisture": (0.0, 1.0),
            "humidity": (0.0, math.inf),
            "ndvi": (-1.0, 1.0),
            "bai": (-1.0, 1.0),
            "ozone": (0.0, math.inf),
            "co2": (0.0, math.inf),
        }
    )

    def component_means(self, component: tuple[str, ...], ndvi_high: bool = False) -> dict:
        means = dict(self.risky)
        for name in component:
            means[name] = self.safe[name]
        if ndvi_high and "ndvi" in component and self.safe_ndvi_high is not None:
            means["ndvi"] = self.safe_ndvi_high
        return means

    def negative_components(self) -> list[dict]:
        """Mean vectors of every negative mixture component, equally weighted."""
        out = []
        for comp in self.safe_components:
            if comp == ("ndvi",) and self.safe_ndvi_high is not None:
                out.append(self.component_means(comp, ndvi_high=False))
                out.append(self.component_means(comp, ndvi_high=True))
            else:
                out.append(self.component_means(comp))
        return out

    def class_means(self) -> tuple[dict, dict]:
        """Documented (negative, positive) class-conditional means, ignoring clipping."""
        comps = self.negative_components()
        neg = {k: float(np.mean([c[k] for c in comps])) for k in self.risky}
        return neg, dict(self.risky)


# temperature in deg C, wind m/s, precipitation kg/(m^2 s), soil moisture m^3/m^3
PREVENTION_SYNTH = SynthConfig(
    risky={
        "wind_speed": 8.0,
        "precipitation_rate": 1e-6,
        "soil_moisture": 0.10,
        "temperature": 34.0,
        "ndvi": 0.45,
    },
    safe={
        "wind_speed": 3.0,
        "precipitation_rate": 6e-6,
        "soil_moisture": 0.32,
        "temperature": 20.0,
        "ndvi": 0.10,
    },
    safe_ndvi_high=0.80,
    stds={
        "wind_speed": 1.5,
        "precipitation_rate": 1e-6,
        "soil_moisture": 0.04,
        "temperature": 3.0,
        "ndvi": 0.05,
    },
    # all-benign weather, and hot/dry/windy cells with no fuel or lush green fuel
    safe_components=(
        ("wind_speed", "precipitation_rate", "soil_moisture", "temperature"),
        ("ndvi",),
    ),
)

# humidity kg/kg at 2 m, ozone ppb, co2 ppm
DETECTION_SYNTH = SynthConfig(
    risky={
        "humidity": 0.004,
        "temperature": 38.0,
        "ndvi": 0.20,
        "bai": -0.25,
        "ozone": 70.0,
        "co2": 430.0,
    },
    safe={
        "humidity": 0.010,
        "temperature": 24.0,
        "ndvi": 0.60,
        "bai": 0.35,
        "ozone": 45.0,
        "co2": 412.0,
    },
    safe_ndvi_high=None,
    stds={
        "humidity": 0.0025,
        "temperature": 5.0,
        "ndvi": 0.15,
        "bai": 0.15,
        "ozone": 10.0,
        "co2": 8.0,
    },
    # benign day, hot dry day without fire, and a smoggy but unburned cell
    safe_components=(
        ("humidity", "temperature", "ndvi", "bai", "ozone", "co2"),
        ("ndvi", "bai", "ozone", "co2"),
        ("humidity", "temperature", "ndvi", "bai"),
    ),
)

SYNTH_CONFIGS = {"prevention": PREVENTION_SYNTH, "detection": DETECTION_SYNTH}


def _draw(config: SynthConfig, schema: TaskSchema, means: Mapping[str, float], n: int, rng) -> np.ndarray:
    X = np.empty((n, schema.n_features))
    for j, name in enumerate(schema.feature_order):
        if name == LAND_COVER:
            X[:, j] = rng.choice(config.landcover_codes, size=n)
            continue
        col = rng.normal(means[name], config.stds[name] * config.overlap, size=n)
        lo, hi = config.bounds.get(name, (-math.inf, math.inf))
        X[:, j] = np.clip(col, lo, hi)
    return X


def synth_generate(
    task: str,
    n_per_class: int,
    seed: int,
    config: SynthConfig | None = None,
    origin: tuple[float, float] = (34.0, -118.0),
) -> LabeledDataset:
    """Seeded synthetic labeled dataset: ``n_per_class`` positives then negatives.

    Negative components are assigned round-robin so each gets an equal share.
    Coordinates are placed on a small lattice near ``origin``.
    """
    if n_per_class < 1:
        raise GeoDataError("n_per_class must be >= 1")
    schema = schema_for(task)
    config = config or SYNTH_CONFIGS[task]
    rng = np.random.default_rng(seed)
    pos = _draw(config, schema, config.risky, n_per_class, rng)
    comps = config.negative_components()
    which = np.arange(n_per_class) % len(comps)
    neg = np.empty_like(pos)
    for k, means in enumerate(comps):
        rows = np.flatnonzero(which == k)
        neg[rows] = _draw(config, schema, means, len(rows), rng)
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n_per_class, dtype=np.int64), np.zeros(n_per_class, dtype=np.int64)])
    n = len(y)
    side = math.ceil(math.sqrt(n))
    idx = np.arange(n)
    coords = np.column_stack([origin[0] + 0.001 * (idx // side), origin[1] + 0.001 * (idx % side)])
    return LabeledDataset(schema, np.round(coords, 6), X, y)


# ---------------------------------------------------------------------------
# Synthetic layers
# ---------------------------------------------------------------------------


def synth_layers(
    task: str,
    rows: int,
    cols: int,
    seed: int,
    risky_cells: Iterable[tuple[int, int]] = (),
    landcover: Mapping[tuple[int, int], int] | None = None,
    origin: tuple[float, float] = (34.0, -118.0),
    spacing_deg: float = 0.001,
    config: SynthConfig | None = None,
) -> dict[str, ParameterLayer]:
    """Raw parameter layers for a ``rows x cols`` lattice.

    Cells listed in ``risky_cells`` are drawn from the positive profile, the
    rest from the all-benign negative component. NDVI/BAI targets are turned
    back into reflectance bands with red fixed at 0.1 (nir at 0.3 for BAI).
    """
    schema = schema_for(task)
    config = config or SYNTH_CONFIGS[task]
    rng = np.random.default_rng(seed)
    risky = set(risky_cells)
    benign = config.component_means(config.safe_components[0])
    landcover = landcover or {}
    raw: dict[str, dict] = {name: {} for name in schema.required_layers()}
    for r in range(rows):
        for c in range(cols):
            lat = round(origin[0] + r * spacing_deg, 6)
            lon = round(origin[1] + c * spacing_deg, 6)
            means = config.risky if (r, c) in risky else benign
            x = _draw(config, schema, means, 1, rng)[0]
            vals = dict(zip(schema.feature_order, x))
            if (r, c) in landcover:
                vals[LAND_COVER] = landcover[(r, c)]
            red = 0.1
            ndvi = float(np.clip(vals["ndvi"], -0.8, 0.8))
            nir = red * (1 + ndvi) / (1 - ndvi)
            raw["red"][(lat, lon)] = red
            raw["nir"][(lat, lon)] = nir
            if "bai" in vals:
                bai = float(np.clip(vals["bai"], -0.9, 0.9))
                raw["swir"][(lat, lon)] = min(1.0, nir * (1 - bai) / (1 + bai))
            for name in schema.feature_order:
                if name in raw:
                    raw[name][(lat, lon)] = float(vals[name])
    return {name: ParameterLayer(name, cells) for name, cells in raw.items()}
