"""Drone coverage arithmetic, dispatch planning and a discrete-event fleet simulator.

Prevention targets are sprayed over their full cell area. Detected fires are
handled in perimeter mode: a retardant band around the burning cell.
"""

from __future__ import annotations

import csv
import heapq
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple

from .geodata import DEFAULT_CELL_SIZE_M, haversine_m
from .pipeline import TargetReport

SQ_M_PER_ACRE = 4047.0
DEFAULT_BAND_WIDTH_M = 10.0


class DispatchError(ValueError):
    pass


@dataclass(frozen=True)
class DroneSpec:
    spray_rate: float = 10.0  # acres/hour
    flight_minutes_loaded: float = 10.0
    turnaround_minutes: float = 10.0
    payload_kg: float = 10.0
    speed_mps: float = 12.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise DispatchError(f"DroneSpec.{name} must be positive, got {value}")


def cell_acres(cell_size_m: float) -> float:
    if not cell_size_m > 0:
        raise DispatchError("cell size must be positive")
    return cell_size_m**2 / SQ_M_PER_ACRE


def capacity_per_flight(spec: DroneSpec) -> float:
    """Acres sprayed in one loaded flight."""
    return spec.spray_rate * spec.flight_minutes_loaded / 60.0


class DroneRequirement(NamedTuple):
    drones_parallel: int
    trips_single: int
    minutes_parallel: float
    minutes_single: float


def drones_for_area(acres: float, spec: DroneSpec) -> DroneRequirement:
    """Drones needed to cover ``acres`` in one flight each, or trips for a single drone."""
    if acres < 0:
        raise DispatchError("area must be non-negative")
    if acres == 0:
        return DroneRequirement(0, 0, 0.0, 0.0)
    n = math.ceil(acres / capacity_per_flight(spec))
    single = n * spec.flight_minutes_loaded + (n - 1) * spec.turnaround_minutes
    return DroneRequirement(n, n, spec.flight_minutes_loaded, single)


def perimeter_acres(cell_size_m: float, band_width_m: float) -> float:
    """Area of a band of width ``band_width_m`` along all four cell edges (corners not de-duplicated)."""
    if not cell_size_m > 0:
        raise DispatchError("cell size must be positive")
    if band_width_m < 0:
        raise DispatchError("band width must be non-negative")
    if band_width_m > cell_size_m / 2:
        raise DispatchError(f"band width {band_width_m} m exceeds half the cell ({cell_size_m / 2} m)")
    return 4 * cell_size_m * band_width_m / SQ_M_PER_ACRE


@dataclass(frozen=True)
class PlanEntry:
    lat: float
    lon: float
    mode: str
    acres: float
    drones_parallel: int
    trips_single: int
    minutes_parallel: float
    minutes_single: float
    vote_fraction: float


@dataclass(frozen=True)
class DispatchPlan:
    task: str
    entries: tuple[PlanEntry, ...]
    spec: DroneSpec
    cell_size_m: float
    band_width_m: float
    metadata: Mapping = field(default_factory=dict)

    @property
    def totals(self) -> dict:
        return {
            "targets": len(self.entries),
            "acres": sum(e.acres for e in self.entries),
            "drones_parallel": sum(e.drones_parallel for e in self.entries),
            "trips_single": sum(e.trips_single for e in self.entries),
            "minutes_single": sum(e.minutes_single for e in self.entries),
        }

    def to_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "task": self.task,
            "cell_size_m": self.cell_size_m,
            "band_width_m": self.band_width_m,
            "drone": asdict(self.spec),
            "entries": [asdict(e) for e in self.entries],
            "totals": self.totals,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DispatchPlan":
        return cls(
            task=doc["task"],
            entries=tuple(PlanEntry(**e) for e in doc["entries"]),
            spec=DroneSpec(**doc["drone"]),
            cell_size_m=float(doc["cell_size_m"]),
            band_width_m=float(doc["band_width_m"]),
            metadata=doc.get("metadata", {}),
        )


def plan_dispatch(
    report: TargetReport,
    spec: DroneSpec = DroneSpec(),
    cell_size_m: float = DEFAULT_CELL_SIZE_M,
    band_width_m: float = DEFAULT_BAND_WIDTH_M,
) -> DispatchPlan:
    """One entry per target, most confident first, then by (lat, lon)."""
    if report.task == "detection":
        mode, acres = "perimeter", perimeter_acres(cell_size_m, band_width_m)
    else:
        mode, acres = "area", cell_acres(cell_size_m)
    need = drones_for_area(acres, spec)
    targets = sorted(report.targets, key=lambda t: (-t.vote_fraction, t.lat, t.lon))
    entries = tuple(
        PlanEntry(t.lat, t.lon, mode, acres, *need, vote_fraction=t.vote_fraction) for t in targets
    )
    return DispatchPlan(report.task, entries, spec, cell_size_m, band_width_m)


def save_plan(plan: DispatchPlan, json_path: str | Path, csv_path: str | Path | None = None) -> None:
    Path(json_path).write_text(json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if csv_path is not None:
        with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["lat", "lon", "mode", "acres", "drones", "trips", "minutes_single"])
            for e in plan.entries:
                writer.writerow(
                    [repr(e.lat), repr(e.lon), e.mode, repr(e.acres), e.drones_parallel, e.trips_single,
                     repr(e.minutes_single)]
                )


def load_plan(path: str | Path) -> DispatchPlan:
    return DispatchPlan.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Fleet simulation
# ---------------------------------------------------------------------------

EVENT_ORDER = {"return": 0, "depart": 1, "arrive": 2, "spray_complete": 3}


class Event(NamedTuple):
    t_seconds: float
    drone_id: int
    event: str
    lat: float
    lon: float


def simulate_fleet(
    plan: DispatchPlan,
    fleet_size: int,
    base: tuple[float, float],
    spec: DroneSpec | None = None,
) -> list[Event]:
    """Fly every planned trip with ``fleet_size`` drones starting at ``base``.

    Each target needs ``trips_single`` trips. Trips are handed out in plan
    order to whichever drone becomes idle first (lowest id on ties). A trip is
    depart -> arrive -> spray for ``flight_minutes_loaded`` -> return; the
    drone is idle again ``turnaround_minutes`` after landing.
    """
    if fleet_size < 1:
        raise DispatchError("fleet_size must be >= 1")
    spec = spec or plan.spec
    trips = [e for e in plan.entries for _ in range(e.trips_single)]
    spray_s = spec.flight_minutes_loaded * 60.0
    turnaround_s = spec.turnaround_minutes * 60.0
    idle = [(0.0, d) for d in range(fleet_size)]
    heapq.heapify(idle)
    log: list[Event] = []
    for entry in trips:
        t, drone = heapq.heappop(idle)
        travel = float(haversine_m(base[0], base[1], entry.lat, entry.lon)) / spec.speed_mps
        log.append(Event(t, drone, "depart", base[0], base[1]))
        t += travel
        log.append(Event(t, drone, "arrive", entry.lat, entry.lon))
        t += spray_s
        log.append(Event(t, drone, "spray_complete", entry.lat, entry.lon))
        t += travel
        log.append(Event(t, drone, "return", base[0], base[1]))
        heapq.heappush(idle, (t + turnaround_s, drone))
    log.sort(key=lambda e: (e.t_seconds, e.drone_id, EVENT_ORDER[e.event]))
    return log


def write_event_log(events: list[Event], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_seconds", "drone_id", "event", "lat", "lon"])
        for e in events:
            writer.writerow([repr(e.t_seconds), e.drone_id, e.event, repr(e.lat), repr(e.lon)])


def read_event_log(path: str | Path) -> list[Event]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            Event(float(r["t_seconds"]), int(r["drone_id"]), r["event"], float(r["lat"]), float(r["lon"]))
            for r in csv.DictReader(fh)
        ]
