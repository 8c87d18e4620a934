"""Coverage arithmetic for one grid cell under a given drone spec."""

import argparse

from firegrid.dispatch import DroneSpec, capacity_per_flight, cell_acres, drones_for_area, perimeter_acres


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cell-size", type=float, default=111.0, help="cell edge in meters")
    ap.add_argument("--band-width", type=float, default=10.0, help="perimeter band in meters")
    ap.add_argument("--spray-rate", type=float, default=10.0, help="acres per hour")
    ap.add_argument("--flight-minutes", type=float, default=10.0)
    ap.add_argument("--turnaround", type=float, default=10.0)
    args = ap.parse_args()

    spec = DroneSpec(
        spray_rate=args.spray_rate,
        flight_minutes_loaded=args.flight_minutes,
        turnaround_minutes=args.turnaround,
    )
    cap = capacity_per_flight(spec)
    print(f"capacity per flight: {cap:.4f} acres")
    for label, acres in (
        ("area", cell_acres(args.cell_size)),
        ("perimeter", perimeter_acres(args.cell_size, args.band_width)),
    ):
        need = drones_for_area(acres, spec)
        print(
            f"{label:>9}: {acres:.2f} acres -> {need.drones_parallel} drones for "
            f"{need.minutes_parallel:g} min, or one drone in {need.trips_single} trips / "
            f"{need.minutes_single:g} min"
        )


if __name__ == "__main__":
    main()
