"""Write a self-contained demo run directory: labeled data, raster layers, no-spray zones and a config.

    python scripts/make_demo_run.py demo/ --task prevention
    firegrid pipeline --config demo/run.json
"""

import argparse
import json
from pathlib import Path

from firegrid.geodata import synth_generate, synth_layers, write_labeled_dataset, write_layer

ROWS, COLS = 10, 10
RISKY_BLOCK = [(r, c) for r in range(2, 5) for c in range(3, 7)]
WATER = [(8, c) for c in range(COLS)]  # a river along row 8


def make_demo(out: Path, task: str, seed: int) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    write_labeled_dataset(synth_generate(task, 189, seed), out / "labeled.csv")
    layers = synth_layers(
        task, ROWS, COLS, seed, risky_cells=RISKY_BLOCK, landcover={rc: 11 for rc in WATER}
    )
    (out / "layers").mkdir(exist_ok=True)
    for name, layer in layers.items():
        write_layer(layer, out / "layers" / f"{name}.csv")
    lat0, lon0 = 34.0, -118.0
    # first risky cell sits in a protected watershed
    (out / "no_spray.json").write_text(
        json.dumps({"cells": [[lat0 + 0.002, lon0 + 0.003]], "landcover_codes": []}, indent=2) + "\n"
    )
    config = {
        "task": task,
        "data": "labeled.csv",
        "out": "out",
        "seed": seed,
        "n-estimators": 7,
        "max-depth": 5,
        "layers": {name: f"layers/{name}.csv" for name in layers},
        "no-spray": "no_spray.json",
        "fleet-size": 2,
        "base": [lat0 - 0.01, lon0 - 0.01],
    }
    path = out / "run.json"
    path.write_text(json.dumps(config, indent=2) + "\n")
    return path


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--task", default="prevention", choices=["prevention", "detection"])
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    print(make_demo(args.out, args.task, args.seed))
