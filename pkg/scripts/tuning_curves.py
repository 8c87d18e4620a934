"""Print train/test accuracy against tree depth and forest size on synthetic prevention data.

    python scripts/tuning_curves.py --seed 42 --csv sweep.csv
"""

import argparse

from firegrid.evaluation import stratified_split, tune_sweep, write_sweep_csv
from firegrid.geodata import synth_generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--task", default="prevention", choices=["prevention", "detection"])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--n-per-class", type=int, default=189)
    ap.add_argument("--csv", help="also write the full 15x15 grid here")
    args = ap.parse_args()

    ds = synth_generate(args.task, args.n_per_class, args.seed)
    train, test = stratified_split(ds, 0.8, seed=args.seed)
    result = tune_sweep(train, test, seed=args.seed)

    n_best, d_best = result.best
    print(f"best n_estimators={n_best} max_depth={d_best} test={result.grid[result.best][1]:.4f}")
    print(f"\ndepth curve at n_estimators={n_best}")
    print("depth  train   test    gap")
    for d in range(1, 16):
        tr, te = result.grid[(n_best, d)]
        print(f"{d:>5}  {tr:.3f}  {te:.3f}  {tr - te:+.3f}")
    print(f"\nsize curve at max_depth={d_best}")
    print("trees  train   test")
    for n in range(1, 16):
        tr, te = result.grid[(n, d_best)]
        print(f"{n:>5}  {tr:.3f}  {te:.3f}")
    if args.csv:
        write_sweep_csv(result, args.csv)


if __name__ == "__main__":
    main()
