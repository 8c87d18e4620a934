"""Random forest vs logistic regression over several seeds."""

import argparse

from firegrid.evaluation import accuracy, confusion, stratified_split
from firegrid.geodata import synth_generate
from firegrid.learners import fit_forest, fit_logistic, predict_logistic_many, predict_many


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--task", default="prevention", choices=["prevention", "detection"])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 42, 7])
    ap.add_argument("--n-estimators", type=int, default=7)
    ap.add_argument("--max-depth", type=int, default=5)
    args = ap.parse_args()

    print("seed  forest  logistic")
    for seed in args.seeds:
        train, test = stratified_split(synth_generate(args.task, 189, seed), 0.8, seed=seed)
        rf = fit_forest(train, args.n_estimators, args.max_depth, seed=seed)
        lr = fit_logistic(train)
        rf_acc = accuracy(confusion(predict_many(rf, test.X), test.y))
        lr_acc = accuracy(confusion(predict_logistic_many(lr, test.X), test.y))
        print(f"{seed:>4}  {rf_acc:.4f}  {lr_acc:.4f}")


if __name__ == "__main__":
    main()
