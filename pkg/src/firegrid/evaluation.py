"""Train/test splitting, confusion-matrix metrics, k-fold CV and the tuning sweep."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .geodata import LabeledDataset
from .learners import RandomForestModel, fit_forest, predict_many

SWEEP_RANGE = range(1, 16)


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise EvaluationError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(predictions: Sequence[int], truth: Sequence[int]) -> ConfusionMatrix:
    p = np.asarray(predictions, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if p.shape != t.shape:
        raise EvaluationError(f"length mismatch: {p.size} predictions vs {t.size} labels")
    if p.size == 0:
        raise EvaluationError("empty input")
    return ConfusionMatrix(
        tp=int(np.sum((p == 1) & (t == 1))),
        tn=int(np.sum((p == 0) & (t == 0))),
        fp=int(np.sum((p == 1) & (t == 0))),
        fn=int(np.sum((p == 0) & (t == 1))),
    )


def accuracy(cm: ConfusionMatrix, exact: bool = False):
    """(TP + TN) / total; a Fraction when ``exact`` is set."""
    if cm.total == 0:
        raise EvaluationError("empty confusion matrix")
    value = Fraction(cm.tp + cm.tn, cm.total)
    return value if exact else float(value)


def _ratio(num: int, den: int) -> float:
    # an empty denominator scores 1.0 so degenerate perfect classifiers stay perfect
    return 1.0 if den == 0 else num / den


@dataclass(frozen=True)
class PrecisionRecall:
    per_class: dict[int, tuple[float, float]]  # class -> (precision, recall)
    macro: tuple[float, float]


def precision_recall(cm: ConfusionMatrix) -> PrecisionRecall:
    if cm.total == 0:
        raise EvaluationError("empty confusion matrix")
    pos = (_ratio(cm.tp, cm.tp + cm.fp), _ratio(cm.tp, cm.tp + cm.fn))
    neg = (_ratio(cm.tn, cm.tn + cm.fn), _ratio(cm.tn, cm.tn + cm.fp))
    macro = ((pos[0] + neg[0]) / 2, (pos[1] + neg[1]) / 2)
    return PrecisionRecall({0: neg, 1: pos}, macro)


@dataclass
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    precision_macro: float
    recall_macro: float
    per_class: dict[int, tuple[float, float]]
    cv_fold_accuracies: list[float] | None = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix, **kwargs) -> "EvaluationReport":
        pr = precision_recall(cm)
        return cls(cm, accuracy(cm), pr.macro[0], pr.macro[1], pr.per_class, **kwargs)

    def to_dict(self) -> dict:
        doc = {
            "metadata": self.metadata,
            "confusion": asdict(self.confusion),
            "accuracy": self.accuracy,
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "per_class": {
                str(k): {"precision": p, "recall": r} for k, (p, r) in sorted(self.per_class.items())
            },
            "cv_fold_accuracies": self.cv_fold_accuracies,
        }
        if self.cv_fold_accuracies:
            doc["cv_mean_accuracy"] = float(np.mean(self.cv_fold_accuracies))
        return doc


def evaluate_model(model: RandomForestModel, dataset: LabeledDataset) -> EvaluationReport:
    return EvaluationReport.from_confusion(confusion(predict_many(model, dataset.X), dataset.y))


def save_report(report: EvaluationReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------


def derive_seed(*parts: int) -> int:
    """A 32-bit seed that depends only on ``parts``."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def stratified_split(
    dataset: LabeledDataset, train_fraction: float = 0.8, seed: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Shuffle each class and send ``floor(count * fraction + 0.5)`` of it to train."""
    if len(dataset) == 0:
        raise EvaluationError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise EvaluationError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in (0, 1):
        idx = np.flatnonzero(dataset.y == label)
        if idx.size == 0:
            continue
        idx = rng.permutation(idx)
        n_train = int(np.floor(idx.size * train_fraction + 0.5))
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return dataset.subset(train), dataset.subset(test)


def stratified_folds(dataset: LabeledDataset, k: int, seed: int) -> list[np.ndarray]:
    """Index arrays of ``k`` validation folds.

    Each class is shuffled and the classes are dealt round-robin in one pass,
    so fold sizes differ by at most one both overall and per class.
    """
    n = len(dataset)
    if k < 2:
        raise EvaluationError("k must be >= 2")
    if k > n:
        raise EvaluationError(f"k={k} is larger than the dataset ({n} samples)")
    rng = np.random.default_rng(seed)
    order = np.concatenate(
        [rng.permutation(np.flatnonzero(dataset.y == label)) for label in (0, 1)]
    )
    return [np.sort(order[j::k]) for j in range(k)]


@dataclass(frozen=True)
class CVResult:
    fold_accuracies: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))


def cross_validate(
    dataset: LabeledDataset, n_estimators: int, max_depth: int, k: int = 5, seed: int = 0
) -> CVResult:
    folds = stratified_folds(dataset, k, seed)
    accs = []
    all_idx = np.arange(len(dataset))
    for j, val in enumerate(folds):
        train = np.setdiff1d(all_idx, val)
        model = fit_forest(dataset.subset(train), n_estimators, max_depth, derive_seed(seed, j))
        held_out = dataset.subset(val)
        accs.append(accuracy(confusion(predict_many(model, held_out.X), held_out.y)))
    return CVResult(accs)


# ---------------------------------------------------------------------------
# Tuning sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuningResult:
    grid: dict[tuple[int, int], tuple[float, float]]  # (n, depth) -> (train acc, test acc)
    best: tuple[int, int]
    seed: int

    def rows(self) -> list[tuple[int, int, float, float]]:
        return [(n, d, tr, te) for (n, d), (tr, te) in sorted(self.grid.items())]


def tune_sweep(
    train: LabeledDataset,
    test: LabeledDataset,
    seed: int,
    n_values: Sequence[int] = SWEEP_RANGE,
    depth_values: Sequence[int] = SWEEP_RANGE,
) -> TuningResult:
    """Train/test accuracy for every (n_estimators, max_depth) pair.

    All cells share ``seed``; since tree ``i`` depends only on (seed, i), the
    forest for ``n`` trees is the first ``n`` trees of the largest forest at
    that depth, so only ``max(n_values)`` trees are grown per depth. The best
    cell maximizes test accuracy, ties going to fewer trees then shallower.
    """
    if len(train) == 0 or len(test) == 0:
        raise EvaluationError("tuning needs nonempty train and test sets")
    grid = {}
    n_max = max(n_values)
    for depth in depth_values:
        full = fit_forest(train, n_max, depth, seed)
        for n in n_values:
            model = full.truncated(n)
            tr = accuracy(confusion(predict_many(model, train.X), train.y))
            te = accuracy(confusion(predict_many(model, test.X), test.y))
            grid[(n, depth)] = (tr, te)
    best = min(grid, key=lambda nd: (-grid[nd][1], nd[0], nd[1]))
    return TuningResult(grid, best, int(seed))


def write_sweep_csv(result: TuningResult, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n_estimators", "max_depth", "train_accuracy", "test_accuracy"])
        for n, d, tr, te in result.rows():
            writer.writerow([n, d, repr(tr), repr(te)])
