import csv
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from firegrid.evaluation import (
    ConfusionMatrix,
    EvaluationError,
    accuracy,
    confusion,
    cross_validate,
    precision_recall,
    stratified_folds,
    stratified_split,
    tune_sweep,
    write_sweep_csv,
)
from firegrid.geodata import PREVENTION, LabeledDataset, synth_generate
from firegrid.learners import fit_forest, predict_many


def dataset(n_pos, n_neg):
    n = n_pos + n_neg
    X = np.arange(n * 6, dtype=float).reshape(n, 6)
    y = np.array([1] * n_pos + [0] * n_neg)
    return LabeledDataset(PREVENTION, np.zeros((n, 2)), X, y)


# --- confusion and metrics ---------------------------------------------------


def test_confusion_perfect():
    truth = [1] * 5 + [0] * 5
    assert confusion(truth, truth) == ConfusionMatrix(5, 5, 0, 0)


def test_confusion_counts_each_case():
    assert confusion([1, 0, 1, 0], [1, 0, 0, 1]) == ConfusionMatrix(1, 1, 1, 1)


def test_confusion_errors():
    with pytest.raises(EvaluationError):
        confusion([1, 0], [1])
    with pytest.raises(EvaluationError):
        confusion([], [])


def test_accuracy_examples():
    assert accuracy(ConfusionMatrix(36, 39, 1, 0), exact=True) == Fraction(75, 76)
    assert accuracy(ConfusionMatrix(70, 8, 0, 1), exact=True) == Fraction(78, 79)
    assert accuracy(ConfusionMatrix(0, 10, 0, 0)) == 1.0
    with pytest.raises(EvaluationError):
        accuracy(ConfusionMatrix(0, 0, 0, 0))


def test_precision_recall_prevention_matrix():
    pr = precision_recall(ConfusionMatrix(36, 39, 1, 0))
    # class 1: 36/37, 36/36; class 0: 39/39, 39/40
    assert pr.per_class[1] == pytest.approx((36 / 37, 1.0))
    assert pr.per_class[0] == pytest.approx((1.0, 39 / 40))
    assert pr.macro[0] == pytest.approx((36 / 37 + 1) / 2)
    assert pr.macro[1] == pytest.approx(0.9875)


def test_precision_recall_perfect_and_degenerate():
    pr = precision_recall(ConfusionMatrix(5, 5, 0, 0))
    assert pr.macro == (1.0, 1.0) and pr.per_class == {0: (1.0, 1.0), 1: (1.0, 1.0)}
    assert precision_recall(ConfusionMatrix(0, 10, 0, 0)).per_class[1][0] == 1.0


counts = st.integers(0, 500)


@given(counts, counts, counts, counts)
def test_metrics_bounded_and_symmetric(tp, tn, fp, fn):
    cm = ConfusionMatrix(tp, tn, fp, fn)
    if cm.total == 0:
        return
    pr = precision_recall(cm)
    values = [accuracy(cm), *pr.macro, *pr.per_class[0], *pr.per_class[1]]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert accuracy(cm) == accuracy(ConfusionMatrix(tn, tp, fn, fp))
    assert pr.macro[0] == pytest.approx((pr.per_class[0][0] + pr.per_class[1][0]) / 2)


# --- splits -----------------------------------------------------------------


@pytest.mark.parametrize(
    "n_pos,n_neg,n_train,n_test",
    [(189, 189, 302, 76), (40, 118, 126, 32), (5, 5, 8, 2)],
)
def test_split_sizes(n_pos, n_neg, n_train, n_test):
    train, test = stratified_split(dataset(n_pos, n_neg), 0.8, seed=3)
    assert (len(train), len(test)) == (n_train, n_test)


def test_split_balanced_ten():
    train, test = stratified_split(dataset(5, 5), 0.8, seed=0)
    assert train.class_counts() == (4, 4) and test.class_counts() == (1, 1)


@given(st.integers(1, 60), st.integers(1, 60), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_split_partitions(n_pos, n_neg, frac, seed):
    ds = dataset(n_pos, n_neg)
    train, test = stratified_split(ds, frac, seed)
    rows = lambda d: {tuple(r) for r in d.X}
    assert rows(train) | rows(test) == rows(ds)
    assert not rows(train) & rows(test)
    for label, count in ((0, n_neg), (1, n_pos)):
        assert abs(train.class_counts()[label] - count * frac) <= 1


def test_split_empty_rejected():
    with pytest.raises(EvaluationError):
        stratified_split(dataset(0, 0))


@given(st.integers(1, 40), st.integers(1, 40), st.integers(2, 10), st.integers(0, 1000))
def test_folds_partition(n_pos, n_neg, k, seed):
    ds = dataset(n_pos, n_neg)
    if k > len(ds):
        with pytest.raises(EvaluationError):
            stratified_folds(ds, k, seed)
        return
    folds = stratified_folds(ds, k, seed)
    joined = np.concatenate(folds)
    assert sorted(joined) == list(range(len(ds)))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    for label in (0, 1):
        per = [int(np.sum(ds.y[f] == label)) for f in folds]
        assert max(per) - min(per) <= 1


def test_leave_one_out_folds():
    folds = stratified_folds(dataset(5, 5), 10, seed=0)
    assert [len(f) for f in folds] == [1] * 10


def test_cross_validate_mean_and_order_independence():
    ds = synth_generate("prevention", 30, seed=2)
    cv = cross_validate(ds, 3, 3, k=5, seed=8)
    assert len(cv.fold_accuracies) == 5
    assert cv.mean == pytest.approx(sum(cv.fold_accuracies) / 5)
    assert cross_validate(ds, 3, 3, k=5, seed=8).fold_accuracies == cv.fold_accuracies


def test_cross_validate_k_too_large():
    with pytest.raises(EvaluationError):
        cross_validate(dataset(2, 2), 1, 1, k=5, seed=0)


# --- sweep ------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_sweep():
    ds = synth_generate("prevention", 40, seed=3)
    train, test = stratified_split(ds, 0.8, seed=3)
    return train, test, tune_sweep(train, test, seed=3)


def test_sweep_grid_shape(small_sweep):
    _, _, result = small_sweep
    assert len(result.grid) == 225
    assert set(result.grid) == {(n, d) for n in range(1, 16) for d in range(1, 16)}


def test_sweep_best_is_argmax(small_sweep):
    _, _, result = small_sweep
    best_test = result.grid[result.best][1]
    assert all(te <= best_test for _, te in result.grid.values())
    ties = [nd for nd, (_, te) in result.grid.items() if te == best_test]
    assert result.best == min(ties)


def test_sweep_cells_match_direct_training(small_sweep):
    train, test, result = small_sweep
    for n, d in [(1, 1), (7, 5), (15, 15), (4, 9)]:
        m = fit_forest(train, n, d, seed=3)
        tr = accuracy(confusion(predict_many(m, train.X), train.y))
        te = accuracy(confusion(predict_many(m, test.X), test.y))
        assert result.grid[(n, d)] == (tr, te)


def test_sweep_csv(tmp_path, small_sweep):
    _, _, result = small_sweep
    write_sweep_csv(result, tmp_path / "s.csv")
    with open(tmp_path / "s.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n_estimators", "max_depth", "train_accuracy", "test_accuracy"]
    assert len(rows) == 226
