"""CART trees, a bootstrap-aggregated random forest and a logistic baseline.

Trees route a sample left iff ``x[feature] <= threshold``. ``max_depth``
counts edges from the root, so a depth-1 tree is a single split (a stump).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .geodata import LabeledDataset, TaskSchema, schema_for

FORMAT_VERSION = 1


class LearnerError(ValueError):
    pass


class DimensionMismatchError(LearnerError):
    pass


class CorruptModelError(LearnerError):
    pass


@dataclass(frozen=True)
class Leaf:
    predicted_class: int
    class_counts: tuple[int, int]


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def _leaf(y: np.ndarray) -> Leaf:
    n1 = int(y.sum())
    n0 = len(y) - n1
    # ties go to the positive class
    return Leaf(1 if n1 >= n0 else 0, (n0, n1))


def gini(n0: int, n1: int) -> float:
    n = n0 + n1
    if n == 0:
        return 0.0
    return 1.0 - (n0 * n0 + n1 * n1) / (n * n)


def best_split_on_feature(x: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
    """Best (reduction, threshold) over midpoints of consecutive distinct values.

    Returns None if the feature is constant. The first threshold (in
    ascending order) attaining the maximum wins.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(ys)
    boundaries = np.flatnonzero(xs[1:] != xs[:-1])
    if boundaries.size == 0:
        return None
    ones_left = np.cumsum(ys)[boundaries]
    n_left = boundaries + 1
    n_right = n - n_left
    ones_total = ys.sum()
    ones_right = ones_total - ones_left
    zeros_left = n_left - ones_left
    zeros_right = n_right - ones_right
    # weighted child gini * n = n_l - (z_l^2 + o_l^2)/n_l + same for right
    child = (n_left - (zeros_left**2 + ones_left**2) / n_left) + (
        n_right - (zeros_right**2 + ones_right**2) / n_right
    )
    parent = gini(n - int(ones_total), int(ones_total))
    reduction = parent - child / n
    k = int(np.argmax(reduction))
    threshold = (xs[boundaries[k]] + xs[boundaries[k] + 1]) / 2.0
    return float(reduction[k]), float(threshold)


def _grow(X: np.ndarray, y: np.ndarray, depth_left: int, k: int, rng: np.random.Generator) -> TreeNode:
    n1 = int(y.sum())
    if depth_left == 0 or len(y) < 2 or n1 == 0 or n1 == len(y):
        return _leaf(y)
    d = X.shape[1]
    features = rng.choice(d, size=k, replace=False) if k < d else np.arange(d)
    best = None
    for f in features:
        found = best_split_on_feature(X[:, f], y)
        if found is not None and (best is None or found[0] > best[0]):
            best = (found[0], int(f), found[1])
    # zero-reduction splits are accepted; only a node with no usable split stops
    if best is None:
        return _leaf(y)
    _, f, t = best
    go_left = X[:, f] <= t
    return Split(
        f,
        t,
        _grow(X[go_left], y[go_left], depth_left - 1, k, rng),
        _grow(X[~go_left], y[~go_left], depth_left - 1, k, rng),
    )


def fit_tree(X, y, max_depth: int, features_per_split: int | None = None, seed=0) -> TreeNode:
    """Grow one CART tree by greedy Gini reduction.

    ``features_per_split`` features are sampled (without replacement, from a
    generator seeded by ``seed``) at every node; None means all features.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise LearnerError("cannot fit a tree on an empty dataset")
    if X.ndim != 2 or len(X) != len(y):
        raise LearnerError("X must be 2-D with one row per label")
    if max_depth < 0:
        raise LearnerError("max_depth must be >= 0")
    d = X.shape[1]
    k = d if features_per_split is None else int(features_per_split)
    if not 1 <= k <= d:
        raise LearnerError(f"features_per_split must be in [1, {d}]")
    return _grow(X, y, max_depth, k, np.random.default_rng(seed))


def predict_tree(node: TreeNode, x: Sequence[float]) -> int:
    while isinstance(node, Split):
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node.predicted_class


def _predict_tree_many(node: TreeNode, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, Leaf):
        out[rows] = node.predicted_class
        return
    go_left = X[rows, node.feature_index] <= node.threshold
    _predict_tree_many(node.left, X, rows[go_left], out)
    _predict_tree_many(node.right, X, rows[~go_left], out)


def predict_tree_many(node: TreeNode, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.empty(len(X), dtype=np.int64)
    _predict_tree_many(node, X, np.arange(len(X)), out)
    return out


# ---------------------------------------------------------------------------
# Forest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple[TreeNode, ...]
    n_estimators: int
    max_depth: int
    seed: int
    schema: TaskSchema
    features_per_split: int

    def __post_init__(self):
        if len(self.trees) != self.n_estimators:
            raise LearnerError("number of trees does not match n_estimators")

    def truncated(self, n: int) -> "RandomForestModel":
        """The forest made of the first ``n`` trees."""
        return RandomForestModel(
            self.trees[:n], n, self.max_depth, self.seed, self.schema, self.features_per_split
        )


def default_features_per_split(d: int) -> int:
    return math.ceil(math.sqrt(d))


def tree_seed(seed: int, i: int) -> list[int]:
    """Entropy for tree ``i``'s generator (bootstrap draw and feature sampling)."""
    return [int(seed), int(i)]


def fit_forest(
    dataset: LabeledDataset,
    n_estimators: int,
    max_depth: int,
    seed: int,
    bootstrap: bool = True,
    features_per_split: int | None = None,
) -> RandomForestModel:
    if len(dataset) == 0:
        raise LearnerError("cannot fit a forest on an empty dataset")
    if n_estimators < 1:
        raise LearnerError("n_estimators must be >= 1")
    if max_depth < 1:
        raise LearnerError("max_depth must be >= 1")
    d = dataset.schema.n_features
    k = features_per_split or default_features_per_split(d)
    n = len(dataset)
    trees = []
    for i in range(n_estimators):
        rng = np.random.default_rng(tree_seed(seed, i))
        if bootstrap:
            idx = rng.integers(0, n, size=n)
            X, y = dataset.X[idx], dataset.y[idx]
        else:
            X, y = dataset.X, dataset.y
        trees.append(_grow(X, y, max_depth, k, rng))
    return RandomForestModel(tuple(trees), n_estimators, max_depth, int(seed), dataset.schema, k)


def _check_dim(model_dim: int, x: np.ndarray) -> None:
    if x.shape[-1] != model_dim:
        raise DimensionMismatchError(f"expected {model_dim} features, got {x.shape[-1]}")


def vote_fraction(model: RandomForestModel, features: Sequence[float]) -> float:
    x = np.asarray(features, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatchError("expected a single feature vector")
    _check_dim(model.schema.n_features, x)
    votes = sum(predict_tree(t, x) for t in model.trees)
    return votes / len(model.trees)


def predict(model: RandomForestModel, features: Sequence[float]) -> int:
    """Majority vote over trees; an exact tie is called positive."""
    return 1 if vote_fraction(model, features) >= 0.5 else 0


def vote_fraction_many(model: RandomForestModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatchError("expected a 2-D feature matrix")
    _check_dim(model.schema.n_features, X)
    votes = np.zeros(len(X), dtype=np.int64)
    for t in model.trees:
        votes += predict_tree_many(t, X)
    return votes / len(model.trees)


def predict_many(model: RandomForestModel, X) -> np.ndarray:
    return (vote_fraction_many(model, X) >= 0.5).astype(np.int64)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def schema_hash(schema: TaskSchema) -> str:
    text = schema.task + ":" + ",".join(schema.feature_order)
    return hashlib.sha256(text.encode()).hexdigest()


def _flatten(root: TreeNode) -> list[dict]:
    nodes: list[dict] = []

    def visit(node: TreeNode) -> int:
        i = len(nodes)
        if isinstance(node, Leaf):
            nodes.append(
                {"feature": -1, "threshold": 0.0, "left": -1, "right": -1,
                 "predicted_class": node.predicted_class, "class_counts": list(node.class_counts)}
            )
            return i
        entry = {"feature": node.feature_index, "threshold": node.threshold, "left": -1, "right": -1}
        nodes.append(entry)
        entry["left"] = visit(node.left)
        entry["right"] = visit(node.right)
        return i

    visit(root)
    return nodes


def _unflatten(nodes: list[dict], n_features: int) -> TreeNode:
    seen: set[int] = set()

    def build(i: int) -> TreeNode:
        if not 0 <= i < len(nodes) or i in seen:
            raise CorruptModelError(f"dangling or repeated child reference {i}")
        seen.add(i)
        node = nodes[i]
        if node["left"] == -1 and node["right"] == -1:
            counts = tuple(int(c) for c in node["class_counts"])
            if len(counts) != 2 or sum(counts) < 1 or node["predicted_class"] not in (0, 1):
                raise CorruptModelError(f"bad leaf at node {i}")
            return Leaf(int(node["predicted_class"]), counts)
        if not 0 <= node["feature"] < n_features:
            raise CorruptModelError(f"feature index out of range at node {i}")
        return Split(int(node["feature"]), float(node["threshold"]), build(node["left"]), build(node["right"]))

    root = build(0)
    if len(seen) != len(nodes):
        raise CorruptModelError("unreachable nodes in tree")
    return root


def model_to_dict(model: RandomForestModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "task": model.schema.task,
        "schema_hash": schema_hash(model.schema),
        "n_features": model.schema.n_features,
        "hyperparameters": {
            "n_estimators": model.n_estimators,
            "max_depth": model.max_depth,
            "features_per_split": model.features_per_split,
        },
        "seed": model.seed,
        "trees": [_flatten(t) for t in model.trees],
    }


def model_to_json(model: RandomForestModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n"


def model_id(model: RandomForestModel) -> str:
    return hashlib.sha256(model_to_json(model).encode()).hexdigest()[:16]


def model_from_dict(doc: dict) -> RandomForestModel:
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise CorruptModelError(f"unsupported format version {doc['format_version']}")
        schema = schema_for(doc["task"])
        if doc["schema_hash"] != schema_hash(schema) or doc["n_features"] != schema.n_features:
            raise CorruptModelError("schema hash mismatch")
        hp = doc["hyperparameters"]
        trees = tuple(_unflatten(nodes, schema.n_features) for nodes in doc["trees"])
        return RandomForestModel(
            trees, int(hp["n_estimators"]), int(hp["max_depth"]), int(doc["seed"]),
            schema, int(hp["features_per_split"]),
        )
    except CorruptModelError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModelError(f"invalid model document: {exc}") from None


def save_model(model: RandomForestModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path: str | Path) -> RandomForestModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)


# ---------------------------------------------------------------------------
# Logistic regression baseline
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray

    def logit(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        _check_dim(len(self.weights), X)
        return ((X - self.mean) / self.std) @ self.weights + self.bias


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def fit_logistic(
    dataset: LabeledDataset, learning_rate: float = 0.1, epochs: int = 500, seed: int = 0
) -> LogisticModel:
    """Full-batch gradient descent on mean log loss over standardized features.

    Weights start at zero, so the fit is deterministic; ``seed`` is accepted
    for interface symmetry with the forest.
    """
    del seed
    if len(dataset) == 0:
        raise LearnerError("cannot fit logistic regression on an empty dataset")
    X, y = dataset.X, dataset.y.astype(float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    constant = std == 0
    std = np.where(constant, 1.0, std)
    Z = (X - mean) / std
    Z[:, constant] = 0.0
    w = np.zeros(X.shape[1])
    b = 0.0
    n = len(y)
    for _ in range(epochs):
        err = _sigmoid(Z @ w + b) - y
        w -= learning_rate * (Z.T @ err) / n
        b -= learning_rate * err.mean()
    w[constant] = 0.0
    return LogisticModel(w, float(b), mean, std)


def predict_logistic(model: LogisticModel, features) -> int:
    x = np.asarray(features, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatchError("expected a single feature vector")
    return int(_sigmoid(model.logit(x)) >= 0.5)


def predict_logistic_many(model: LogisticModel, X) -> np.ndarray:
    return (_sigmoid(model.logit(X)) >= 0.5).astype(np.int64)
