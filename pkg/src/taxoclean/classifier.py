"""Logistic regression with evaluation helpers (CV, P/R/F1, MAP, RFE)."""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FeatureRow:
    id: str
    names: tuple[str, ...]
    values: tuple[float, ...]
    label: int | None = None

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError(f"row {self.id}: {len(self.names)} names, {len(self.values)} values")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"row {self.id}: duplicate feature names")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"row {self.id}: non-finite feature value")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def select(self, names: Sequence[str]) -> "FeatureRow":
        d = self.as_dict()
        return FeatureRow(self.id, tuple(names), tuple(d[n] for n in names), self.label)


@dataclass(frozen=True)
class Hyper:
    l2: float = 1e-3
    learning_rate: float = 0.1
    epochs: int = 1000
    seed: int = 7


@dataclass
class LogRegModel:
    feature_names: tuple[str, ...]
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    hyper: Hyper = field(default_factory=Hyper)

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": MODEL_FORMAT_VERSION,
                "feature_names": list(self.feature_names),
                "weights": [float(w) for w in self.weights],
                "bias": float(self.bias),
                "mean": [float(m) for m in self.mean],
                "std": [float(s) for s in self.std],
                "hyper": asdict(self.hyper),
            },
            indent=2,
            sort_keys=True,
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LogRegModel":
        obj = json.loads(text)
        if obj.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format {obj.get('format_version')!r}")
        names = tuple(obj["feature_names"])
        w = np.asarray(obj["weights"], dtype=float)
        mean = np.asarray(obj["mean"], dtype=float)
        std = np.asarray(obj["std"], dtype=float)
        if not (len(names) == len(w) == len(mean) == len(std)):
            raise ValueError("model vectors disagree with feature count")
        return cls(names, w, float(obj["bias"]), mean, std, Hyper(**obj["hyper"]))


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def to_matrix(rows: Sequence[FeatureRow]) -> tuple[np.ndarray, np.ndarray | None, tuple[str, ...]]:
    if not rows:
        raise ValueError("no rows")
    names = rows[0].names
    for r in rows:
        if r.names != names:
            raise ValueError(f"row {r.id}: feature ordering differs from row {rows[0].id}")
    X = np.array([r.values for r in rows], dtype=float).reshape(len(rows), len(names))
    labels = [r.label for r in rows]
    y = None if any(l is None for l in labels) else np.array(labels, dtype=float)
    return X, y, names


def loss_and_grad(params: np.ndarray, Xs: np.ndarray, y: np.ndarray, l2: float):
    """Mean negative log-likelihood plus (l2/2)*|w|^2; params = (w..., b)."""
    w, b = params[:-1], params[-1]
    z = Xs @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * l2 * float(w @ w)
    err = sigmoid(z) - y
    grad = np.empty_like(params)
    grad[:-1] = Xs.T @ err / len(y) + l2 * w
    grad[-1] = float(np.mean(err))
    return loss, grad


def train_matrix(X: np.ndarray, y: np.ndarray, names: Sequence[str], hyper: Hyper = Hyper()) -> LogRegModel:
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature value")
    classes = set(np.unique(y).tolist())
    if classes != {0.0, 1.0}:
        raise ValueError("training needs at least one row of each label")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    Xs = (X - mean) / std
    n, d = Xs.shape
    w = np.zeros(d)
    b = 0.0
    lr, l2 = hyper.learning_rate, hyper.l2
    for _ in range(hyper.epochs):
        err = sigmoid(Xs @ w + b) - y
        g_w = Xs.T @ err / n
        g_b = float(np.mean(err))
        # proximal step on the L2 term: stable for any l2
        w = (w - lr * g_w) / (1.0 + lr * l2)
        b -= lr * g_b
    return LogRegModel(tuple(names), w, b, mean, std, hyper)


def train(rows: Sequence[FeatureRow], hyper: Hyper = Hyper()) -> LogRegModel:
    # sorting by id makes the floating-point sums independent of input order
    X, y, names = to_matrix(sorted(rows, key=lambda r: r.id))
    if y is None:
        raise ValueError("every training row needs a label")
    return train_matrix(X, y, names, hyper)


def _standardized(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    return (X - model.mean) / model.std


def predict_proba(model: LogRegModel, row) -> float | np.ndarray:
    """Probability of label 1 for a FeatureRow, a vector, or a matrix of rows."""
    if isinstance(row, FeatureRow):
        if row.names != model.feature_names:
            raise ValueError("row feature ordering does not match the model")
        row = row.values
    X = np.asarray(row, dtype=float)
    if X.shape[-1] != len(model.weights):
        raise ValueError(f"expected {len(model.weights)} features, got {X.shape[-1]}")
    p = sigmoid(_standardized(model, X) @ model.weights + model.bias)
    return float(p) if X.ndim == 1 else p


def classify(model: LogRegModel, row, threshold: float = 0.5):
    p = predict_proba(model, row)
    return p >= threshold


# Metrics

@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    support: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def precision_recall_f1(predictions: Sequence[int], labels: Sequence[int]) -> tuple[float, float, float]:
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(labels)} labels")
    tp = sum(1 for p, l in zip(predictions, labels) if p and l)
    fp = sum(1 for p, l in zip(predictions, labels) if p and not l)
    fn = sum(1 for p, l in zip(predictions, labels) if not p and l)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def average_precision(scores: Sequence[float], labels: Sequence[int]) -> float:
    """AP of the score-descending ranking; ties keep input order."""
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    hits = 0
    total = 0.0
    for rank, i in enumerate(order, start=1):
        if labels[i]:
            hits += 1
            total += hits / rank
    return total / hits if hits else 0.0


def mean_average_precision(groups: Iterable[tuple[Sequence[float], Sequence[int]]]) -> float:
    aps = []
    for scores, labels in groups:
        if len(scores) != len(labels) or not scores:
            raise ValueError("each group needs equal, non-zero numbers of scores and labels")
        aps.append(average_precision(scores, labels))
    return sum(aps) / len(aps) if aps else 0.0


# Cross-validation

@dataclass
class CVReport:
    k: int
    stratified: bool
    folds: list[Metrics]
    aggregate: Metrics
    probabilities: dict[str, float]
    fold_of: dict[str, int]
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "stratified": self.stratified,
            "folds": [m.as_dict() for m in self.folds],
            "aggregate": self.aggregate.as_dict(),
            "warnings": list(self.warnings),
        }


def assign_folds(rows: Sequence[FeatureRow], k: int, seed: int) -> tuple[dict[str, int], bool]:
    """Fold index per row id; stratified when each class has >= k rows."""
    ids_by_label: dict[int, list[str]] = {0: [], 1: []}
    for r in rows:
        ids_by_label[int(r.label)].append(r.id)
    stratified = all(len(v) >= k for v in ids_by_label.values())
    rng = random.Random(seed)
    fold_of: dict[str, int] = {}
    if stratified:
        offset = 0
        for label in (1, 0):
            ids = sorted(ids_by_label[label])
            rng.shuffle(ids)
            for j, rid in enumerate(ids):
                fold_of[rid] = (offset + j) % k
            offset += len(ids)
    else:
        ids = sorted(r.id for r in rows)
        rng.shuffle(ids)
        for j, rid in enumerate(ids):
            fold_of[rid] = j % k
    return fold_of, stratified


def _fit_or_prior(X, y, names, hyper):
    if len(set(y.tolist())) == 2:
        return train_matrix(X, y, names, hyper)
    # single-class training fold: constant prediction of that class
    d = X.shape[1]
    bias = 30.0 if y[0] == 1 else -30.0
    return LogRegModel(tuple(names), np.zeros(d), bias, np.zeros(d), np.ones(d), hyper)


def kfold_cv(
    rows: Sequence[FeatureRow],
    k: int = 10,
    hyper: Hyper = Hyper(),
    seed: int | None = None,
    threshold: float = 0.5,
) -> CVReport:
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(rows) < k:
        raise ValueError(f"need at least k={k} rows, got {len(rows)}")
    rows = sorted(rows, key=lambda r: r.id)
    ids = [r.id for r in rows]
    if len(set(ids)) != len(ids):
        raise ValueError("row ids must be unique")
    seed = hyper.seed if seed is None else seed
    X, y, names = to_matrix(rows)
    if y is None:
        raise ValueError("cross-validation needs labelled rows")
    fold_of, stratified = assign_folds(rows, k, seed)
    warnings = []
    if not stratified:
        warnings.append("fewer than k rows in a class; folds are not stratified")
    fold_idx = np.array([fold_of[r.id] for r in rows])
    probs = np.zeros(len(rows))
    folds = []
    for f in range(k):
        test = fold_idx == f
        model = _fit_or_prior(X[~test], y[~test], names, hyper)
        probs[test] = predict_proba(model, X[test])
        pred = (probs[test] >= threshold).astype(int)
        p, r, f1 = precision_recall_f1(pred.tolist(), y[test].astype(int).tolist())
        folds.append(Metrics(p, r, f1, int(test.sum())))
    pooled = (probs >= threshold).astype(int)
    p, r, f1 = precision_recall_f1(pooled.tolist(), y.astype(int).tolist())
    return CVReport(
        k=k,
        stratified=stratified,
        folds=folds,
        aggregate=Metrics(p, r, f1, len(rows)),
        probabilities={rid: float(pr) for rid, pr in zip(ids, probs)},
        fold_of=fold_of,
        warnings=warnings,
    )


def holdout_eval(
    train_rows: Sequence[FeatureRow],
    test_rows: Sequence[FeatureRow],
    hyper: Hyper = Hyper(),
    threshold: float = 0.5,
) -> tuple[Metrics, dict[str, float]]:
    """Train on one dataset, evaluate once on another (cross-domain protocol)."""
    model = train(train_rows, hyper)
    X, y, names = to_matrix(test_rows)
    if names != model.feature_names:
        raise ValueError("train and test feature orderings differ")
    probs = predict_proba(model, X)
    pred = (np.atleast_1d(probs) >= threshold).astype(int)
    p, r, f1 = precision_recall_f1(pred.tolist(), y.astype(int).tolist())
    return Metrics(p, r, f1, len(test_rows)), {
        row.id: float(pr) for row, pr in zip(test_rows, np.atleast_1d(probs))
    }


def recursive_feature_elimination(
    rows: Sequence[FeatureRow], k: int = 10, hyper: Hyper = Hyper()
) -> list[tuple[str, float]]:
    """Greedily drop the feature whose removal costs the least CV F1.

    Returns (feature, F1 after removing it) in removal order; the final
    entry is the last surviving feature, scored by a bias-only model.
    """
    remaining = list(rows[0].names)
    if len(remaining) < 2:
        raise ValueError("feature elimination needs at least two features")
    trajectory = []
    while remaining:
        best = None
        for name in remaining:
            keep = [n for n in remaining if n != name]
            f1 = kfold_cv([r.select(keep) for r in rows], k, hyper).aggregate.f1
            if best is None or f1 > best[1]:
                best = (name, f1)
        trajectory.append(best)
        remaining.remove(best[0])
    return trajectory
