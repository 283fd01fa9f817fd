import math
import random
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from taxoclean.classifier import (
    FeatureRow,
    Hyper,
    LogRegModel,
    assign_folds,
    average_precision,
    classify,
    kfold_cv,
    loss_and_grad,
    mean_average_precision,
    precision_recall_f1,
    predict_proba,
    recursive_feature_elimination,
    train,
)

FAST = Hyper(epochs=300)


def blobs(n=200, seed=7, extra_noise=0):
    """Two separable Gaussian blobs in 2D (gap of 2 along the diagonal)."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = i % 2
        centre = np.array([2.0, 2.0]) if label else np.array([-2.0, -2.0])
        x = centre + rng.uniform(-1.5, 1.5, size=2)
        noise = rng.normal(size=extra_noise)
        names = ("x", "y") + tuple(f"noise{j}" for j in range(extra_noise))
        rows.append(FeatureRow(f"r{i:03d}", names, tuple(x) + tuple(noise), label))
    return rows


def test_feature_row_validation():
    with pytest.raises(ValueError):
        FeatureRow("a", ("x", "x"), (1.0, 2.0))
    with pytest.raises(ValueError):
        FeatureRow("a", ("x",), (float("nan"),))
    with pytest.raises(ValueError):
        FeatureRow("a", ("x", "y"), (1.0,))


def test_training_accuracy_on_blobs():
    rows = blobs()
    model = train(rows)
    preds = [classify(model, r) for r in rows]
    acc = np.mean([p == bool(r.label) for p, r in zip(preds, rows)])
    assert acc >= 0.99


def test_no_signal_gives_half():
    rows = [FeatureRow(f"r{i}", ("a",), (3.0,), i % 2) for i in range(20)]
    model = train(rows)
    assert predict_proba(model, rows[0]) == pytest.approx(0.5, abs=0.02)


def test_large_l2_shrinks_to_prior():
    rows = blobs(100)
    rows = rows + [FeatureRow(f"p{i}", rows[0].names, (0.0, 0.0), 1) for i in range(50)]
    model = train(rows, Hyper(l2=1e6))
    assert np.max(np.abs(model.weights)) < 1e-3
    prior = sum(r.label for r in rows) / len(rows)
    assert model.bias == pytest.approx(math.log(prior / (1 - prior)), abs=1e-3)


def test_single_class_and_nonfinite_rejected():
    with pytest.raises(ValueError):
        train([FeatureRow("a", ("x",), (1.0,), 1), FeatureRow("b", ("x",), (2.0,), 1)])


def test_predict_examples():
    zero = LogRegModel(("a",), np.zeros(1), 0.0, np.zeros(1), np.ones(1))
    assert predict_proba(zero, [5.0]) == 0.5
    big = LogRegModel(("a",), np.array([30.0]), 0.0, np.zeros(1), np.ones(1))
    assert predict_proba(big, [1.0]) >= 0.999999
    unit = LogRegModel(("a",), np.array([1.0]), 0.0, np.zeros(1), np.ones(1))
    assert predict_proba(unit, [1.0]) == pytest.approx(0.731059, abs=1e-6)
    with pytest.raises(ValueError):
        predict_proba(unit, [1.0, 2.0])


def test_model_json_round_trip():
    model = train(blobs(40), FAST)
    again = LogRegModel.from_json(model.to_json())
    x = np.array([0.3, -0.1])
    assert predict_proba(again, x) == predict_proba(model, x)
    with pytest.raises(ValueError):
        LogRegModel.from_json('{"format_version": 99}')


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(30, 4))
    y = (rng.uniform(size=30) > 0.5).astype(float)
    h = 1e-6
    for _ in range(20):
        params = rng.normal(size=5)
        _, grad = loss_and_grad(params, X, y, 0.1)
        num = np.zeros_like(params)
        for j in range(5):
            e = np.zeros_like(params)
            e[j] = h
            num[j] = (loss_and_grad(params + e, X, y, 0.1)[0] - loss_and_grad(params - e, X, y, 0.1)[0]) / (2 * h)
        rel = np.linalg.norm(grad - num) / max(np.linalg.norm(grad), np.linalg.norm(num))
        assert rel < 1e-4


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 100), st.floats(-50, 50), st.sampled_from([0, 1]), st.booleans())
def test_affine_rescaling_invariance(scale, shift, col, flip):
    rows = blobs(40)
    a = -scale if flip else scale

    def warp(r):
        v = list(r.values)
        v[col] = a * v[col] + shift
        return FeatureRow(r.id, r.names, tuple(v), r.label)

    m1, m2 = train(rows, FAST), train([warp(r) for r in rows], FAST)
    for r in rows[:10]:
        assert predict_proba(m2, warp(r)) == pytest.approx(predict_proba(m1, r), abs=1e-9)


def test_classify_monotone_in_threshold():
    model = train(blobs(40), FAST)
    rows = blobs(40, seed=3)
    for lo, hi in [(0.2, 0.5), (0.5, 0.8)]:
        for r in rows:
            assert classify(model, r, hi) <= classify(model, r, lo)


def test_cv_separable_and_deterministic():
    rows = blobs()
    rep = kfold_cv(rows, k=10, seed=7)
    assert rep.stratified
    assert rep.aggregate.f1 >= 0.95
    shuffled = rows[:]
    random.Random(1).shuffle(shuffled)
    rep2 = kfold_cv(shuffled, k=10, seed=7)
    assert rep2.fold_of == rep.fold_of
    assert rep2.probabilities == rep.probabilities


def test_folds_stratified_within_one():
    rows = blobs(103)
    fold_of, strat = assign_folds(rows, 10, 7)
    assert strat
    for label in (0, 1):
        counts = [sum(1 for r in rows if r.label == label and fold_of[r.id] == f) for f in range(10)]
        assert max(counts) - min(counts) <= 1


def test_cv_leave_one_out_and_fallback():
    rows = blobs(12)
    rep = kfold_cv(rows, k=12, hyper=FAST, seed=7)
    assert len(rep.folds) == 12
    assert not rep.stratified and rep.warnings


def test_prf_examples():
    assert precision_recall_f1([1, 0, 1], [1, 0, 1]) == (1.0, 1.0, 1.0)
    p, r, f = precision_recall_f1([1, 1, 1, 1], [1, 0, 1, 0])
    assert (p, r) == (0.5, 1.0) and f == pytest.approx(2 / 3)
    assert precision_recall_f1([0, 0], [1, 0]) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        precision_recall_f1([1], [1, 0])


def test_ap_and_map_examples():
    assert average_precision([3, 2, 1], [1, 0, 1]) == pytest.approx(5 / 6)
    assert average_precision([3, 2, 1], [0, 0, 1]) == pytest.approx(1 / 3)
    assert mean_average_precision([([0.9, 0.1], [1, 0]), ([0.8, 0.7, 0.2], [1, 1, 0])]) == 1.0
    assert mean_average_precision([([0.9], [0]), ([0.8], [1])]) == 0.5


def test_random_ranking_map_expectation():
    n, q = 6, 2
    # brute-force expectation: every placement of q positives equally likely
    aps = []
    for pos in combinations(range(n), q):
        labels = [int(i in pos) for i in range(n)]
        aps.append(average_precision(list(range(n, 0, -1)), labels))
    expected = sum(aps) / len(aps)
    assert q / n < expected < 1
    rng = random.Random(5)
    base = [1] * q + [0] * (n - q)
    samples = []
    for _ in range(1000):
        labels = base[:]
        rng.shuffle(labels)
        samples.append(mean_average_precision([(list(range(n, 0, -1)), labels)]))
    assert abs(sum(samples) / len(samples) - expected) <= 0.05


def test_rfe_signal_feature_survives():
    rng = np.random.default_rng(2)
    rows = []
    for i in range(60):
        label = i % 2
        rows.append(FeatureRow(f"r{i}", ("f1", "n1", "n2"), (label * 2.0 + rng.normal(0, 0.3), rng.normal(), rng.normal()), label))
    traj = recursive_feature_elimination(rows, k=5, hyper=FAST)
    assert [n for n, _ in traj][-1] == "f1"
    full = kfold_cv(rows, 5, FAST).aggregate.f1
    assert traj[0][1] >= full - 0.02


def test_rfe_duplicate_features():
    rows = blobs(60)
    rows = [FeatureRow(r.id, ("x", "x2", "y"), (r.values[0], r.values[0], r.values[1]), r.label) for r in rows]
    traj = recursive_feature_elimination(rows, k=5, hyper=FAST)
    full = kfold_cv(rows, 5, FAST).aggregate.f1
    assert abs(traj[0][1] - full) <= 0.02
