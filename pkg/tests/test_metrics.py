import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from waveseg.errors import DimensionError
from waveseg.metrics import best_permutation, dice, iou, misclassification

masks = arrays(bool, (6, 6))


def test_dice_examples():
    a = np.zeros(400, bool)
    b = np.zeros(400, bool)
    assert dice(a, b) == 1.0
    a[:100] = True
    assert dice(a, a) == 1.0
    b[200:300] = True
    assert dice(a, b) == 0.0
    b[:] = False
    b[50:150] = True
    assert dice(a, b) == 0.5
    assert dice(a, np.zeros(400, bool)) == 0.0


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        dice(np.zeros(3, bool), np.zeros(4, bool))
    with pytest.raises(DimensionError):
        misclassification(np.zeros(3, int), np.zeros(4, int), 2)


@given(masks, masks)
def test_dice_iou_properties(a, b):
    assert dice(a, b) == dice(b, a)
    assert iou(a, b) <= dice(a, b) + 1e-15
    assert 0 <= iou(a, b) <= 1


def test_perfect_and_swapped():
    t = np.array([0, 0, 1, 1, 2])
    assert misclassification(t, t, 3).misclassification_rate == 0
    r = misclassification(np.array([1, 1, 0, 0, 2]), t, 3)
    assert r.misclassification_rate == 0
    assert r.permutation == {0: 1, 1: 0, 2: 2}
    assert r.dice == 1.0


def test_random_labels_half_wrong():
    g = np.random.default_rng(8)
    truth = np.repeat([0, 1], 20000)
    r = misclassification(g.integers(0, 2, truth.size), truth, 2)
    assert abs(r.misclassification_rate - 0.5) < 0.05


@given(arrays(np.int64, 30, elements=st.integers(0, 3)), arrays(np.int64, 30, elements=st.integers(0, 3)),
       st.permutations(range(4)))
def test_permutation_invariance(lab, truth, perm):
    a = misclassification(lab, truth, 4)
    b = misclassification(np.array(perm)[lab], truth, 4)
    assert a.misclassification_rate == b.misclassification_rate
    assert 0 <= a.iou <= a.dice <= 1


def test_greedy_for_many_classes():
    t = np.arange(8).repeat(3)
    lab = (t + 3) % 8
    m = best_permutation(lab, t, 8)
    assert all(m[(k + 3) % 8] == k for k in range(8))
    assert misclassification(lab, t, 8).misclassification_rate == 0


def test_report_json():
    r = misclassification(np.array([0, 1]), np.array([0, 1]), 2).to_json()
    assert set(r) == {"misclassification_rate", "dice", "iou", "permutation", "per_class_dice"}
    assert r["permutation"] == {"0": 0, "1": 1}
