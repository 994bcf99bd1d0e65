import numpy as np
import pytest

from segsweep import metrics
from segsweep.errors import ShapeMismatchError
from segsweep.types import BinaryMask, ConfusionCounts, ProbabilityMap

from conftest import (
    naive_confusion_from_masks,
    naive_confusion_from_probs,
    naive_dice,
    naive_iou,
    naive_pixel_accuracy,
    random_pair,
)


class TestBinarize:
    def test_uniform_above_threshold_is_all_foreground(self):
        pm = ProbabilityMap(np.full((3, 3), 0.2))
        assert metrics.binarize(pm, 0.14).foreground_count() == 9

    def test_threshold_one_gives_empty_mask(self, rng):
        pm = ProbabilityMap(rng.random((8, 8)))
        assert metrics.binarize(pm, 1.0).foreground_count() == 0

    def test_pixel_equal_to_threshold_is_background(self):
        pm = ProbabilityMap(np.array([[0.5]]))
        assert metrics.binarize(pm, 0.5).foreground_count() == 0

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_rejects_out_of_range_threshold(self, bad):
        pm = ProbabilityMap(np.array([[0.5]]))
        with pytest.raises(ValueError):
            metrics.binarize(pm, bad)

    def test_monotone_in_threshold(self, rng):
        pm = ProbabilityMap(rng.random((16, 16)))
        prev = metrics.binarize(pm, 0.1)
        for t in (0.3, 0.5, 0.7, 0.9):
            cur = metrics.binarize(pm, t)
            # foreground at the higher threshold is a subset of the lower one
            assert not np.any(cur.data & ~prev.data)
            prev = cur


class TestConfusion:
    def test_identity_all_foreground(self):
        m = BinaryMask.full(4, 4)
        c = metrics.confusion(m, m)
        assert (c.tp, c.fp, c.tn, c.fn) == (16, 0, 0, 0)

    def test_two_by_two_partial_overlap(self):
        pred = BinaryMask.from_flat(2, 2, [1, 1, 0, 0])
        truth = BinaryMask.from_flat(2, 2, [0, 1, 0, 1])
        c = metrics.confusion(pred, truth)
        assert (c.tp, c.fp, c.tn, c.fn) == (1, 1, 1, 1)

    def test_total_miss(self):
        c = metrics.confusion(BinaryMask.empty(3, 3), BinaryMask.full(3, 3))
        assert (c.tp, c.fp, c.tn, c.fn) == (0, 0, 0, 9)

    def test_dimension_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeMismatchError) as exc:
            metrics.confusion(BinaryMask.empty(2, 3), BinaryMask.empty(3, 2))
        assert "2x3" in str(exc.value) and "3x2" in str(exc.value)

    def test_counts_sum_to_pixel_total(self, rng):
        for _ in range(50):
            pm, truth = random_pair(rng)
            pred = metrics.binarize(pm, float(rng.random()))
            assert metrics.confusion(pred, truth).total == 256


class TestMetricFormulas:
    def test_perfect_overlap(self):
        c = ConfusionCounts(tp=16, fp=0, tn=0, fn=0)
        assert metrics.dice(c) == 1.0
        assert metrics.iou(c) == 1.0
        assert metrics.pixel_accuracy(c) == 1.0

    def test_partial_overlap_case(self):
        c = ConfusionCounts(tp=1, fp=1, tn=1, fn=1)
        assert metrics.dice(c) == 0.5
        assert metrics.iou(c) == pytest.approx(1 / 3, abs=1e-15)
        assert metrics.pixel_accuracy(c) == 0.5

    def test_both_empty_convention(self):
        c = ConfusionCounts(tp=0, fp=0, tn=9, fn=0)
        assert metrics.dice(c) == 1.0
        assert metrics.iou(c) == 1.0

    def test_disjoint_masks(self):
        c = ConfusionCounts(tp=0, fp=4, tn=0, fn=4)
        assert metrics.dice(c) == 0.0
        assert metrics.iou(c) == 0.0

    def test_every_pixel_wrong(self):
        pred = BinaryMask.full(2, 2)
        truth = BinaryMask.empty(2, 2)
        assert metrics.pixel_accuracy(metrics.confusion(pred, truth)) == 0.0

    def test_pixel_accuracy_rejects_zero_total(self):
        with pytest.raises(ValueError):
            metrics.pixel_accuracy(ConfusionCounts(tp=0, fp=0, tn=0, fn=0))

    def test_dice_iou_identity(self, rng):
        for _ in range(2000):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 1000, size=4))
            c = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
            d, i = metrics.dice(c), metrics.iou(c)
            assert abs(d - 2 * i / (1 + i)) <= 1e-12
            assert i <= d <= 1.0

    def test_symmetry_under_swap(self, rng):
        for _ in range(100):
            _, a = random_pair(rng)
            _, b = random_pair(rng)
            ab = metrics.confusion(a, b)
            ba = metrics.confusion(b, a)
            assert metrics.dice(ab) == metrics.dice(ba)
            assert metrics.iou(ab) == metrics.iou(ba)
            assert metrics.pixel_accuracy(ab) == metrics.pixel_accuracy(ba)


class TestEvaluatePair:
    def test_exact_probabilities_give_perfect_triple(self, rng):
        truth = BinaryMask(rng.random((8, 8)) < 0.5)
        pm = ProbabilityMap(truth.data.astype(np.float64))
        for t in (0.1, 0.5, 0.9):
            triple = metrics.evaluate_pair(pm, truth, t)
            assert (triple.dice, triple.iou, triple.pixel_accuracy) == (1.0, 1.0, 1.0)

    def test_empty_prediction_against_nonempty_truth(self):
        truth = BinaryMask.from_flat(2, 2, [1, 1, 1, 0])
        pm = ProbabilityMap(np.zeros((2, 2)))
        triple = metrics.evaluate_pair(pm, truth, 0.5)
        assert triple.dice == 0.0 and triple.iou == 0.0
        assert triple.pixel_accuracy == 0.25  # background fraction

    def test_two_by_two_encoded_as_probabilities(self):
        pm = ProbabilityMap.from_flat(2, 2, [0.9, 0.9, 0.1, 0.1])
        truth = BinaryMask.from_flat(2, 2, [0, 1, 0, 1])
        triple = metrics.evaluate_pair(pm, truth, 0.5)
        assert triple.dice == 0.5
        assert triple.iou == pytest.approx(1 / 3, abs=1e-15)
        assert triple.pixel_accuracy == 0.5


class TestOracleEquivalence:
    def test_mask_pairs_match_double_loop_oracle(self, rng):
        for _ in range(1000):
            a = BinaryMask(rng.random((16, 16)) < rng.random())
            b = BinaryMask(rng.random((16, 16)) < rng.random())
            c = metrics.confusion(a, b)
            tp, fp, tn, fn = naive_confusion_from_masks(a.data.tolist(), b.data.tolist())
            assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
            assert metrics.dice(c) == naive_dice(tp, fp, fn)
            assert metrics.iou(c) == naive_iou(tp, fp, fn)
            assert metrics.pixel_accuracy(c) == naive_pixel_accuracy(tp, fp, tn, fn)

    def test_probability_pairs_match_double_loop_oracle(self, rng):
        for _ in range(100):
            pm, truth = random_pair(rng)
            t = float(rng.random())
            c = metrics.confusion(metrics.binarize(pm, t), truth)
            expected = naive_confusion_from_probs(
                pm.data.astype(np.float64).tolist(), truth.data.tolist(), t
            )
            assert (c.tp, c.fp, c.tn, c.fn) == expected
