import random

import pytest

from phenokit.core import BBox, Detection, SeverityScore
from phenokit.errors import EmptyInputError, ValidationError
from phenokit.metrics import (
    APResult,
    average_precision,
    class_report,
    confusion_matrix,
    evaluate_detections,
    f1_score,
    map50,
    match_detections,
)

S = SeverityScore


def pairs_from_matrix(matrix, classes):
    pairs = []
    for i, row in enumerate(matrix):
        for j, count in enumerate(row):
            pairs.extend([(classes[i], classes[j])] * count)
    return pairs


# Frozen count-level report fixture: diagonal TPs {9, 5, 5, 6} with
# supports {11, 9, 11, 8} and per-class false positives {5, 2, 2, 5}.
# Off-diagonal cells chosen to satisfy both the row and column sums.
REPORT_MATRIX = [
    [9, 1, 0, 1],
    [2, 5, 1, 1],
    [3, 0, 5, 3],
    [0, 1, 1, 6],
]
FIELD_CLASSES = (S.S1, S.S3, S.S5, S.S7)


class TestConfusionMatrix:
    def test_perfect_predictions_are_diagonal(self):
        pairs = [(S.S1, S.S1)] * 3 + [(S.S5, S.S5)] * 2
        cm = confusion_matrix(pairs, (S.S1, S.S5))
        assert cm.counts == ((3, 0), (0, 2))

    def test_single_misclassification(self):
        cm = confusion_matrix([(S.S1, S.S3)], (S.S1, S.S3))
        assert cm.counts == ((0, 1), (0, 0))

    def test_row_sums_match_supports(self):
        cm = confusion_matrix(
            pairs_from_matrix(REPORT_MATRIX, FIELD_CLASSES), FIELD_CLASSES)
        assert [cm.support(i) for i in range(4)] == [11, 9, 11, 8]
        assert cm.total == 39

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            confusion_matrix([(S.S1, S.S9)], (S.S1, S.S3))


class TestClassReport:
    def test_frozen_report_rows_reproduced(self):
        cm = confusion_matrix(
            pairs_from_matrix(REPORT_MATRIX, FIELD_CLASSES), FIELD_CLASSES)
        report = class_report(cm)
        expected = {
            S.S1: (0.64, 0.82, 0.72, 11),
            S.S3: (0.71, 0.56, 0.62, 9),
            S.S5: (0.71, 0.45, 0.56, 11),
            S.S7: (0.55, 0.75, 0.63, 8),
        }
        for row in report.rows:
            precision, recall, f1, support = expected[row.label]
            assert row.precision == pytest.approx(precision, abs=5.1e-3)
            assert row.recall == pytest.approx(recall, abs=5.1e-3)
            assert row.f1 == pytest.approx(f1, abs=5.1e-3)
            assert row.support == support
        assert report.total == 39

    def test_perfect_diagonal_scores_one(self):
        cm = confusion_matrix(
            [(c, c) for c in FIELD_CLASSES for _ in range(4)], FIELD_CLASSES)
        report = class_report(cm)
        assert report.accuracy == 1.0
        assert all(r.f1 == 1.0 for r in report.rows)
        assert report.degenerate == ()

    def test_zero_denominators_flagged_not_nan(self):
        # nothing predicted as S3 and no true S5 samples
        cm = confusion_matrix(
            [(S.S1, S.S1), (S.S3, S.S1)], (S.S1, S.S3, S.S5))
        report = class_report(cm)
        by_label = {r.label: r for r in report.rows}
        assert by_label[S.S3].precision == 0.0
        assert by_label[S.S5].recall == 0.0
        assert "precision[3]" in report.degenerate
        assert "recall[5]" in report.degenerate

    def test_empty_matrix_rejected(self):
        cm = confusion_matrix([], (S.S1,))
        with pytest.raises(EmptyInputError):
            class_report(cm)


def test_f1_is_harmonic_mean():
    assert f1_score(1.0, 1.0) == 1.0
    assert f1_score(0.0, 0.0) == 0.0
    assert f1_score(9 / 14, 9 / 11) == pytest.approx(0.72)
    assert f1_score(5 / 7, 5 / 9) == pytest.approx(0.625)


def gt(x0, y0, x1, y1, cls=0):
    return BBox(x0, y0, x1, y1, cls)


def pred(x0, y0, x1, y1, conf, cls=0):
    return Detection(BBox(x0, y0, x1, y1, cls), conf)


class TestMatchDetections:
    def test_exact_hit_is_tp(self):
        flags, matched = match_detections(
            [pred(0, 0, 10, 10, 0.9)], [gt(0, 0, 10, 10)], 0.5)
        assert flags == [True]
        assert matched == [True]

    def test_second_prediction_on_same_gt_is_fp(self):
        preds = [pred(0, 0, 10, 10, 0.9), pred(1, 0, 11, 10, 0.8)]
        flags, matched = match_detections(preds, [gt(0, 0, 10, 10)], 0.5)
        assert flags == [True, False]
        assert matched == [True]

    def test_greedy_order_fixture(self):
        # Highest-confidence prediction claims the first GT even though
        # the second prediction overlaps it perfectly; brute-force over
        # the 2 candidate assignments confirms the greedy outcome.
        gts = [gt(0, 0, 10, 10), gt(20, 0, 30, 10)]
        preds = [
            pred(1, 0, 11, 10, 0.9),    # IoU 9/11 with GT0
            pred(0, 0, 10, 10, 0.8),    # IoU 1.0 with GT0
            pred(21, 0, 31, 10, 0.7),   # IoU 9/11 with GT1
        ]
        flags, matched = match_detections(preds, gts, 0.5)
        assert flags == [True, False, True]
        assert matched == [True, True]

    def test_classes_never_cross_match(self):
        flags, matched = match_detections(
            [pred(0, 0, 10, 10, 0.9, cls=1)], [gt(0, 0, 10, 10, cls=0)], 0.5)
        assert flags == [False]
        assert matched == [False]

    def test_equal_iou_tie_goes_to_earlier_gt(self):
        gts = [gt(0, 0, 10, 10), gt(10, 0, 20, 10)]
        preds = [pred(5, 0, 15, 10, 0.9), pred(5, 0, 15, 10, 0.8)]
        flags, matched = match_detections(preds, gts, 0.3)
        assert flags == [True, True]
        assert matched == [True, True]

    def test_input_order_preserved_in_flags(self):
        # lower-confidence prediction listed first
        gts = [gt(0, 0, 10, 10)]
        preds = [pred(1, 0, 11, 10, 0.5), pred(0, 0, 10, 10, 0.9)]
        flags, _ = match_detections(preds, gts, 0.5)
        assert flags == [False, True]


def ap_reference(flags, n_gt):
    """Direct definition: integrate the max-precision-at-recall>=r
    staircase over the exact recall steps."""
    points = []
    tp = fp = 0
    for flag in flags:
        tp, fp = tp + bool(flag), fp + (not flag)
        points.append((tp / n_gt, tp / (tp + fp)))
    ap = 0.0
    previous = 0.0
    for recall in sorted({r for r, _ in points}):
        best = max(p for r, p in points if r >= recall)
        ap += (recall - previous) * best
        previous = recall
    return ap


class TestAveragePrecision:
    def test_single_tp(self):
        assert average_precision([True], 1) == APResult(1.0)

    def test_single_fp(self):
        assert average_precision([False], 1) == APResult(0.0)

    def test_envelope_fixture(self):
        result = average_precision([True, False, True], 2)
        assert result.ap == pytest.approx(0.8333, abs=1e-4)
        assert result.ap == pytest.approx(ap_reference([True, False, True], 2))

    def test_undefined_when_nothing_exists(self):
        assert average_precision([], 0) == APResult(0.0, defined=False)

    def test_defined_zero_for_pure_hallucination(self):
        assert average_precision([False, False], 0) == APResult(0.0, defined=True)

    def test_matches_reference_on_random_instances(self):
        rng = random.Random(4321)
        for _ in range(300):
            n_gt = rng.randint(1, 4)
            n_pred = rng.randint(0, 6)
            max_tp = min(n_gt, n_pred)
            flags = [True] * rng.randint(0, max_tp)
            flags += [False] * (n_pred - len(flags))
            rng.shuffle(flags)
            result = average_precision(flags, n_gt)
            if flags:
                assert abs(result.ap - ap_reference(flags, n_gt)) <= 1e-9
            else:
                assert result.ap == 0.0

    def test_fp_to_tp_flip_never_decreases_ap(self):
        rng = random.Random(55)
        for _ in range(100):
            n_gt = rng.randint(2, 5)
            flags = [rng.random() < 0.5 for _ in range(rng.randint(1, 6))]
            while sum(flags) >= n_gt:
                n_gt += 1
            fp_positions = [i for i, f in enumerate(flags) if not f]
            if not fp_positions:
                continue
            flip = rng.choice(fp_positions)
            improved = list(flags)
            improved[flip] = True
            assert average_precision(improved, n_gt).ap >= \
                average_precision(flags, n_gt).ap


class TestMap50:
    def test_two_class_means(self):
        assert map50([0.728, 0.826]) == pytest.approx(0.777, abs=5e-4)
        assert map50([0.69, 0.68]) == pytest.approx(0.685, abs=5e-4)

    def test_trivial_means(self):
        assert map50([0.5]) == 0.5
        assert map50([1.0, 0.0]) == 0.5

    def test_undefined_classes_excluded(self):
        assert map50([APResult(0.8), APResult(0.0, defined=False)]) == 0.8

    def test_all_undefined_rejected(self):
        with pytest.raises(EmptyInputError):
            map50([APResult(0.0, defined=False)])
        with pytest.raises(EmptyInputError):
            map50([])


class TestEvaluateDetections:
    def test_ground_truth_replay_is_perfect(self):
        gts = {
            "a.png": [gt(0, 0, 10, 10, 0), gt(30, 30, 40, 40, 1)],
            "b.png": [gt(5, 5, 20, 20, 0)],
        }
        preds = {
            image: [Detection(b, 1.0) for b in boxes]
            for image, boxes in gts.items()
        }
        report = evaluate_detections(preds, gts, 0.5)
        assert report.map50 == 1.0
        for row in report.rows:
            assert row.precision == 1.0
            assert row.recall == 1.0
            assert row.ap == 1.0

    def test_mixed_fixture(self):
        gts = {"a.png": [gt(0, 0, 10, 10), gt(20, 0, 30, 10)]}
        preds = {"a.png": [
            pred(1, 0, 11, 10, 0.9),
            pred(0, 0, 10, 10, 0.8),
            pred(21, 0, 31, 10, 0.7),
        ]}
        report = evaluate_detections(preds, gts, 0.5)
        [row] = report.rows
        assert row.precision == pytest.approx(2 / 3)
        assert row.recall == 1.0
        assert row.ap == pytest.approx(0.8333, abs=1e-4)

    def test_confidence_rescaling_leaves_ap_unchanged(self):
        rng = random.Random(9)
        gts = {"a.png": [gt(i * 20 + 5, 0, i * 20 + 15, 10) for i in range(5)]}
        preds = {"a.png": [
            pred(i * 20 + 5 + rng.uniform(-2, 2), 0,
                 i * 20 + 15 + rng.uniform(-2, 2), 10,
                 rng.uniform(0.3, 0.9))
            for i in range(5)
        ] + [pred(200, 50, 215, 60, 0.45)]}
        base = evaluate_detections(preds, gts, 0.5)
        scaled = {
            "a.png": [Detection(d.box, d.confidence / 2) for d in preds["a.png"]]
        }
        rescaled = evaluate_detections(scaled, gts, 0.5)
        assert [r.ap for r in rescaled.rows] == [r.ap for r in base.rows]
