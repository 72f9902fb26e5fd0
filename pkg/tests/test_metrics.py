import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowtriage import metrics
from flowtriage.metrics import MetricError, OutcomePartition


class TestPartition:
    def test_definition(self):
        part = metrics.partition_outcomes([1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 2, 3])
        assert (part.tp, part.tn, part.fp, part.fn) == ([0], [1], [2], [3])

    def test_all_correct(self):
        part = metrics.partition_outcomes([1, 0], [1, 0], [0, 1])
        assert part.fp == [] and part.fn == []

    def test_empty(self):
        part = metrics.partition_outcomes([], [], [])
        assert part.total() == 0

    def test_length_mismatch(self):
        with pytest.raises(MetricError):
            metrics.partition_outcomes([1], [1, 0], [0, 1])

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), max_size=50))
    def test_cells_sum_to_n(self, pairs):
        preds = [p for p, _ in pairs]
        truths = [t for _, t in pairs]
        part = metrics.partition_outcomes(preds, truths, list(range(len(pairs))))
        assert part.total() == len(pairs)


class TestBrier:
    def test_perfect_forecast(self):
        assert metrics.brier_score([1.0, 0.0], [1, 0]) == 0.0

    def test_constant_half(self):
        assert metrics.brier_score([0.5, 0.5], [1, 0]) == 0.25

    def test_hand_arithmetic(self):
        assert metrics.brier_score([0.9, 0.2, 0.6], [1, 0, 1]) == pytest.approx(0.07)

    def test_errors(self):
        with pytest.raises(MetricError):
            metrics.brier_score([], [])
        with pytest.raises(MetricError):
            metrics.brier_score([1.2], [1])

    @given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=1,
                    max_size=40))
    def test_relabeling_invariance(self, pairs):
        probs = [p for p, _ in pairs]
        truths = [t for _, t in pairs]
        flipped = metrics.brier_score([1 - p for p in probs], [1 - t for t in truths])
        assert metrics.brier_score(probs, truths) == pytest.approx(flipped)


def part_with(tp=0, tn=0, fp=0, fn=0):
    ids = iter(range(tp + tn + fp + fn))
    return OutcomePartition(
        tp=[next(ids) for _ in range(tp)], tn=[next(ids) for _ in range(tn)],
        fp=[next(ids) for _ in range(fp)], fn=[next(ids) for _ in range(fn)])


class TestSummarize:
    def test_perfect(self):
        report = metrics.summarize(part_with(tp=50, tn=50))
        assert report.accuracy == 1.0 and report.fpr == 0.0 and report.fnr == 0.0

    def test_precision_absent_when_no_positive_predictions(self):
        report = metrics.summarize(part_with(tn=8, fn=2))
        assert report.precision is None
        assert report.to_dict()["Precision"] is None

    def test_hand_arithmetic(self):
        report = metrics.summarize(part_with(tp=9, fn=1, tn=8, fp=2))
        assert report.recall == pytest.approx(0.9)
        assert report.fpr == pytest.approx(0.2)
        assert report.accuracy == pytest.approx(0.85)

    def test_accuracy_identity(self):
        part = part_with(tp=7, tn=5, fp=3, fn=2)
        report = metrics.summarize(part)
        n = part.total()
        assert report.accuracy == pytest.approx(1 - (3 + 2) / n)

    def test_empty_partition(self):
        with pytest.raises(MetricError):
            metrics.summarize(part_with())

    def test_text_table_has_table2_columns(self):
        text = metrics.summarize(part_with(tp=5, tn=5), brier=0.01).to_text()
        for col in metrics.MetricReport.COLUMNS:
            assert col in text


class TestBands:
    def test_single_tp(self):
        part = OutcomePartition(tp=[0])
        bands = metrics.probability_bands({0: 0.95}, part, [0.9])
        assert bands["TP"][0.9] == 100.0

    def test_half_above(self):
        part = OutcomePartition(tp=[0, 1])
        bands = metrics.probability_bands({0: 0.6, 1: 0.95}, part, [0.9])
        assert bands["TP"][0.9] == 50.0

    def test_benign_groups_use_complement(self):
        # a confident benign prediction (p near 0) scores high in TN bands
        part = OutcomePartition(tn=[0])
        bands = metrics.probability_bands({0: 0.03}, part, [0.9])
        assert bands["TN"][0.9] == 100.0

    def test_empty_group_absent(self):
        part = OutcomePartition(tp=[0])
        bands = metrics.probability_bands({0: 0.8}, part, [0.7])
        assert "FN" not in bands

    def test_non_increasing_in_threshold(self):
        rng = np.random.default_rng(0)
        probs = {i: float(p) for i, p in enumerate(rng.uniform(0.5, 1.0, 50))}
        part = OutcomePartition(tp=list(range(50)))
        bands = metrics.probability_bands(probs, part, [0.6, 0.7, 0.8, 0.9])
        row = [bands["TP"][t] for t in (0.6, 0.7, 0.8, 0.9)]
        assert row == sorted(row, reverse=True)

    def test_threshold_validation(self):
        part = OutcomePartition(tp=[0])
        with pytest.raises(MetricError):
            metrics.probability_bands({0: 0.5}, part, [0.9, 0.7])
