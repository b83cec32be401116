import numpy as np
import pytest

from tableqa_kit.errors import LengthMismatch
from tableqa_kit.evaluation import (
    answer_accuracy,
    build_composite_dev,
    sliced_report,
)
from tableqa_kit.sql import Answer, Op, RetType, SqlQuery, WhereClause


def scalar(x):
    return Answer.of_scalar(x)


def cells(*xs):
    return Answer.of_cells(xs)


def query_with(ret, n_where):
    where = tuple(
        WhereClause(col=i + 1, op=Op.EQ, value=f"v{i}") for i in range(n_where)
    )
    return SqlQuery(ret=ret, select_col=0, where=where)


class TestAnswerAccuracy:
    def test_identity(self):
        golds = [scalar(1), cells("a"), scalar(3)]
        assert answer_accuracy(golds, golds) == 100.0

    def test_disjoint(self):
        assert answer_accuracy([scalar(1)], [scalar(2)]) == 0.0

    def test_three_of_four(self):
        preds = [scalar(1), scalar(2), scalar(3), scalar(99)]
        golds = [scalar(1), scalar(2), scalar(3), scalar(4)]
        assert answer_accuracy(preds, golds) == 75.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            answer_accuracy([scalar(1)], [scalar(1), scalar(2)])

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        preds = [scalar(float(rng.integers(0, 3))) for _ in range(50)]
        golds = [scalar(float(rng.integers(0, 3))) for _ in range(50)]
        assert answer_accuracy(preds, golds) == answer_accuracy(golds, preds)


class TestSlicedReport:
    def test_single_where_bucket(self):
        instances = [
            (query_with(RetType.SELECT, 1), scalar(1), scalar(1)),
            (query_with(RetType.SELECT, 1), scalar(2), scalar(0)),
        ]
        report = sliced_report(instances)
        assert set(report.by_where) == {1}
        assert report.by_where[1].n == 2

    def test_weighted_bucket_mean_equals_overall(self):
        rng = np.random.default_rng(4)
        rets = [RetType.SELECT, RetType.COUNT, RetType.MIN, RetType.MAX,
                RetType.SUM, RetType.AVG]
        for _ in range(25):
            instances = []
            for _ in range(int(rng.integers(10, 300))):
                ret = rets[int(rng.integers(len(rets)))]
                n_where = int(rng.integers(1, 5))
                correct = bool(rng.random() < 0.6)
                gold = scalar(1.0)
                pred = scalar(1.0) if correct else scalar(0.0)
                instances.append((query_with(ret, n_where), gold, pred))
            report = sliced_report(instances)
            for buckets in (report.by_type, report.by_where):
                weighted = sum(b.accuracy * b.n for b in buckets.values())
                assert weighted / report.n == pytest.approx(report.overall, abs=1e-9)
                assert sum(b.n for b in buckets.values()) == report.n

    def test_accuracy_decreasing_in_where_count(self):
        # per-bucket correctness rates shaped like the observed decay
        rates = {1: 0.75, 2: 0.58, 3: 0.52, 4: 0.40}
        rng = np.random.default_rng(5)
        instances = []
        for n_where, rate in rates.items():
            for _ in range(400):
                correct = bool(rng.random() < rate)
                pred = scalar(1.0) if correct else scalar(0.0)
                instances.append((query_with(RetType.SELECT, n_where), scalar(1.0), pred))
        report = sliced_report(instances)
        accs = [report.by_where[k].accuracy for k in sorted(report.by_where)]
        assert accs == sorted(accs, reverse=True)
        for n_where, rate in rates.items():
            assert report.by_where[n_where].accuracy == pytest.approx(
                100 * rate, abs=10
            )

    def test_missing_gold_queries_omit_slices(self):
        instances = [(None, scalar(1), scalar(1)), (None, scalar(2), scalar(2))]
        report = sliced_report(instances)
        assert report.overall == 100.0
        assert report.by_type == {}
        assert report.by_where == {}

    def test_json_and_text_rendering(self):
        instances = [
            (query_with(RetType.SELECT, 1), scalar(1), scalar(1)),
            (query_with(RetType.SUM, 2), scalar(2), scalar(0)),
        ]
        report = sliced_report(instances)
        blob = report.to_json()
        assert blob["overall"] == 50.0
        assert blob["by_type"]["select"]["accuracy"] == 100.0
        text = report.to_text()
        assert "overall" in text and "select" in text


class TestCompositeDev:
    def test_equal_parts_when_supply_allows(self):
        rng = np.random.default_rng(6)
        real = [f"r{i}" for i in range(100)]
        synthetic = [f"s{i}" for i in range(500)]
        got = build_composite_dev(real, synthetic, rng)
        assert len(got) == 200
        assert sum(1 for x in got if x.startswith("s")) == 100
        assert len(set(got)) == 200  # sampled without replacement

    def test_supply_limited(self):
        rng = np.random.default_rng(7)
        real = [f"r{i}" for i in range(100)]
        synthetic = [f"s{i}" for i in range(40)]
        got = build_composite_dev(real, synthetic, rng)
        assert len(got) == 140
        assert {x for x in got if x.startswith("s")} == set(synthetic)

    def test_deterministic_under_seed(self):
        real = [f"r{i}" for i in range(30)]
        synthetic = [f"s{i}" for i in range(90)]
        a = build_composite_dev(real, synthetic, np.random.default_rng(8))
        b = build_composite_dev(real, synthetic, np.random.default_rng(8))
        assert a == b
