import math

import numpy as np
import pytest

from tableqa_kit.errors import EmptyCorpus, EmptySentence
from tableqa_kit.lm import (
    NGramLM,
    filter_by_scores,
    filter_questions,
    perplexity,
    train_ngram_lm,
)
from tableqa_kit.qgen import QGRecord, serialize_qg_input, template_transcribe
from tableqa_kit.sampler import SamplerConfig, generate_sqls
from tableqa_kit.sql import execute

from conftest import make_random_table


def _records(questions, election):
    # any valid QGInput will do as a carrier
    from tableqa_kit.sql import Op, RetType, SqlQuery, WhereClause

    query = SqlQuery(
        ret=RetType.SELECT, select_col=1,
        where=(WhereClause(col=0, op=Op.EQ, value="Labour"),),
    )
    qg = serialize_qg_input(query, execute(query, election), election)
    return [QGRecord(input=qg, question=question) for question in questions]


class TestTraining:
    def test_add_k_conditional(self):
        k = 0.5
        lm = train_ngram_lm(["a b", "a b"], n=2, k=k)
        # two trained words plus the unknown class -> 3 smoothing classes
        assert lm.prob(("a",), "b") == pytest.approx((2 + k) / (2 + k * 3))

    def test_order_bound(self):
        with pytest.raises(ValueError):
            train_ngram_lm(["a b"], n=5)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            train_ngram_lm([], n=2)

    def test_unknown_words_map_to_unk(self):
        lm = train_ngram_lm(["a b"], n=2, k=1.0)
        assert perplexity(lm, "z z") > 0


class TestPerplexity:
    def test_uniform_model_is_vocab_plus_one(self):
        for v in (1, 5, 100):
            vocab = frozenset(f"w{i}" for i in range(v))
            lm = NGramLM(n=2, k=0.25, vocab=vocab)
            for sentence in ("w0", "w0 w0 hello", "completely out of vocab"):
                assert perplexity(lm, sentence) == pytest.approx(v + 1)

    def test_deterministic_model_tends_to_one(self):
        lm = train_ngram_lm(["x x x x"], n=2, k=1e-9)
        assert perplexity(lm, "x x x x x") == pytest.approx(1.0, abs=1e-6)

    def test_whitespace_invariance(self):
        lm = train_ngram_lm(["a b c", "b c a"], n=2, k=0.5)
        assert perplexity(lm, "a b  c") == perplexity(lm, " a b c ")
        assert perplexity(lm, "a\tb c\n") == perplexity(lm, "a b c")

    def test_empty_sentence(self):
        lm = train_ngram_lm(["a b"], n=2)
        with pytest.raises(EmptySentence):
            perplexity(lm, "   ")

    def test_shuffled_questions_score_worse_on_average(self, election):
        # in-distribution corpus: template questions over random tables
        rng = np.random.default_rng(21)
        tables = [election] + [
            make_random_table(rng, f"t{i}", int(rng.integers(4, 8)),
                              int(rng.integers(6, 30)))
            for i in range(12)
        ]
        questions = []
        for i, t in enumerate(tables):
            for sq in generate_sqls(t, 20, SamplerConfig(seed=i)).queries:
                questions.append(template_transcribe(sq.query, t))
        train, held_out = questions[:-100], questions[-100:]
        assert len(held_out) == 100
        lm = train_ngram_lm(train, n=3, k=0.1)
        deltas = []
        for question in held_out:
            words = question.split()
            shuffled = " ".join(rng.permutation(words))
            deltas.append(perplexity(lm, shuffled) - perplexity(lm, question))
        assert np.mean(deltas) >= 0


class TestFilter:
    def test_keep_one_is_identity(self, election):
        records = _records(["q one?", "q two?", "q three?"], election)
        assert filter_questions(records, lambda s: float(len(s)), 1.0) == records

    def test_keep_two_thirds(self, election):
        records = _records(["a?", "b?", "c?"], election)
        scores = {"a?": 3.0, "b?": 1.0, "c?": 2.0}
        survivors = filter_questions(records, lambda s: scores[s], 2 / 3)
        assert [r.question for r in survivors] == ["b?", "c?"]

    def test_output_is_a_subsequence(self, election):
        rng = np.random.default_rng(5)
        records = _records([f"question {i}?" for i in range(40)], election)
        scores = list(rng.uniform(0, 100, size=40))
        survivors = filter_by_scores(records, scores, 0.4)
        it = iter(records)
        assert all(r in it for r in survivors)

    def test_survivor_mean_never_exceeds_input_mean(self, election):
        rng = np.random.default_rng(6)
        records = _records([f"q {i}?" for i in range(25)], election)
        for _ in range(200):
            scores = list(rng.uniform(0, 50, size=25))
            keep = float(rng.uniform(0.1, 1.0))
            survivors = filter_by_scores(list(range(25)), scores, keep)
            survivor_mean = np.mean([scores[i] for i in survivors])
            assert survivor_mean <= np.mean(scores) + 1e-12

    def test_ties_break_by_original_index(self, election):
        records = _records(["a?", "b?", "c?", "d?"], election)
        survivors = filter_by_scores(records, [1.0, 1.0, 1.0, 1.0], 0.5)
        assert [r.question for r in survivors] == ["a?", "b?"]

    def test_keep_fraction_bounds(self, election):
        records = _records(["a?"], election)
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                filter_questions(records, lambda s: 1.0, bad)

    def test_ceil_semantics(self, election):
        records = _records([f"q{i}?" for i in range(10)], election)
        survivors = filter_by_scores(records, list(range(10)), 0.05)
        assert len(survivors) == math.ceil(0.05 * 10) == 1
