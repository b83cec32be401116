import numpy as np
import pytest

from tableqa_kit.errors import EmptyCorpus, Unsatisfiable
from tableqa_kit.sampler import (
    SamplerConfig,
    check_aggregate_validity,
    check_minimality,
    estimate_priors,
    generate_sqls,
    generate_where_clauses,
    sample_corpus,
)
from tableqa_kit.sql import (
    Op,
    RetType,
    SqlQuery,
    WhereClause,
    answers_equal,
    execute,
    render_sql,
)
from tableqa_kit.tables import DataType, Table

from conftest import make_random_table
from oracle import brute_aggregate_ok, brute_minimal

PARTY, CANDIDATE, VOTES = 0, 1, 2


def q(ret, col, *clauses):
    return SqlQuery(ret=ret, select_col=col, where=tuple(clauses))


def eq(col, value):
    return WhereClause(col=col, op=Op.EQ, value=value)


def as_triples(query, t):
    return [(cl.col, cl.op.value, cl.value) for cl in query.where]


class TestPriors:
    def test_where_count_histogram(self):
        corpus = [
            q(RetType.SELECT, 0, eq(1, "a")),
            q(RetType.SELECT, 0, eq(1, "b")),
            q(RetType.SELECT, 0, eq(1, "a"), eq(2, "c")),
        ]
        stats = estimate_priors(corpus)
        assert stats.where_count_hist == (2, 1, 0, 0)

    def test_all_select_normalizes_to_point_mass(self):
        corpus = [q(RetType.SELECT, 0, eq(1, "a"))] * 3
        cfg = estimate_priors(corpus).to_config()
        assert cfg.ret_type_dist == (1.0, 0.0, 0.0, 0.0, 0.0)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            estimate_priors([])

    def test_count_queries_skip_ret_histogram(self):
        corpus = [q(RetType.COUNT, 0, eq(1, "a")), q(RetType.SUM, 0, eq(1, "a"))]
        stats = estimate_priors(corpus)
        assert stats.ret_type_hist == (0, 1, 0, 0, 0)
        assert sum(stats.where_count_hist) == 2


class TestSamplerConfig:
    def test_distributions_must_sum_to_one(self):
        with pytest.raises(ValueError):
            SamplerConfig(where_count_dist=(0.5, 0.5, 0.5, 0.5))

    def test_no_negative_probabilities(self):
        with pytest.raises(ValueError):
            SamplerConfig(where_count_dist=(1.2, -0.2, 0.0, 0.0))


class TestGenerateWhereClauses:
    def test_single_clause_matches_a_row(self, election):
        rng = np.random.default_rng(3)
        for _ in range(50):
            clauses = generate_where_clauses(election, 1, rng)
            assert len(clauses) == 1
            probe = q(RetType.SELECT, (clauses[0].col + 1) % 3, *clauses)
            got = execute(probe, election)
            assert len(got.cells) >= 1

    def test_distinct_columns(self, election):
        rng = np.random.default_rng(4)
        for _ in range(50):
            clauses = generate_where_clauses(election, 3, rng)
            assert len({cl.col for cl in clauses}) == 3

    def test_n_beyond_columns_is_an_error(self, election):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            generate_where_clauses(election, 4, rng)

    def test_comparisons_only_on_numeric_columns(self, election):
        rng = np.random.default_rng(6)
        for _ in range(200):
            for cl in generate_where_clauses(election, 2, rng):
                if cl.op is not Op.EQ:
                    assert election.col_types[cl.col] is DataType.NUMERIC

    def test_values_come_from_the_column(self, election):
        rng = np.random.default_rng(7)
        for _ in range(50):
            for cl in generate_where_clauses(election, 1, rng):
                assert cl.value in election.column(cl.col)

    def test_unsatisfiable_budget(self):
        # single numeric row: "A > 5"/"A < 5" never match while "A = 5"
        # always does, so with a one-attempt budget some seeds must fail
        bad = Table(id="b", headers=["A", "B"], rows=[["5", "y"]])
        outcomes = set()
        for seed in range(30):
            try:
                clauses = generate_where_clauses(
                    bad, 1, np.random.default_rng(seed), max_attempts=1
                )
                assert clauses[0].op is Op.EQ
                outcomes.add("ok")
            except Unsatisfiable:
                outcomes.add("unsat")
        assert outcomes == {"ok", "unsat"}


class TestChecks:
    def test_redundant_clause_fails_minimality(self, election):
        query = q(
            RetType.SELECT, VOTES,
            eq(CANDIDATE, "Andrew Turner"), eq(PARTY, "Conservatives"),
        )
        assert check_minimality(query, election) is False
        assert brute_minimal(
            "select", VOTES, as_triples(query, election),
            election.headers, election.rows,
        ) is False

    def test_necessary_clause_passes_minimality(self, election):
        query = q(RetType.SELECT, CANDIDATE, eq(PARTY, "Labour"))
        assert check_minimality(query, election) is True
        assert brute_minimal(
            "select", CANDIDATE, as_triples(query, election),
            election.headers, election.rows,
        ) is True

    def test_duplicate_clauses_fail(self, election):
        query = q(RetType.SELECT, CANDIDATE, eq(PARTY, "Labour"), eq(PARTY, "Labour"))
        assert check_minimality(query, election) is False

    def test_empty_subset_participates_for_single_clause(self, election):
        # Votes > 0 matches every row, so dropping the only clause keeps the
        # answer; the empty WHERE set must be part of the subset check
        query = q(RetType.SELECT, CANDIDATE, WhereClause(VOTES, Op.GT, "0"))
        assert check_minimality(query, election) is False

    def test_aggregate_needs_two_rows(self, election):
        assert check_aggregate_validity(
            q(RetType.MAX, VOTES, eq(PARTY, "Labour")), election
        ) is False
        assert check_aggregate_validity(
            q(RetType.SUM, VOTES, WhereClause(VOTES, Op.GT, "11,484")), election
        ) is True

    def test_select_always_valid(self, election):
        assert check_aggregate_validity(
            q(RetType.SELECT, CANDIDATE, eq(PARTY, "Labour")), election
        ) is True

    def test_checks_agree_with_oracle_on_random_pairs(self):
        rng = np.random.default_rng(99)
        agreements = 0
        for i in range(40):
            t = make_random_table(rng, f"t{i}", int(rng.integers(4, 9)),
                                  int(rng.integers(5, 50)))
            result = generate_sqls(t, 5, SamplerConfig(seed=int(rng.integers(2**32))))
            for sq in result.queries:
                triples = as_triples(sq.query, t)
                assert brute_minimal(
                    sq.query.ret.value, sq.query.select_col, triples,
                    t.headers, t.rows,
                )
                assert brute_aggregate_ok(
                    sq.query.ret.value, triples, t.headers, t.rows
                )
                agreements += 1
        assert agreements >= 100


class TestGenerateSqls:
    def test_election_yields_validated_queries(self, election):
        result = generate_sqls(election, 50, SamplerConfig(seed=17))
        assert len(result.queries) >= 10
        for sq in result.queries:
            assert check_minimality(sq.query, election)
            assert check_aggregate_validity(sq.query, election)
            assert answers_equal(execute(sq.query, election), sq.answer)
            assert sq.query.select_col not in {cl.col for cl in sq.query.where}
            if sq.query.ret.is_numeric_aggregate:
                assert election.col_types[sq.query.select_col] is DataType.NUMERIC

    def test_single_column_table_rejected(self):
        t = Table(id="t", headers=["A"], rows=[["1"], ["2"]])
        with pytest.raises(ValueError):
            generate_sqls(t, 5, SamplerConfig(seed=0))

    def test_pairwise_distinct_renderings(self, election):
        result = generate_sqls(election, 60, SamplerConfig(seed=23))
        keys = [render_sql(sq.query, election) for sq in result.queries]
        assert len(keys) == len(set(keys))

    def test_deterministic(self, election):
        a = generate_sqls(election, 30, SamplerConfig(seed=5))
        b = generate_sqls(election, 30, SamplerConfig(seed=5))
        assert [render_sql(x.query, election) for x in a.queries] == [
            render_sql(x.query, election) for x in b.queries
        ]

    def test_budget_exhaustion_is_soft(self, election):
        # a 3x5 table cannot host 500 distinct validated queries
        result = generate_sqls(
            election, 500, SamplerConfig(seed=1, max_attempts_per_query=5)
        )
        assert result.budget_exhausted
        assert 0 < len(result.queries) < 500

    def test_sample_corpus_substreams_are_order_independent(self, election):
        rng = np.random.default_rng(2)
        other = make_random_table(rng, "other", 5, 20)
        cfg = SamplerConfig(seed=77)
        ab = sample_corpus([election, other], 10, cfg)
        ba = sample_corpus([other, election], 10, cfg)
        flat_ab = {t.id: [render_sql(sq.query, t) for sq in r.queries] for t, r in ab}
        flat_ba = {t.id: [render_sql(sq.query, t) for sq in r.queries] for t, r in ba}
        assert flat_ab == flat_ba

    def test_answers_attached_for_downstream(self, election):
        result = generate_sqls(election, 20, SamplerConfig(seed=9))
        for sq in result.queries:
            assert sq.answer is not None
