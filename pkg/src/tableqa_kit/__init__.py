"""Toolkit for synthesizing and benchmarking table question-answering data.

The pieces, in pipeline order: typed table model, SQL-subset executor,
validated query sampling, generator-input serialization with a template
transcriber, n-gram perplexity filtering, entity-linking features with a
gradient-boosted candidate reranker, category-graph topic assignment with
leave-one-out splits, and the evaluation harness.
"""

__version__ = "0.1.0"

from .errors import TableQAError
from .evaluation import EvalReport, answer_accuracy, build_composite_dev, sliced_report
from .linking import EntityKind, EntityLink, dump_links, entity_features, link
from .lm import NGramLM, filter_questions, perplexity, train_ngram_lm
from .qgen import (
    QGInput,
    QGRecord,
    parse_qg_input,
    serialize_qg_input,
    template_transcribe,
)
from .rerank import (
    Candidate,
    CandidateSet,
    FeatureVector,
    GbtModel,
    featurize,
    load_model,
    rerank,
    save_model,
    train,
)
from .sampler import (
    PriorStats,
    SampledQuery,
    SampleResult,
    SamplerConfig,
    check_aggregate_validity,
    check_minimality,
    estimate_priors,
    generate_sqls,
    generate_where_clauses,
    sample_corpus,
)
from .sql import (
    Answer,
    Op,
    RetType,
    SqlQuery,
    WhereClause,
    answers_equal,
    execute,
    parse_sql,
    render_sql,
)
from .tables import (
    DataType,
    Table,
    infer_column_type,
    parse_table,
    read_tables_jsonl,
    table_from_json,
    table_to_json,
    write_tables_jsonl,
)
from .topics import (
    DEFAULT_TOPIC_GROUPS,
    CategoryGraph,
    TopicSplit,
    assign_topic,
    build_loo_splits,
    extract_topic_vocab,
    nearest_topics,
    topic_jaccard,
    vocab_overlap,
)
