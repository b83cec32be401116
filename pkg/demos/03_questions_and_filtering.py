# From queries to questions, and filtering the clumsy ones.
#
# Each sampled query is linearized into a marker-token line that an external
# text-to-text generator can consume ([S] operation/column, [W] clauses,
# [A] answer, [C]/[CS] headers). The built-in template transcriber is the
# deterministic fallback, and an n-gram perplexity filter drops the worst
# questions before they reach training.

from tableqa_kit import (
    QGRecord,
    SamplerConfig,
    filter_questions,
    generate_sqls,
    parse_qg_input,
    perplexity,
    serialize_qg_input,
    template_transcribe,
    train_ngram_lm,
)
from tableqa_kit.tables import Table

table = Table(
    id="election",
    headers=["Party", "Candidate", "Votes"],
    rows=[
        ["Conservatives", "Andrew Turner", "32,717"],
        ["Liberal Democrats", "Anthony Rowlands", "19,739"],
        ["Labour", "Mark Chiverton", "11,484"],
        ["UK Independence", "Michael Tarrant", "2,352"],
        ["Independent", "Edward Corby", "551"],
    ],
)

result = generate_sqls(table, 12, SamplerConfig(seed=5))

# Serialize one query and look at the wire format.
sq = result.queries[0]
qg = serialize_qg_input(sq.query, sq.answer, table)
print("generator input:", qg.text)

# The format parses back field-for-field, which is how the pipeline checks
# nothing was lost before handing lines to an external model.
parsed = parse_qg_input(qg.text)
print("recovered:", parsed.op, "/", parsed.select_header, "/", parsed.where)

# Template transcription: scaffold words are lowercase, copied headers and
# values keep their casing so entity linking finds them verbatim.
records = []
for sq in result.queries:
    question = template_transcribe(sq.query, table)
    records.append(QGRecord(input=serialize_qg_input(sq.query, sq.answer, table),
                            question=question))
for r in records[:5]:
    print("  Q:", r.question)

# Score questions with a trigram model trained on in-distribution text;
# garbled word salad lands at a visibly higher perplexity.
lm = train_ngram_lm([r.question for r in records], n=3, k=0.1)
clean = records[0].question
salad = " ".join(reversed(clean.split()))
print(f"perplexity clean={perplexity(lm, clean):.1f} shuffled={perplexity(lm, salad):.1f}")

# Keep the lowest-perplexity 75%, original order preserved.
survivors = filter_questions(records, lambda s: perplexity(lm, s), keep_fraction=0.75)
print(f"kept {len(survivors)} of {len(records)} questions")
