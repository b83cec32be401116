"""Batch pipeline driver: every stage as a subcommand.

Each artifact-writing subcommand records a manifest next to its first output
(``<output>.manifest.json``) holding the resolved arguments, the seed, a
config hash, and input/output digests — ``replay`` re-runs a manifest and
must reproduce the artifacts byte for byte. Output is plain text (no color,
so NO_COLOR needs no special casing).

Exit codes: 0 success, 1 usage, 2 data error, 3 sampling budget exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import subprocess
import sys
from pathlib import Path

from . import __version__
from .errors import MalformedInput, TableQAError
from .evaluation import sliced_report
from .lm import filter_by_scores, perplexity, train_ngram_lm
from .qgen import serialize_qg_input, template_transcribe
from .rerank import (
    featurize_log,
    load_candidate_log,
    load_model,
    save_model,
    score_candidates,
    train_from_log,
)
from .sampler import SamplerConfig, estimate_priors, sample_corpus
from .sql import (
    answer_from_json,
    answer_to_json,
    query_from_json,
    query_to_json,
    parse_sql,
    render_sql,
)
from .tables import parse_table, read_tables_jsonl, write_tables_jsonl
from .topics import (
    CategoryGraph,
    build_loo_splits,
    extract_topic_vocab,
    nearest_topics,
    overlap_matrix,
    topic_jaccard,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BUDGET = 3


class _Parser(argparse.ArgumentParser):
    # spec exit-code table: usage errors are 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def _read_jsonl(path) -> list[dict]:
    out = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
    return out


def _write_jsonl(path, objs) -> None:
    _write_lines(path, (json.dumps(o, ensure_ascii=False) for o in objs))


def _pipe_lines(cmd: str, lines: list[str]) -> list[str]:
    """Line-oriented external process contract: n lines in, n lines out."""
    proc = subprocess.run(
        cmd, shell=True, input="\n".join(lines) + "\n",
        capture_output=True, text=True,
    )
    if proc.returncode != 0:
        raise MalformedInput(f"external command failed ({proc.returncode}): {cmd}")
    out = proc.stdout.splitlines()
    if len(out) != len(lines):
        raise MalformedInput(
            f"external command emitted {len(out)} lines for {len(lines)} inputs"
        )
    return out


def _tables_by_id(path) -> dict:
    return {t.id: t for t in read_tables_jsonl(path)}


def _load_records(path) -> list[dict]:
    records = _read_jsonl(path)
    for r in records:
        for key in ("table_id", "sql", "qg_input", "question"):
            if key not in r:
                raise MalformedInput(f"{path}: record missing {key!r}")
    return records


# --- subcommand handlers ----------------------------------------------------
# each returns (output paths, partial flag)

def _cmd_ingest(ns) -> tuple[list[Path], bool]:
    tables = []
    for raw in ns.input:
        path = Path(raw)
        fmt = ns.format
        if fmt == "auto":
            fmt = {".jsonl": "jsonl", ".tsv": "tsv", ".csv": "csv"}.get(
                path.suffix.lower(), "csv"
            )
        if fmt == "jsonl":
            tables.extend(read_tables_jsonl(path))
        else:
            tables.append(
                parse_table(path.read_text(encoding="utf-8"), table_id=path.stem, fmt=fmt)
            )
    write_tables_jsonl(tables, ns.output)
    return [Path(ns.output)], False


def _cmd_sample(ns) -> tuple[list[Path], bool]:
    tables = read_tables_jsonl(ns.tables)
    cfg_kwargs = {"seed": ns.seed, "max_attempts_per_query": ns.max_attempts}
    if ns.config:
        file_cfg = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        for key in ("where_count_dist", "ret_type_dist"):
            if key in file_cfg:
                cfg_kwargs[key] = tuple(file_cfg[key])
        if "max_attempts_per_query" in file_cfg:
            cfg_kwargs["max_attempts_per_query"] = file_cfg["max_attempts_per_query"]
    if ns.priors:
        table_idx = {t.id: t for t in tables}
        corpus = []
        for obj in _read_jsonl(ns.priors):
            if "ret" in obj:
                corpus.append(query_from_json(obj))
            else:
                corpus.append(parse_sql(obj["sql"], table_idx[obj["table_id"]]))
        stats = estimate_priors(corpus)
        cfg = stats.to_config(**cfg_kwargs)
    else:
        cfg = SamplerConfig(**cfg_kwargs)

    rows, partial = [], False
    for table, result in sample_corpus(tables, ns.per_table, cfg):
        partial = partial or result.budget_exhausted
        for sq in result.queries:
            obj = query_to_json(sq.query, table)
            obj["answer"] = answer_to_json(sq.answer)
            rows.append(obj)
    _write_jsonl(ns.output, rows)
    if partial:
        print(
            json.dumps({"warning": "budget exhausted; output is partial"}),
            file=sys.stderr,
        )
    return [Path(ns.output)], partial


def _cmd_serialize(ns) -> tuple[list[Path], bool]:
    tables = _tables_by_id(ns.tables)
    lines = []
    for obj in _read_jsonl(ns.queries):
        table = tables[obj["table_id"]]
        q = query_from_json(obj)
        a = answer_from_json(obj["answer"])
        lines.append(serialize_qg_input(q, a, table).text)
    _write_lines(ns.output, lines)
    return [Path(ns.output)], False


def _cmd_transcribe(ns) -> tuple[list[Path], bool]:
    tables = _tables_by_id(ns.tables)
    queries = _read_jsonl(ns.queries)
    inputs, parsed = [], []
    for obj in queries:
        table = tables[obj["table_id"]]
        q = query_from_json(obj)
        a = answer_from_json(obj["answer"])
        inputs.append(serialize_qg_input(q, a, table).text)
        parsed.append((table, q))
    if ns.questions:
        questions = _read_lines(ns.questions)
        if len(questions) != len(queries):
            raise MalformedInput("question file is not aligned with the queries")
    elif ns.external:
        questions = _pipe_lines(ns.external, inputs)
    else:
        questions = [template_transcribe(q, table) for table, q in parsed]
    records = [
        {
            "table_id": obj["table_id"],
            "sql": obj["sql"],
            "qg_input": text,
            "question": question,
            "perplexity": None,
        }
        for obj, text, question in zip(queries, inputs, questions)
    ]
    _write_jsonl(ns.output, records)
    return [Path(ns.output)], False


def _build_scorer(ns):
    corpus = [line for line in _read_lines(ns.corpus) if line.strip()]
    lm = train_ngram_lm(corpus, n=ns.order, k=ns.smoothing_k)
    return lambda question: perplexity(lm, question)


def _cmd_score(ns) -> tuple[list[Path], bool]:
    records = _load_records(ns.records)
    questions = [r["question"] for r in records]
    if ns.external:
        scores = [float(s) for s in _pipe_lines(ns.external, questions)]
    else:
        scorer = _build_scorer(ns)
        scores = [scorer(q) for q in questions]
    _write_lines(ns.output, (repr(s) for s in scores))
    return [Path(ns.output)], False


def _cmd_filter(ns) -> tuple[list[Path], bool]:
    records = _load_records(ns.records)
    if ns.scores:
        scores = [float(s) for s in _read_lines(ns.scores) if s.strip()]
        if len(scores) != len(records):
            raise MalformedInput("scores sidecar is not aligned with the records")
    else:
        if not ns.corpus:
            raise MalformedInput("filter needs --scores or --corpus")
        scorer = _build_scorer(ns)
        scores = [scorer(r["question"]) for r in records]
    # records pass through untouched so --keep 1.0 is the identity;
    # scores live in the sidecar written by `score`
    survivors = filter_by_scores(records, scores, ns.keep)
    _write_jsonl(ns.output, survivors)
    return [Path(ns.output)], False


def _cmd_rerank_train(ns) -> tuple[list[Path], bool]:
    tables = _tables_by_id(ns.tables)
    sets = load_candidate_log(ns.log, tables)
    model = train_from_log(
        sets, tables,
        n_trees=ns.trees, max_depth=ns.depth, learning_rate=ns.learning_rate,
    )
    save_model(model, ns.model_out)
    return [Path(ns.model_out)], False


def _cmd_rerank_apply(ns) -> tuple[list[Path], bool]:
    tables = _tables_by_id(ns.tables)
    sets = featurize_log(load_candidate_log(ns.log, tables), tables)
    model = load_model(ns.model)
    rows = []
    for s in sets:
        table = tables[s.table_id]
        scores = score_candidates(s.question, table, s.candidates, model)
        best = 0
        for i in range(1, len(s.candidates)):
            if scores[i] > scores[best]:
                best = i
        chosen = s.candidates[best]
        rows.append(
            {
                "qid": s.qid,
                "table_id": s.table_id,
                "sql": render_sql(chosen.q, table),
                "answer": None
                if chosen.predicted_answer is None
                else answer_to_json(chosen.predicted_answer),
                "score": scores[best],
            }
        )
    _write_jsonl(ns.output, rows)
    return [Path(ns.output)], False


def _cmd_topics_assign(ns) -> tuple[list[Path], bool]:
    graph = CategoryGraph.from_files(ns.edges, ns.main_topics)
    lines = []
    for article in _read_lines(ns.articles):
        if not article.strip():
            continue
        topics = nearest_topics(article, graph, k=ns.top)
        lines.append(f"{article}\t{','.join(topics)}")
    _write_lines(ns.output, lines)
    return [Path(ns.output)], False


def _read_assignments(path) -> dict[str, list[str]]:
    out = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedInput(f"{path}:{lineno}: expected article<TAB>topics")
        out[parts[0]] = parts[1].split(",")
    return out


def _cmd_topics_jaccard(ns) -> tuple[list[Path], bool]:
    assignments = _read_assignments(ns.assignments)
    topics = sorted({t for ts in assignments.values() for t in ts})
    lines = ["\t".join([""] + topics)]
    for a in topics:
        row = [a] + [f"{topic_jaccard(assignments, a, b):.6f}" for b in topics]
        lines.append("\t".join(row))
    _write_lines(ns.output, lines)
    return [Path(ns.output)], False


def _cmd_topics_vocab(ns) -> tuple[list[Path], bool]:
    corpus = [line for line in _read_lines(ns.corpus) if line.strip()]
    base = set()
    if ns.base_vocab:
        base = {line.strip() for line in _read_lines(ns.base_vocab) if line.strip()}
    words = extract_topic_vocab(
        corpus, base, min_freq=ns.min_freq, max_terms=ns.max_terms
    )
    _write_lines(ns.output, words)
    return [Path(ns.output)], False


def _cmd_topics_overlap(ns) -> tuple[list[Path], bool]:
    questions = {}
    for spec_item in ns.questions:
        topic, _, path = spec_item.partition("=")
        if not topic or not path:
            raise MalformedInput(f"--questions needs TOPIC=PATH, got {spec_item!r}")
        questions[topic] = [line for line in _read_lines(path) if line.strip()]
    matrix = overlap_matrix(questions, top_k=ns.top_k)
    topics = sorted(matrix)
    lines = ["\t".join(["test/train"] + topics)]
    for test in topics:
        lines.append(
            "\t".join([test] + [f"{matrix[test][train]:.2f}" for train in topics])
        )
    _write_lines(ns.output, lines)
    return [Path(ns.output)], False


def _cmd_topics_split(ns) -> tuple[list[Path], bool]:
    instances = []
    for lineno, line in enumerate(_read_lines(ns.instances), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedInput(f"{ns.instances}:{lineno}: expected id<TAB>group<TAB>fold")
        instances.append((parts[0], parts[1], parts[2]))
    split = build_loo_splits(instances, ns.target)
    out_dir = Path(ns.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for fold in ("train", "dev", "test"):
        path = out_dir / f"{ns.target}.{fold}.ids"
        _write_lines(path, getattr(split, fold))
        outputs.append(path)
    return outputs, False


def _cmd_eval(ns) -> tuple[list[Path], bool]:
    golds = _read_jsonl(ns.gold)
    preds = _read_jsonl(ns.pred)
    if len(golds) != len(preds):
        raise MalformedInput(f"{len(golds)} gold rows vs {len(preds)} predictions")
    tables = _tables_by_id(ns.tables) if ns.tables else {}
    instances = []
    for g, p in zip(golds, preds):
        query = None
        if g.get("sql") and g.get("table_id") in tables:
            query = parse_sql(g["sql"], tables[g["table_id"]])
        instances.append(
            (query, answer_from_json(g["answer"]), answer_from_json(p["answer"]))
        )
    report = sliced_report(instances)
    print(report.to_text())
    outputs = []
    if ns.report_json:
        with open(ns.report_json, "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        outputs.append(Path(ns.report_json))
    return outputs, False


_HANDLERS = {
    "ingest": _cmd_ingest,
    "sample": _cmd_sample,
    "serialize": _cmd_serialize,
    "transcribe": _cmd_transcribe,
    "score": _cmd_score,
    "filter": _cmd_filter,
    "rerank-train": _cmd_rerank_train,
    "rerank-apply": _cmd_rerank_apply,
    "topics assign": _cmd_topics_assign,
    "topics jaccard": _cmd_topics_jaccard,
    "topics vocab": _cmd_topics_vocab,
    "topics overlap": _cmd_topics_overlap,
    "topics split": _cmd_topics_split,
    "eval": _cmd_eval,
}


def _write_manifest(command: str, ns, outputs: list[Path], partial: bool) -> None:
    if not outputs:
        return
    args = {
        k: v for k, v in vars(ns).items() if k not in ("command", "topics_command")
    }
    canonical = json.dumps({"command": command, "args": args}, sort_keys=True)
    manifest = {
        "tool": "tableqa",
        "version": __version__,
        "command": command,
        "args": args,
        "seed": args.get("seed"),
        "config_hash": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        "outputs": {str(p): _sha256(p) for p in outputs},
        "partial": partial,
    }
    path = Path(str(outputs[0]) + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _cmd_replay(ns) -> int:
    manifest = json.loads(Path(ns.manifest).read_text(encoding="utf-8"))
    command = manifest["command"]
    if command not in _HANDLERS:
        raise MalformedInput(f"manifest names unknown command {command!r}")
    replay_ns = argparse.Namespace(**manifest["args"])
    outputs, partial = _HANDLERS[command](replay_ns)
    _write_manifest(command, replay_ns, outputs, partial)
    if ns.check:
        for path, digest in manifest["outputs"].items():
            actual = _sha256(Path(path))
            if actual != digest:
                raise MalformedInput(
                    f"replay mismatch for {path}: {actual} != {digest}"
                )
        print(json.dumps({"replayed": command, "outputs_match": True}))
    return EXIT_BUDGET if partial else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tableqa", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="tables (CSV/TSV/JSONL) -> tables JSONL")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--format", choices=("auto", "csv", "tsv", "jsonl"), default="auto")
    p.add_argument("--output", required=True)

    p = sub.add_parser("sample", help="generate validated SQL from tables")
    p.add_argument("--tables", required=True)
    p.add_argument("--per-table", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON sampler config")
    p.add_argument("--priors", help="query JSONL to estimate distributions from")
    p.add_argument("--max-attempts", type=int, default=100)
    p.add_argument("--output", required=True)

    p = sub.add_parser("serialize", help="queries -> generator input lines")
    p.add_argument("--queries", required=True)
    p.add_argument("--tables", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("transcribe", help="queries -> questions (templates or external)")
    p.add_argument("--queries", required=True)
    p.add_argument("--tables", required=True)
    p.add_argument("--external", help="shell command implementing the line contract")
    p.add_argument("--questions", help="pre-generated questions, one per line")
    p.add_argument("--output", required=True)

    p = sub.add_parser("score", help="perplexity sidecar for question records")
    p.add_argument("--records", required=True)
    p.add_argument("--corpus", help="training questions, one per line")
    p.add_argument("--order", type=int, default=3, choices=(2, 3))
    p.add_argument("--smoothing-k", type=float, default=0.1)
    p.add_argument("--external", help="shell command implementing the line contract")
    p.add_argument("--output", required=True)

    p = sub.add_parser("filter", help="drop highest-perplexity records")
    p.add_argument("--records", required=True)
    p.add_argument("--scores", help="sidecar from `score`")
    p.add_argument("--corpus", help="train an n-gram scorer on the fly")
    p.add_argument("--order", type=int, default=3, choices=(2, 3))
    p.add_argument("--smoothing-k", type=float, default=0.1)
    p.add_argument("--keep", type=float, default=0.9)
    p.add_argument("--output", required=True)

    p = sub.add_parser("rerank-train", help="fit the candidate classifier")
    p.add_argument("--log", required=True)
    p.add_argument("--tables", required=True)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--model-out", required=True)

    p = sub.add_parser("rerank-apply", help="pick the top candidate per question")
    p.add_argument("--log", required=True)
    p.add_argument("--tables", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True)

    topics = sub.add_parser("topics", help="category-graph benchmark tooling")
    tsub = topics.add_subparsers(dest="topics_command", required=True, parser_class=_Parser)

    p = tsub.add_parser("assign", help="nearest main topics per article")
    p.add_argument("--edges", required=True, help="child<TAB>parent TSV")
    p.add_argument("--main-topics", required=True)
    p.add_argument("--articles", required=True)
    p.add_argument("--top", type=int, default=1)
    p.add_argument("--output", required=True)

    p = tsub.add_parser("jaccard", help="pairwise topic similarity matrix")
    p.add_argument("--assignments", required=True)
    p.add_argument("--output", required=True)

    p = tsub.add_parser("vocab", help="frequent topic words missing from a base vocab")
    p.add_argument("--corpus", required=True)
    p.add_argument("--base-vocab")
    p.add_argument("--min-freq", type=int, default=15)
    p.add_argument("--max-terms", type=int, default=1000)
    p.add_argument("--output", required=True)

    p = tsub.add_parser("overlap", help="cross-topic vocabulary overlap matrix")
    p.add_argument("--questions", nargs="+", required=True, metavar="TOPIC=PATH")
    p.add_argument("--top-k", type=int, default=100)
    p.add_argument("--output", required=True)

    p = tsub.add_parser("split", help="leave-one-out topic split id lists")
    p.add_argument("--instances", required=True, help="id<TAB>group<TAB>fold TSV")
    p.add_argument("--target", required=True)
    p.add_argument("--output-dir", required=True)

    p = sub.add_parser("eval", help="answer accuracy with analysis slices")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--tables")
    p.add_argument("--report-json")

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--check", action="store_true", help="verify output digests")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = ns.command
    if command == "topics":
        command = f"topics {ns.topics_command}"
    try:
        if command == "replay":
            return _cmd_replay(ns)
        outputs, partial = _HANDLERS[command](ns)
        _write_manifest(command, ns, outputs, partial)
        return EXIT_BUDGET if partial else EXIT_OK
    except TableQAError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_DATA
    except (OSError, ValueError, KeyError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
