"""Gradient-boosted reranking of candidate logical forms.

Each candidate query for a question is described by 12 features (six
entity-linking scores, the parser's probability, answer length in cells, and
four syntactic flags). A small binary gradient-boosted tree ensemble is
trained on correct/incorrect candidates and, at inference, the top-scoring
candidate of a set is kept.

The boosting implementation is deliberately self-contained: exact greedy
axis-aligned splits, logistic loss with Newton leaf values, no subsampling.
That keeps training deterministic for a fixed example order and lets models
serialize to a plain versioned JSON tree dump.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateLabels,
    EmptyCandidates,
    MalformedInput,
    TableQAError,
)
from .linking import entity_features
from .sql import (
    Answer,
    RetType,
    SqlQuery,
    answer_from_json,
    answer_to_json,
    execute,
    parse_sql,
    render_sql,
)
from .tables import Table

N_FEATURES = 12

FEATURE_NAMES = [
    "cell_match_count",
    "cell_ratio_sum",
    "cell_certainty_sum",
    "header_match_count",
    "header_ratio_sum",
    "header_certainty_sum",
    "model_prob",
    "answer_cell_count",
    "has_count",
    "has_select",
    "where_count",
    "repeated_columns",
]


@dataclass(frozen=True)
class FeatureVector:
    """The 12 reranking features for one (question, candidate) pair."""

    cell_match_count: float
    cell_ratio_sum: float
    cell_certainty_sum: float
    header_match_count: float
    header_ratio_sum: float
    header_certainty_sum: float
    model_prob: float
    answer_cell_count: float
    has_count: float
    has_select: float
    where_count: float
    repeated_columns: float
    degraded: bool = False  # candidate failed to execute; not a model input

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=float)


@dataclass(frozen=True)
class Candidate:
    """One predicted logical form with its parser probability."""

    q: SqlQuery
    model_prob: float
    predicted_answer: Answer | None = None
    features: FeatureVector | None = None
    label: int | None = None  # 1 correct, 0 incorrect


@dataclass(frozen=True)
class CandidateSet:
    qid: str
    table_id: str
    question: str
    candidates: tuple[Candidate, ...]


def featurize(question: str, t: Table, c: Candidate) -> FeatureVector:
    """Compute the feature vector; an execution failure yields answer length
    0 with the degraded flag set instead of discarding the candidate."""
    (cell_cnt, cell_ratio, cell_cert), (hdr_cnt, hdr_ratio, hdr_cert) = entity_features(
        question, t, c.q
    )
    degraded = False
    try:
        answer = execute(c.q, t)
        length = float(len(answer.cells)) if answer.cells is not None else 1.0
    except TableQAError:
        length = 0.0
        degraded = True
    used_cols = [c.q.select_col] + [cl.col for cl in c.q.where]
    return FeatureVector(
        cell_match_count=cell_cnt,
        cell_ratio_sum=cell_ratio,
        cell_certainty_sum=cell_cert,
        header_match_count=hdr_cnt,
        header_ratio_sum=hdr_ratio,
        header_certainty_sum=hdr_cert,
        model_prob=float(c.model_prob),
        answer_cell_count=length,
        has_count=1.0 if c.q.ret is RetType.COUNT else 0.0,
        has_select=1.0 if c.q.ret is RetType.SELECT else 0.0,
        where_count=float(len(c.q.where)),
        repeated_columns=1.0 if len(set(used_cols)) < len(used_cols) else 0.0,
        degraded=degraded,
    )


# --- boosted trees -------------------------------------------------------

_LEAF_CLIP = 10.0
_HESS_FLOOR = 1e-16
_L2 = 1e-6


@dataclass(frozen=True)
class TreeNode:
    feature: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _leaf_value(g_sum: float, h_sum: float) -> float:
    v = -g_sum / (h_sum + _L2)
    return float(np.clip(v, -_LEAF_CLIP, _LEAF_CLIP))


def _best_split(X: np.ndarray, g: np.ndarray, h: np.ndarray, idx: np.ndarray):
    """Exact greedy split; ties go to the lowest feature then lowest threshold."""
    g_sum, h_sum = g[idx].sum(), h[idx].sum()
    parent = g_sum * g_sum / (h_sum + _L2)
    best_gain, best = 1e-12, None
    for f in range(X.shape[1]):
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        xs, gs, hs = vals[order], g[idx][order], h[idx][order]
        boundaries = xs[:-1] < xs[1:]
        if not boundaries.any():
            continue
        gl, hl = np.cumsum(gs)[:-1], np.cumsum(hs)[:-1]
        gr, hr = g_sum - gl, h_sum - hl
        gains = gl**2 / (hl + _L2) + gr**2 / (hr + _L2) - parent
        gains[~boundaries] = -np.inf
        j = int(np.argmax(gains))
        if gains[j] > best_gain:
            best_gain = float(gains[j])
            best = (f, float((xs[j] + xs[j + 1]) / 2.0), order, j)
    return best


def _grow(X, g, h, idx, depth, max_depth) -> TreeNode:
    if depth >= max_depth or idx.size < 2:
        return TreeNode(value=_leaf_value(g[idx].sum(), h[idx].sum()))
    split = _best_split(X, g, h, idx)
    if split is None:
        return TreeNode(value=_leaf_value(g[idx].sum(), h[idx].sum()))
    f, threshold, order, j = split
    left_idx, right_idx = idx[order[: j + 1]], idx[order[j + 1 :]]
    return TreeNode(
        feature=f,
        threshold=threshold,
        left=_grow(X, g, h, left_idx, depth + 1, max_depth),
        right=_grow(X, g, h, right_idx, depth + 1, max_depth),
    )


def _tree_predict(node: TreeNode, X: np.ndarray, out: np.ndarray, idx: np.ndarray):
    if node.is_leaf:
        out[idx] = node.value
        return
    goes_left = X[idx, node.feature] <= node.threshold
    _tree_predict(node.left, X, out, idx[goes_left])
    _tree_predict(node.right, X, out, idx[~goes_left])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60, 60)))


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-15, 1 - 1e-15)
    return float(-(y * np.log(p) + (1 - y) * np.log(1 - p)).mean())


@dataclass(frozen=True)
class GbtModel:
    """Boosted regression trees over the 12 features, logistic link."""

    trees: tuple[TreeNode, ...]
    learning_rate: float
    base_score: float
    max_depth: int
    train_losses: tuple[float, ...] = field(default=())

    def decision_margin(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        margin = np.full(X.shape[0], self.base_score)
        buf = np.empty(X.shape[0])
        all_idx = np.arange(X.shape[0])
        for tree in self.trees:
            _tree_predict(tree, X, buf, all_idx)
            margin += self.learning_rate * buf
        return margin

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_margin(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)


def train(
    examples: Sequence[tuple[FeatureVector, int]],
    n_trees: int = 100,
    max_depth: int = 3,
    learning_rate: float = 0.1,
) -> GbtModel:
    """Fit the boosted classifier on labeled feature vectors.

    Deterministic for a fixed example order and hyperparameters. The
    per-round training loss is recorded on the model.
    """
    if not examples:
        raise DegenerateLabels("no training examples")
    X = np.stack([fv.to_array() for fv, _ in examples])
    y = np.array([int(label) for _, label in examples], dtype=float)
    pos, neg = y.sum(), len(y) - y.sum()
    if pos == 0 or neg == 0:
        raise DegenerateLabels("training data needs both labels")

    base = math.log(pos / neg)
    margin = np.full(len(y), base)
    all_idx = np.arange(len(y))
    trees, losses = [], []
    buf = np.empty(len(y))
    for _ in range(n_trees):
        p = _sigmoid(margin)
        g = p - y
        h = np.maximum(p * (1 - p), _HESS_FLOOR)
        tree = _grow(X, g, h, all_idx, 0, max_depth)
        _tree_predict(tree, X, buf, all_idx)
        margin = margin + learning_rate * buf
        trees.append(tree)
        losses.append(_log_loss(y, _sigmoid(margin)))
    return GbtModel(
        trees=tuple(trees),
        learning_rate=learning_rate,
        base_score=base,
        max_depth=max_depth,
        train_losses=tuple(losses),
    )


def score_candidates(
    question: str, t: Table, candidates: Sequence[Candidate], m: GbtModel
) -> list[float]:
    feats = [
        c.features if c.features is not None else featurize(question, t, c)
        for c in candidates
    ]
    X = np.stack([fv.to_array() for fv in feats])
    return [float(s) for s in m.predict_proba(X)]


def rerank(
    question: str, t: Table, candidates: Sequence[Candidate], m: GbtModel
) -> Candidate:
    """Return the classifier's top candidate; ties keep the earliest (the
    input is ordered by descending parser probability)."""
    if not candidates:
        raise EmptyCandidates("no candidates to rerank")
    if len(candidates) > 5:
        raise ValueError(f"reranking is defined for top-5, got {len(candidates)}")
    scores = score_candidates(question, t, candidates, m)
    best = 0
    for i in range(1, len(candidates)):
        if scores[i] > scores[best]:
            best = i
    return candidates[best]


# --- model serialization ---------------------------------------------------

MODEL_FORMAT_VERSION = 1


def _node_to_json(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"value": node.value}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_json(node.left),
        "right": _node_to_json(node.right),
    }


def _node_from_json(obj: dict) -> TreeNode:
    if "feature" not in obj:
        return TreeNode(value=float(obj["value"]))
    feature = int(obj["feature"])
    if not 0 <= feature < N_FEATURES:
        raise MalformedInput(f"split feature {feature} out of range")
    return TreeNode(
        feature=feature,
        threshold=float(obj["threshold"]),
        left=_node_from_json(obj["left"]),
        right=_node_from_json(obj["right"]),
    )


def model_to_json(m: GbtModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "learning_rate": m.learning_rate,
        "base_score": m.base_score,
        "max_depth": m.max_depth,
        "feature_names": FEATURE_NAMES,
        "train_losses": list(m.train_losses),
        "trees": [_node_to_json(t) for t in m.trees],
    }


def model_from_json(obj: dict) -> GbtModel:
    if obj.get("format_version") != MODEL_FORMAT_VERSION:
        raise MalformedInput(
            f"unsupported model format version {obj.get('format_version')!r}"
        )
    return GbtModel(
        trees=tuple(_node_from_json(t) for t in obj["trees"]),
        learning_rate=float(obj["learning_rate"]),
        base_score=float(obj["base_score"]),
        max_depth=int(obj["max_depth"]),
        train_losses=tuple(float(x) for x in obj.get("train_losses", ())),
    )


def save_model(m: GbtModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(m), fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> GbtModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


# --- candidate log wire format ----------------------------------------------

def candidate_set_to_json(s: CandidateSet, t: Table) -> dict:
    return {
        "qid": s.qid,
        "table_id": s.table_id,
        "question": s.question,
        "candidates": [
            {
                "sql": render_sql(c.q, t),
                "prob": c.model_prob,
                "answer": None
                if c.predicted_answer is None
                else answer_to_json(c.predicted_answer),
                "label": c.label,
            }
            for c in s.candidates
        ],
    }


def candidate_set_from_json(obj: dict, tables: dict[str, Table]) -> CandidateSet:
    try:
        table = tables[obj["table_id"]]
        raw = obj["candidates"]
    except KeyError as exc:
        raise MalformedInput(f"bad candidate set: missing {exc}") from exc
    candidates = []
    for c in raw:
        q = parse_sql(c["sql"], table)
        answer = None
        if c.get("answer") is not None:
            answer = answer_from_json(c["answer"])
        else:
            try:
                answer = execute(q, table)
            except TableQAError:
                answer = None
        label = c.get("label")
        candidates.append(
            Candidate(
                q=q,
                model_prob=float(c["prob"]),
                predicted_answer=answer,
                label=None if label is None else int(label),
            )
        )
    return CandidateSet(
        qid=str(obj["qid"]),
        table_id=str(obj["table_id"]),
        question=str(obj["question"]),
        candidates=tuple(candidates),
    )


def load_candidate_log(path, tables: dict[str, Table]) -> list[CandidateSet]:
    sets = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
            sets.append(candidate_set_from_json(obj, tables))
    return sets


def write_candidate_log(sets: Sequence[CandidateSet], tables: dict[str, Table], path):
    with open(path, "w", encoding="utf-8") as fh:
        for s in sets:
            fh.write(
                json.dumps(candidate_set_to_json(s, tables[s.table_id]), ensure_ascii=False)
                + "\n"
            )


def train_from_log(
    sets: Sequence[CandidateSet],
    tables: dict[str, Table],
    **hyperparams,
) -> GbtModel:
    """Featurize every labeled candidate in a log and fit the classifier."""
    examples = []
    for s in sets:
        table = tables[s.table_id]
        for c in s.candidates:
            if c.label is None:
                continue
            examples.append((featurize(s.question, table, c), c.label))
    return train(examples, **hyperparams)


def featurize_log(
    sets: Sequence[CandidateSet], tables: dict[str, Table]
) -> list[CandidateSet]:
    """Attach feature vectors to every candidate (idempotent)."""
    out = []
    for s in sets:
        table = tables[s.table_id]
        out.append(
            replace(
                s,
                candidates=tuple(
                    c if c.features is not None
                    else replace(c, features=featurize(s.question, table, c))
                    for c in s.candidates
                ),
            )
        )
    return out
