"""Independent brute-force query semantics for cross-checking the executor.

Everything here is re-derived from the documented behavior with its own
parsing, matching, and comparison code — none of the package's execution
path is reused, so agreement between the two is a real check.

For speed the row sets are represented as Python int bitmasks (bit i set =
row i matched), which keeps subset enumeration cheap without numpy.
"""

from __future__ import annotations

import itertools
import math
import re

_NUM = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)")


def brute_parse_number(cell: str):
    s = cell.strip().replace(",", "")
    if s and _NUM.fullmatch(s):
        return float(s)
    return None


def brute_norm(s: str) -> str:
    return " ".join(s.split()).lower()


def brute_column_is_numeric(cells) -> bool:
    non_empty = [c for c in cells if c.strip()]
    if not non_empty:
        return False
    return all(brute_parse_number(c) is not None for c in non_empty)


def clause_bits(headers, rows, col: int, op: str, value: str) -> int:
    """Bitmask of rows satisfied by one clause, recomputed from raw cells."""
    numeric = brute_column_is_numeric([r[col] for r in rows])
    bits = 0
    if numeric:
        v = brute_parse_number(value)
        for i, row in enumerate(rows):
            c = brute_parse_number(row[col])
            if op == "=":
                if v is None:
                    hit = brute_norm(row[col]) == brute_norm(value)
                else:
                    hit = c is not None and c == v
            elif v is None or c is None:
                hit = False
            elif op == ">":
                hit = c > v
            else:
                hit = c < v
            if hit:
                bits |= 1 << i
    else:
        target = brute_norm(value)
        for i, row in enumerate(rows):
            if op == "=" and brute_norm(row[col]) == target:
                bits |= 1 << i
    return bits


def _bit_rows(bits: int, n_rows: int):
    return [i for i in range(n_rows) if bits >> i & 1]


def brute_answer(ret: str, select_col: int, rows, bits: int):
    """("cells", [...]) or ("scalar", x); raises ValueError on empty agg."""
    matched = _bit_rows(bits, len(rows))
    if ret == "select":
        return ("cells", [rows[i][select_col] for i in matched])
    if ret == "count":
        return ("scalar", float(len(matched)))
    vals = []
    for i in matched:
        v = brute_parse_number(rows[i][select_col])
        if v is not None:
            vals.append(v)
    if ret == "sum":
        return ("scalar", math.fsum(vals))
    if not vals:
        raise ValueError("empty aggregate")
    if ret == "avg":
        return ("scalar", math.fsum(vals) / len(vals))
    if ret == "max":
        return ("scalar", max(vals))
    if ret == "min":
        return ("scalar", min(vals))
    raise ValueError(f"unknown return type {ret}")


def brute_answers_same(a, b) -> bool:
    if a[0] != b[0]:
        return False
    if a[0] == "cells":
        if len(a[1]) != len(b[1]):
            return False
        return all(brute_norm(x) == brute_norm(y) for x, y in zip(a[1], b[1]))
    return math.isclose(a[1], b[1], rel_tol=1e-9)


def brute_minimal(ret: str, select_col: int, where, headers, rows) -> bool:
    """Exhaustive proper-subset enumeration, empty subset included.

    ``where`` is a list of (col, op-symbol, value) triples.
    """
    masks = [clause_bits(headers, rows, c, o, v) for c, o, v in where]
    full = (1 << len(rows)) - 1
    bits = full
    for m in masks:
        bits &= m
    reference = brute_answer(ret, select_col, rows, bits)
    for size in range(len(where)):
        for subset in itertools.combinations(range(len(where)), size):
            sub = full
            for i in subset:
                sub &= masks[i]
            try:
                candidate = brute_answer(ret, select_col, rows, sub)
            except ValueError:
                continue  # an erroring subset cannot reproduce the answer
            if brute_answers_same(candidate, reference):
                return False
    return True


def brute_aggregate_ok(ret: str, where, headers, rows) -> bool:
    """>= 2 matched rows for the four numeric aggregates."""
    if ret not in ("sum", "avg", "max", "min"):
        return True
    bits = (1 << len(rows)) - 1
    for c, o, v in where:
        bits &= clause_bits(headers, rows, c, o, v)
    return bin(bits).count("1") >= 2
