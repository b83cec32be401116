"""Tiny text-normalization helpers used by several modules."""

from __future__ import annotations

import string

_PUNCT = string.punctuation


def norm_text(s: str) -> str:
    """Lowercase and collapse runs of whitespace; used for cell equality."""
    return " ".join(s.split()).lower()


def simple_tokens(s: str) -> list[str]:
    """Lowercased whitespace tokens (language-model tokenizer)."""
    return s.lower().split()


def clean_tokens(s: str) -> list[str]:
    """Lowercased tokens with leading/trailing punctuation stripped.

    Interior punctuation is kept so values like "2:1" or "20,066" survive
    as single tokens.
    """
    out = []
    for tok in s.lower().split():
        tok = tok.strip(_PUNCT)
        if tok:
            out.append(tok)
    return out
