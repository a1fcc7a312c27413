"""Shared text tokenization.

One deterministic tokenizer is used everywhere text is split into tokens:
document chunking, lexical indexing, query expansion, and every n-gram or
token-level evaluation metric. Keeping a single tokenizer means corpus
statistics, chunk spans, and metric counts never drift apart.
"""
from __future__ import annotations

import re

# Lowercased alphanumeric runs. Hyphens and dots are kept *inside* a token
# only when they join digit groups, so identifiers like "800-61", "t1498.001"
# or "4.7" survive as single tokens while "cross-encoder" splits normally.
_TOKEN_RE = re.compile(r"[a-z]*\d+(?:[-.]\d+)+|[a-z0-9]+")

# Sentence-final punctuation used to locate sentence starts for chunk
# boundary snapping.
_SENTENCE_END_RE = re.compile(r"[.!?]")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase word tokens."""
    return _TOKEN_RE.findall(text.lower())


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Tokenize, returning (token, char_start, char_end) triples."""
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text.lower())]


def sentence_start_indices(text: str) -> set[int]:
    """Token indices that begin a sentence.

    Token 0 always starts a sentence; otherwise a token starts one when the
    raw text between it and the previous token contains sentence-final
    punctuation or a blank line.
    """
    spans = tokenize_with_offsets(text)
    starts: set[int] = set()
    prev_end = 0
    for i, (_, begin, end) in enumerate(spans):
        gap = text[prev_end:begin]
        if i == 0 or _SENTENCE_END_RE.search(gap) or "\n\n" in gap:
            starts.add(i)
        prev_end = end
    return starts
