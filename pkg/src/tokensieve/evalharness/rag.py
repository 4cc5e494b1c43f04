"""Retrieval baseline: fixed-size chunks ranked by TF-cosine similarity.

Used for equal-budget comparisons against the token-level scorer: both
methods emit an OptimizedContext over the same source sequence, so coverage
and token accounting are directly comparable.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import sqrt

import numpy as np

from ..core.spans import OptimizedContext, Span
from ..core.tokenizer import TokenSeq, split_words
from ..selection import build_optimized_context


@dataclass(frozen=True)
class RagConfig:
    chunk_tokens: int = 600
    budget_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.chunk_tokens < 16:
            raise ValueError("chunk_tokens must be >= 16")
        if self.budget_tokens < 1:
            raise ValueError("budget_tokens must be >= 1")


def chunk_spans(length: int, chunk_tokens: int) -> tuple[Span, ...]:
    """Contiguous non-overlapping chunks; the last may be short."""
    return tuple(
        Span(start, min(start + chunk_tokens, length)) for start in range(0, length, chunk_tokens)
    )


def _tf_vector(words: list[str]) -> Counter:
    return Counter(w.lower() for w in words)


def tf_cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    dot = sum(count * b[word] for word, count in a.items())
    if dot == 0:
        return 0.0
    norm_a = sqrt(sum(c * c for c in a.values()))
    norm_b = sqrt(sum(c * c for c in b.values()))
    return dot / (norm_a * norm_b)


def rank_chunks(context: TokenSeq, query_text: str, chunk_tokens: int) -> tuple[tuple[Span, ...], np.ndarray]:
    """Chunks plus their retrieval order (descending similarity, ties to the lower index)."""
    chunks = chunk_spans(len(context), chunk_tokens)
    query_vec = _tf_vector(split_words(query_text))
    texts = context.texts()
    scores = np.array(
        [tf_cosine(query_vec, _tf_vector(texts[c.start : c.end])) for c in chunks],
        dtype=np.float64,
    )
    order = np.argsort(-scores, kind="stable")
    return chunks, order


def rag_select(context: TokenSeq, query_text: str, config: RagConfig) -> OptimizedContext:
    """Top-ranked chunks until the next one would overflow the token budget."""
    chunks, order = rank_chunks(context, query_text, config.chunk_tokens)
    kept: list[Span] = []
    total = 0
    for idx in order:
        chunk = chunks[int(idx)]
        if total + len(chunk) > config.budget_tokens:
            break
        kept.append(chunk)
        total += len(chunk)
    kept.sort()
    return build_optimized_context(tuple(kept), context)
