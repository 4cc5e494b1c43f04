"""Turning scorer outputs into an optimized context subset.

Two selection modes: tag decoding (argmax boundary tags -> repaired spans) and
a top-score token budget (keep-score = 1 - P(tag O), take the highest-scoring
`budget` tokens, ties to the lower position).  Decoded spans can then be
widened to sentence or paragraph granularity before the final subset is built.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core.assemble import Granularity
from .core.segment import SegmentMap
from .core.spans import OptimizedContext, Span
from .core.tokenizer import TokenSeq
from .errors import OverlappingSpans
from .scorer.loss import Tag
from .scorer.model import HeadOutputs


class SelectionMode(enum.Enum):
    TAG_DECODE = "tag"
    TOP_SCORE_BUDGET = "budget"


@dataclass(frozen=True)
class SelectionPolicy:
    mode: SelectionMode = SelectionMode.TAG_DECODE
    granularity: Granularity = Granularity.KEYWORD
    budget_tokens: int | None = None

    def __post_init__(self) -> None:
        if self.mode is SelectionMode.TOP_SCORE_BUDGET:
            if self.budget_tokens is None or self.budget_tokens < 1:
                raise ValueError("budget mode needs budget_tokens >= 1")


@dataclass(frozen=True)
class GoldFacts:
    """Reference spans (token indices into the long context) and optional answer."""

    spans: tuple[Span, ...]
    answer: str | None = None


# ---------------------------------------------------------------------------
# tag codec
# ---------------------------------------------------------------------------


def encode_spans(n: int, spans: Sequence[Span]) -> np.ndarray:
    """Tags for disjoint spans: B at span start, E at a multi-token span's last
    token, I between; everything else O.  A single-token span is B alone."""
    tags = np.full(n, int(Tag.O), dtype=np.int64)
    for span in sorted(spans):
        if span.end > n:
            raise ValueError(f"span {span} exceeds sequence length {n}")
        tags[span.start] = int(Tag.B)
        if len(span) > 1:
            tags[span.start + 1 : span.end - 1] = int(Tag.I)
            tags[span.end - 1] = int(Tag.E)
    return tags


def spans_from_tags(tags: Sequence[int] | np.ndarray) -> list[Span]:
    """Greedy span recovery with repair.

    B opens a span (closing any open one at the previous token); I extends an
    open span, and a stray I opens one; E closes the open span at the current
    token, and a stray E yields a single-token span; O closes any open span at
    the previous token.  An open span at the end closes at the last token.
    The result is always sorted and disjoint.
    """
    spans: list[Span] = []
    start: int | None = None
    for i, raw in enumerate(tags):
        t = int(raw)
        if t == int(Tag.B):
            if start is not None:
                spans.append(Span(start, i))
            start = i
        elif t == int(Tag.I):
            if start is None:
                start = i  # stray I: treat as B
        elif t == int(Tag.E):
            if start is None:
                start = i  # stray E: single-token span
            spans.append(Span(start, i + 1))
            start = None
        else:  # O
            if start is not None:
                spans.append(Span(start, i))
                start = None
    if start is not None:
        spans.append(Span(start, len(tags)))
    return spans


def decode_tags(outputs: HeadOutputs) -> list[Span]:
    """Argmax boundary tags for one window, repaired into spans."""
    tags = np.argmax(outputs.boundary_logits, axis=-1)
    return spans_from_tags(tags)


# ---------------------------------------------------------------------------
# scoring and budgets
# ---------------------------------------------------------------------------


def keep_scores_from_logits(boundary_logits: np.ndarray) -> np.ndarray:
    """Per-token keep-score: 1 - softmax(boundary logits)[O]."""
    m = boundary_logits.max(axis=-1, keepdims=True)
    e = np.exp(boundary_logits - m)
    return 1.0 - e[:, int(Tag.O)] / e.sum(axis=-1)


def keep_scores(outputs: HeadOutputs) -> np.ndarray:
    """Per-token keep-score: 1 - softmax(boundary logits)[O]."""
    return keep_scores_from_logits(outputs.boundary_logits)


def top_score_budget(scores: np.ndarray, budget_tokens: int) -> np.ndarray:
    """Boolean keep mask for the `budget_tokens` highest scores (ties: lower position)."""
    if budget_tokens < 1:
        raise ValueError("budget_tokens must be >= 1")
    n = scores.shape[0]
    keep = np.zeros(n, dtype=bool)
    if n == 0:
        return keep
    order = np.argsort(-scores, kind="stable")  # stable: equal scores keep position order
    keep[order[: min(budget_tokens, n)]] = True
    return keep


def spans_from_mask(keep: np.ndarray) -> list[Span]:
    """Contiguous runs of True as spans."""
    spans: list[Span] = []
    start: int | None = None
    for i, flag in enumerate(keep):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            spans.append(Span(start, i))
            start = None
    if start is not None:
        spans.append(Span(start, len(keep)))
    return spans


# ---------------------------------------------------------------------------
# granularity merge and subset construction
# ---------------------------------------------------------------------------


def coalesce_spans(spans: Iterable[Span]) -> list[Span]:
    """Sort and merge overlapping or adjacent spans."""
    merged: list[Span] = []
    for span in sorted(spans):
        if merged and span.start <= merged[-1].end:
            if span.end > merged[-1].end:
                merged[-1] = Span(merged[-1].start, span.end)
        else:
            merged.append(span)
    return merged


def merge_granularity(spans: Sequence[Span], segmap: SegmentMap, granularity: Granularity) -> list[Span]:
    """Widen spans to whole sentences/paragraphs (keyword: unchanged), then coalesce."""
    if granularity is Granularity.KEYWORD:
        return coalesce_spans(spans)
    bounds = (
        segmap.sentence_bounds if granularity is Granularity.SENTENCE else segmap.paragraph_bounds
    )
    widened: list[Span] = []
    for span in spans:
        hits = [b for b in bounds if b.intersects(span)]
        if hits:
            widened.append(Span(hits[0].start, hits[-1].end))
    return coalesce_spans(widened)


def build_optimized_context(spans: Sequence[Span], source: TokenSeq) -> OptimizedContext:
    """Assemble the subset; rejects overlapping or unsorted spans."""
    prev_end = -1
    total = 0
    for span in spans:
        if span.start < prev_end:
            raise OverlappingSpans(f"span {span} overlaps or precedes a prior span")
        if span.end > len(source):
            raise OverlappingSpans(f"span {span} exceeds source length {len(source)}")
        prev_end = span.end
        total += len(span)
    return OptimizedContext(spans=tuple(spans), token_count=total, source=source)


def coverage(subset: OptimizedContext, gold: GoldFacts) -> float:
    """Fraction of gold tokens covered by the subset (1.0 when gold is empty)."""
    gold_total = sum(len(g) for g in gold.spans)
    if gold_total == 0:
        return 1.0
    covered = 0
    for g in gold.spans:
        for s in subset.spans:
            lo = max(g.start, s.start)
            hi = min(g.end, s.end)
            if hi > lo:
                covered += hi - lo
    return covered / gold_total


def coverage_objective(subset: OptimizedContext, gold: GoldFacts, beta: float = 0.5) -> float:
    """Selection quality: coverage / max(1, token_count) ** beta.

    Coverage rewards keeping the query-relevant tokens; the denominator charges
    for subset size, with beta trading the two off (default 0.5).
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return coverage(subset, gold) / max(1, subset.token_count) ** beta


# ---------------------------------------------------------------------------
# rendering and records
# ---------------------------------------------------------------------------


def render_optimized(subset: OptimizedContext) -> str:
    """Source substrings of the kept runs: adjacent spans render as one
    contiguous slice (original whitespace intact); a single newline separates
    runs with dropped tokens between them."""
    runs = coalesce_spans(subset.spans)
    return "\n".join(subset.source.covered_text(r.start, r.end) for r in runs)


def optimized_to_record(subset: OptimizedContext) -> dict:
    return {
        "token_count": subset.token_count,
        "spans": [
            {"start": s.start, "end": s.end, "text": subset.source.covered_text(s.start, s.end)}
            for s in subset.spans
        ],
    }


def record_to_spans(record: dict) -> tuple[list[Span], int]:
    spans = [Span(int(r["start"]), int(r["end"])) for r in record["spans"]]
    return spans, int(record["token_count"])


def optimized_to_json(subset: OptimizedContext) -> str:
    return json.dumps(optimized_to_record(subset), ensure_ascii=False)
