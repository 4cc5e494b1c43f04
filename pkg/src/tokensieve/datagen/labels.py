"""Per-token joint labels from gold spans."""

from __future__ import annotations

from typing import Sequence

from ..core.spans import Span
from ..core.tokenizer import TokenSeq
from ..scorer.loss import JointLabel, Tag
from ..selection import encode_spans


def keyword_labels(context: TokenSeq, gold_spans: Sequence[Span]) -> tuple[JointLabel, ...]:
    """B/I/E over each gold span (B alone for single-token spans), O elsewhere.

    The category label is always the token's own vocabulary id; the loss only
    weighs it where the tag is not O.
    """
    spans = sorted(gold_spans)
    for a, b in zip(spans, spans[1:]):
        if a.end > b.start:
            raise ValueError(f"gold spans overlap: {a} and {b}")
    tags = encode_spans(len(context), spans)
    return tuple(
        JointLabel(category=tok.id, tag=Tag(int(tag))) for tok, tag in zip(context.tokens, tags)
    )
