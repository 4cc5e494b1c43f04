"""Text substrate: tokens, spans, segmentation, and scorer-input assembly."""

from .assemble import AssembledInput, ControlPrompt, Granularity, Query, assemble_input
from .segment import (
    SegmentMap,
    TERMINAL_PUNCTUATION,
    fragment_fixed,
    segment,
    split_paragraphs,
    split_sentences,
)
from .spans import OptimizedContext, Span
from .tokenizer import (
    Token,
    Tokenizer,
    TokenSeq,
    count_tokens,
    split_words,
    verify_token_seq,
)
from .vocab import (
    CTX_MARKER,
    QRY_MARKER,
    RESERVED_TOKENS,
    SYS_MARKER,
    UNKNOWN_ID,
    UNKNOWN_TOKEN,
    Vocabulary,
)

__all__ = [
    "AssembledInput",
    "ControlPrompt",
    "CTX_MARKER",
    "Granularity",
    "OptimizedContext",
    "QRY_MARKER",
    "Query",
    "RESERVED_TOKENS",
    "SegmentMap",
    "Span",
    "SYS_MARKER",
    "TERMINAL_PUNCTUATION",
    "Token",
    "Tokenizer",
    "TokenSeq",
    "UNKNOWN_ID",
    "UNKNOWN_TOKEN",
    "Vocabulary",
    "assemble_input",
    "count_tokens",
    "fragment_fixed",
    "segment",
    "split_paragraphs",
    "split_sentences",
    "split_words",
    "verify_token_seq",
]
