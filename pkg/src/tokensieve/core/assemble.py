"""Scorer input assembly: markers + control prompt + query + context window."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .tokenizer import Token, Tokenizer, TokenSeq
from .vocab import CTX_MARKER, QRY_MARKER, SYS_MARKER


class Granularity(enum.Enum):
    KEYWORD = "keyword"
    SENTENCE = "sentence"
    PARAGRAPH = "paragraph"


@dataclass(frozen=True)
class ControlPrompt:
    """Natural-language instruction steering what the scorer should keep."""

    text: str
    granularity: Granularity = Granularity.SENTENCE

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("control prompt text must be non-empty")


@dataclass(frozen=True)
class Query:
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("query text must be non-empty")


@dataclass(frozen=True)
class AssembledInput:
    """One scorer input: `<sys> prompt <qry> query <ctx> window`.

    Context tokens occupy assembled positions [context_start, context_start +
    context_len); assembled position context_start + i corresponds to window
    token i, a bijection that never reorders or rewrites the window.
    """

    seq: TokenSeq
    context_start: int
    context_len: int

    def context_position(self, window_index: int) -> int:
        return self.context_start + window_index


# Marker ids are the reserved vocabulary slots right after <unk>.
_MARKERS = (SYS_MARKER, QRY_MARKER, CTX_MARKER)


def assemble_input(
    prompt: ControlPrompt, query: Query, window: TokenSeq, tokenizer: Tokenizer
) -> AssembledInput:
    """Build the scorer input sequence for one context window.

    The assembled sequence has its own source string (markers and parts joined
    by single spaces); window tokens keep their ids, texts, and relative order,
    with byte spans re-based into the assembled source.
    """
    window_text = window.covered_text(0, len(window)) if len(window) else ""
    parts: list[tuple[str, object]] = [
        (SYS_MARKER, "marker"),
        (prompt.text, "text"),
        (QRY_MARKER, "marker"),
        (query.text, "text"),
        (CTX_MARKER, "marker"),
        (window_text, "window"),
    ]

    source_pieces: list[str] = []
    tokens: list[Token] = []
    byte_off = 0
    context_start = -1

    for piece, kind in parts:
        if source_pieces:
            source_pieces.append(" ")
            byte_off += 1
        source_pieces.append(piece)
        if kind == "marker":
            tok_id = tokenizer.vocab.id_of(piece)
            end = byte_off + len(piece.encode("utf-8"))
            tokens.append(Token(tok_id, piece, (byte_off, end), len(tokens)))
        elif kind == "text":
            for t in tokenizer.tokenize(piece):
                span = (t.byte_span[0] + byte_off, t.byte_span[1] + byte_off)
                tokens.append(Token(t.id, t.text, span, len(tokens)))
        else:  # window
            context_start = len(tokens)
            if len(window):
                base = window.tokens[0].byte_span[0]
                for t in window:
                    span = (t.byte_span[0] - base + byte_off, t.byte_span[1] - base + byte_off)
                    tokens.append(Token(t.id, t.text, span, len(tokens)))
        byte_off += len(piece.encode("utf-8"))

    seq = TokenSeq(tuple(tokens), "".join(source_pieces))
    return AssembledInput(seq=seq, context_start=context_start, context_len=len(window))
