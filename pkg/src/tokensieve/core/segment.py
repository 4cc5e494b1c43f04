"""Sentence/paragraph segmentation and fixed-size fragmenting.

Sentence boundaries fall after a terminal punctuation token (. ! ? and the
CJK fullwidth forms) that is followed by whitespace or end of text.  Because
the tokenizer skips nothing but whitespace, "followed by whitespace" is simply
"the gap to the next token is non-empty".  A blank-line paragraph separator
also ends the running sentence, so sentences always nest inside paragraphs.
Trailing unterminated text forms a final sentence.

Paragraph boundaries fall at blank-line separators (a gap whose bytes contain
two consecutive newlines).  Tables and other block structure are treated as
ordinary paragraph text.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SentenceTooLong
from .spans import Span
from .tokenizer import TokenSeq

TERMINAL_PUNCTUATION = frozenset({".", "!", "?", "。", "！", "？"})

_BLANK_LINE = b"\n\n"


@dataclass(frozen=True)
class SegmentMap:
    """Sentence and paragraph partitions of one token sequence.

    Both levels partition [0, len); every sentence lies inside exactly one
    paragraph.
    """

    sentence_bounds: tuple[Span, ...]
    paragraph_bounds: tuple[Span, ...]

    def sentences_intersecting(self, span: Span) -> list[Span]:
        return [s for s in self.sentence_bounds if s.intersects(span)]

    def paragraphs_intersecting(self, span: Span) -> list[Span]:
        return [p for p in self.paragraph_bounds if p.intersects(span)]


def _gap_bytes(seq: TokenSeq, i: int) -> bytes:
    """Source bytes between token i and token i+1 (skipped whitespace)."""
    return seq.source_bytes[seq.tokens[i].byte_span[1] : seq.tokens[i + 1].byte_span[0]]


def _paragraph_break_after(seq: TokenSeq, i: int) -> bool:
    return i + 1 < len(seq) and _BLANK_LINE in _gap_bytes(seq, i)


def split_sentences(seq: TokenSeq) -> list[Span]:
    """Sentence spans partitioning the sequence."""
    if len(seq) == 0:
        raise ValueError("cannot segment an empty token sequence")
    bounds: list[Span] = []
    start = 0
    n = len(seq)
    for i, tok in enumerate(seq.tokens):
        last = i == n - 1
        terminal = tok.text in TERMINAL_PUNCTUATION and (last or len(_gap_bytes(seq, i)) > 0)
        if last or terminal or _paragraph_break_after(seq, i):
            bounds.append(Span(start, i + 1))
            start = i + 1
    return bounds


def split_paragraphs(seq: TokenSeq) -> list[Span]:
    """Paragraph spans partitioning the sequence."""
    if len(seq) == 0:
        raise ValueError("cannot segment an empty token sequence")
    bounds: list[Span] = []
    start = 0
    n = len(seq)
    for i in range(n):
        if i == n - 1 or _paragraph_break_after(seq, i):
            bounds.append(Span(start, i + 1))
            start = i + 1
    return bounds


def segment(seq: TokenSeq) -> SegmentMap:
    return SegmentMap(tuple(split_sentences(seq)), tuple(split_paragraphs(seq)))


def fragment_fixed(seq: TokenSeq, fragment_len: int) -> list[Span]:
    """Cut the sequence into spans of at most `fragment_len` whole sentences.

    Nominal fragment k covers token indices [k*fragment_len, (k+1)*fragment_len).
    A sentence wholly inside a nominal fragment belongs to it; a sentence
    straddling a boundary is pruned from both sides, so every returned span is
    a union of whole sentences.  Raises SentenceTooLong if any single sentence
    exceeds `fragment_len` (it could never fit a fragment).
    """
    if fragment_len < 1:
        raise ValueError("fragment_len must be >= 1")
    sentences = split_sentences(seq)
    for s in sentences:
        if len(s) > fragment_len:
            raise SentenceTooLong(
                f"sentence [{s.start}, {s.end}) has {len(s)} tokens > fragment_len {fragment_len}"
            )
    fragments: list[Span] = []
    cur_start: int | None = None
    cur_end = 0
    cur_frag = -1
    for s in sentences:
        frag_of_start = s.start // fragment_len
        frag_of_last = (s.end - 1) // fragment_len
        if frag_of_start != frag_of_last:
            continue  # straddles a nominal boundary: pruned from both fragments
        if frag_of_start != cur_frag:
            if cur_start is not None:
                fragments.append(Span(cur_start, cur_end))
            cur_frag = frag_of_start
            cur_start = s.start
        cur_end = s.end
    if cur_start is not None:
        fragments.append(Span(cur_start, cur_end))
    return fragments
