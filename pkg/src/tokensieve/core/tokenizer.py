"""Deterministic regex tokenization with byte-accurate source spans.

Rule: a token is either a run of ASCII letters/digits or a single
non-alphanumeric, non-whitespace character; whitespace is skipped.  Ids come
from a `Vocabulary` (unknown -> 0).  Byte spans are half-open [start, end)
offsets into the UTF-8 encoding of the source string, so every token round-trips
byte-identically to the substring it covers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .vocab import Vocabulary

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+|[^A-Za-z0-9\s]")


def split_words(text: str) -> list[str]:
    """Token surfaces of `text` without ids or spans."""
    return _TOKEN_RE.findall(text)


def count_tokens(text: str) -> int:
    """Number of tokens `tokenize` would produce (no vocabulary needed)."""
    return sum(1 for _ in _TOKEN_RE.finditer(text))


@dataclass(frozen=True)
class Token:
    id: int
    text: str
    byte_span: tuple[int, int]
    pos: int


@dataclass(frozen=True)
class TokenSeq:
    """An immutable token sequence over one source string.

    Positions run 0..len-1 with no gaps; byte spans are non-overlapping and
    strictly increasing into the source's UTF-8 bytes.  A sequence sliced out
    of a document keeps the full document as `source` (byte spans stay
    absolute) while positions are rebased to 0.
    """

    tokens: tuple[Token, ...]
    source: str
    _source_bytes: bytes = field(repr=False, compare=False, default=b"")

    def __post_init__(self) -> None:
        if not self._source_bytes:
            object.__setattr__(self, "_source_bytes", self.source.encode("utf-8"))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]

    @property
    def source_bytes(self) -> bytes:
        return self._source_bytes

    def ids(self) -> np.ndarray:
        return np.array([t.id for t in self.tokens], dtype=np.int64)

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def covered_bytes(self, start: int, end: int) -> bytes:
        """Source bytes from token `start`'s first byte to token `end-1`'s last."""
        if start >= end:
            return b""
        return self._source_bytes[self.tokens[start].byte_span[0] : self.tokens[end - 1].byte_span[1]]

    def covered_text(self, start: int, end: int) -> str:
        return self.covered_bytes(start, end).decode("utf-8")

    def slice(self, start: int, end: int) -> "TokenSeq":
        """Sub-sequence with positions rebased to 0; source and byte spans kept."""
        sub = tuple(
            Token(id=t.id, text=t.text, byte_span=t.byte_span, pos=i)
            for i, t in enumerate(self.tokens[start:end])
        )
        return TokenSeq(sub, self.source, self._source_bytes)


def _char_to_byte_offsets(text: str) -> np.ndarray:
    """offsets[i] = byte offset of char i; offsets[len] = total bytes."""
    if text.isascii():
        return np.arange(len(text) + 1, dtype=np.int64)
    lengths = np.fromiter((len(c.encode("utf-8")) for c in text), dtype=np.int64, count=len(text))
    offsets = np.zeros(len(text) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    return offsets


@dataclass(frozen=True)
class Tokenizer:
    vocab: Vocabulary

    def tokenize(self, text: str) -> TokenSeq:
        offsets = _char_to_byte_offsets(text)
        toks = []
        for pos, m in enumerate(_TOKEN_RE.finditer(text)):
            surface = m.group(0)
            toks.append(
                Token(
                    id=self.vocab.id_of(surface),
                    text=surface,
                    byte_span=(int(offsets[m.start()]), int(offsets[m.end()])),
                    pos=pos,
                )
            )
        return TokenSeq(tuple(toks), text)

    def detokenize(self, seq: TokenSeq) -> str:
        """Concatenation of the token-covered substrings (skipped whitespace is not restored)."""
        return "".join(t.text for t in seq.tokens)


def verify_token_seq(seq: TokenSeq) -> None:
    """Raise AssertionError if `seq` violates the sequence invariants."""
    prev_end = -1
    src = seq.source_bytes
    for i, t in enumerate(seq.tokens):
        assert t.pos == i, f"position gap at {i}"
        s, e = t.byte_span
        assert prev_end <= s < e <= len(src), f"byte span disorder at {i}"
        assert src[s:e].decode("utf-8") == t.text, f"span/text mismatch at {i}"
        prev_end = e
