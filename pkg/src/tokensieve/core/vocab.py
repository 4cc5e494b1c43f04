"""Corpus-derived vocabulary with reserved marker entries."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

UNKNOWN_ID = 0
UNKNOWN_TOKEN = "<unk>"
SYS_MARKER = "<sys>"
QRY_MARKER = "<qry>"
CTX_MARKER = "<ctx>"

# The tokenizer can never emit these surfaces ("<" is always a lone token),
# so reserved entries cannot collide with corpus tokens.
RESERVED_TOKENS = (UNKNOWN_TOKEN, SYS_MARKER, QRY_MARKER, CTX_MARKER)


class Vocabulary:
    """token text <-> integer id; id 0 is the unknown token."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[: len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ValueError("vocabulary must start with the reserved entries")
        self._tokens = list(tokens)
        self._ids = {t: i for i, t in enumerate(self._tokens)}
        if len(self._ids) != len(self._tokens):
            raise ValueError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self._tokens)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._tokens)

    def __contains__(self, token_text: str) -> bool:
        return token_text in self._ids

    def id_of(self, token_text: str) -> int:
        return self._ids.get(token_text, UNKNOWN_ID)

    def text_of(self, token_id: int) -> str:
        return self._tokens[token_id]

    @classmethod
    def build(cls, texts: Iterable[str], min_count: int = 1) -> "Vocabulary":
        """Count regex tokens over texts; order by frequency desc, then text.

        min_count=1 keeps every observed token.
        """
        from .tokenizer import split_words

        counts: Counter[str] = Counter()
        for text in texts:
            counts.update(split_words(text))
        kept = sorted(
            (t for t, c in counts.items() if c >= min_count),
            key=lambda t: (-counts[t], t),
        )
        return cls(list(RESERVED_TOKENS) + kept)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self._tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(lines)
