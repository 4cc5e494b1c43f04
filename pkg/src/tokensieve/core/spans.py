"""Span and optimized-context containers shared across the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .tokenizer import TokenSeq


@dataclass(frozen=True, order=True)
class Span:
    """Half-open token-index interval [start, end)."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def intersects(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class OptimizedContext:
    """A selected subset of a long context: disjoint sorted spans over its tokens."""

    spans: tuple[Span, ...]
    token_count: int
    source: "TokenSeq"

    def is_empty(self) -> bool:
        return self.token_count == 0
