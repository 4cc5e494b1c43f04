"""Scorer architecture configuration."""

from __future__ import annotations

from dataclasses import dataclass

TAG_SET_SIZE = 4  # O, B, I, E


@dataclass(frozen=True)
class ScorerConfig:
    """Toy-scale hybrid-attention transformer hyperparameters.

    The lower `n_causal` layers use a causal mask; the remaining layers are
    fully bidirectional (same 3:1 causal-to-bidirectional split as the
    full-scale system, mirrored at 4 layers).
    """

    vocab_size: int
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 4
    n_causal: int = 3
    d_ff: int = 256
    max_seq: int = 512
    tag_set_size: int = TAG_SET_SIZE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.vocab_size < len(("<unk>", "<sys>", "<qry>", "<ctx>")):
            raise ValueError("vocab_size must cover the reserved entries")
        if not (1 <= self.n_causal < self.n_layers):
            raise ValueError("need 1 <= n_causal < n_layers")
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.d_model % 2 != 0:
            raise ValueError("d_model must be even (sinusoidal position pairs)")
        if self.tag_set_size != TAG_SET_SIZE:
            raise ValueError("the boundary head is fixed to the 4-tag scheme")
        if self.max_seq < 8:
            raise ValueError("max_seq must be >= 8")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads
