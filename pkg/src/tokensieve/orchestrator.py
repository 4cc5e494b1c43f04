"""Window-parallel scoring of long contexts and the end-to-end compress step.

A long context is cut into fixed-size non-overlapping windows; each window is
assembled with the same control prompt and query, scored independently against
shared read-only parameters (at most `parallelism` windows in flight), and the
per-token results are merged back by absolute position.  Results are
bit-identical for any parallelism because windows never interact.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core.assemble import ControlPrompt, Granularity, Query, assemble_input
from .core.segment import segment
from .core.spans import OptimizedContext, Span
from .core.tokenizer import Tokenizer, TokenSeq
from .errors import SequenceTooLong
from .scorer.config import ScorerConfig
from .scorer.model import Parameters, forward_boundary
from .selection import (
    SelectionMode,
    SelectionPolicy,
    build_optimized_context,
    coalesce_spans,
    keep_scores_from_logits,
    merge_granularity,
    spans_from_mask,
    spans_from_tags,
    top_score_budget,
)


@dataclass(frozen=True)
class WindowPreset:
    window_tokens: int
    parallelism: int


#: desk preset is sized so a window plus prompt/query fits the toy max_seq;
#: the production preset mirrors the full-scale deployment shape.
PRESETS = {
    "desk": WindowPreset(window_tokens=256, parallelism=4),
    "production": WindowPreset(window_tokens=8192, parallelism=5),
}


@dataclass(frozen=True)
class WindowPlan:
    window_tokens: int
    parallelism: int
    windows: tuple[Span, ...]

    def __post_init__(self) -> None:
        if self.window_tokens < 1 or self.parallelism < 1:
            raise ValueError("window_tokens and parallelism must be >= 1")


def plan_windows(length: int, window_tokens: int, parallelism: int) -> WindowPlan:
    """ceil(length / window_tokens) contiguous windows; the last may be short."""
    if length < 0:
        raise ValueError("length must be >= 0")
    windows = tuple(
        Span(start, min(start + window_tokens, length)) for start in range(0, length, window_tokens)
    )
    return WindowPlan(window_tokens=window_tokens, parallelism=parallelism, windows=windows)


@dataclass(frozen=True)
class ScoredTokens:
    """Per-token scoring decisions merged over all windows of one long context."""

    tags: np.ndarray  # [n] argmax boundary tag per token
    keep_score: np.ndarray  # [n] 1 - P(tag O)


def _score_one_window(
    index: int,
    window_span: Span,
    prompt: ControlPrompt,
    query: Query,
    long_context: TokenSeq,
    params: Parameters,
    cfg: ScorerConfig,
    tokenizer: Tokenizer,
):
    window = long_context.slice(window_span.start, window_span.end)
    assembled = assemble_input(prompt, query, window, tokenizer)
    try:
        boundary = forward_boundary(params, assembled.seq, cfg)
    except SequenceTooLong as exc:
        raise SequenceTooLong(f"window {index} [{window_span.start}, {window_span.end}): {exc}") from exc
    lo = assembled.context_start
    rows = boundary[lo : lo + assembled.context_len]
    tags = np.argmax(rows, axis=-1)
    return index, tags, keep_scores_from_logits(rows)


def score_windows(
    plan: WindowPlan,
    prompt: ControlPrompt,
    query: Query,
    long_context: TokenSeq,
    params: Parameters,
    cfg: ScorerConfig,
    tokenizer: Tokenizer,
) -> ScoredTokens:
    """Score every window and merge per-token results by absolute position."""
    n = len(long_context)
    if plan.windows and plan.windows[-1].end != n:
        raise ValueError("window plan does not cover the context")
    tags = np.zeros(n, dtype=np.int64)
    scores = np.zeros(n, dtype=np.float64)

    def put(result) -> None:
        index, w_tags, w_scores = result
        span = plan.windows[index]
        tags[span.start : span.end] = w_tags
        scores[span.start : span.end] = w_scores

    if plan.parallelism == 1 or len(plan.windows) <= 1:
        for i, span in enumerate(plan.windows):
            put(_score_one_window(i, span, prompt, query, long_context, params, cfg, tokenizer))
    else:
        with ThreadPoolExecutor(max_workers=plan.parallelism) as pool:
            futures = [
                pool.submit(
                    _score_one_window, i, span, prompt, query, long_context, params, cfg, tokenizer
                )
                for i, span in enumerate(plan.windows)
            ]
            for future in futures:
                put(future.result())
    return ScoredTokens(tags=tags, keep_score=scores)


def compress(
    prompt: ControlPrompt,
    query: Query,
    long_context: TokenSeq,
    policy: SelectionPolicy,
    params: Parameters,
    cfg: ScorerConfig,
    tokenizer: Tokenizer,
    window_tokens: int | None = None,
    parallelism: int | None = None,
) -> OptimizedContext:
    """Score, decode per the policy, widen to the requested granularity, build the kept subset.

    In budget mode the budget caps the kept tokens exactly, so granularity
    widening is skipped (runs are coalesced only); in tag mode the decoded
    spans are widened to the policy granularity.
    """
    preset = PRESETS["desk"]
    win = window_tokens or preset.window_tokens
    lanes = parallelism or preset.parallelism
    plan = plan_windows(len(long_context), win, lanes)
    if len(long_context) == 0:
        return build_optimized_context((), long_context)
    scored = score_windows(plan, prompt, query, long_context, params, cfg, tokenizer)
    if policy.mode is SelectionMode.TOP_SCORE_BUDGET:
        keep = top_score_budget(scored.keep_score, policy.budget_tokens)
        spans = coalesce_spans(spans_from_mask(keep))
    else:
        raw = spans_from_tags(scored.tags)
        spans = merge_granularity(raw, segment(long_context), policy.granularity)
    return build_optimized_context(tuple(spans), long_context)


@dataclass(frozen=True)
class CostModel:
    """Attention-cost units (token-count squared) for one compress-then-read run."""

    optimizer_cost: int
    prefill_cost: int
    baseline_cost: int

    @property
    def speedup(self) -> float:
        ours = self.optimizer_cost + self.prefill_cost
        return self.baseline_cost / ours if ours else float("inf")


def predict_cost(long_tokens: int, kept_tokens: int, window_tokens: int, parallelism: int) -> CostModel:
    """Closed-form cost: full waves of window attention plus the reduced prefill.

    optimizer = ceil(ceil(long_tokens / w) / parallelism) * w**2, prefill = kept_tokens**2,
    baseline = long_tokens**2 (reading the whole long context directly).
    """
    if long_tokens < 0 or kept_tokens < 0:
        raise ValueError("lengths must be >= 0")
    if window_tokens < 1 or parallelism < 1:
        raise ValueError("window_tokens and parallelism must be >= 1")
    n_windows = math.ceil(long_tokens / window_tokens)
    waves = math.ceil(n_windows / parallelism)
    return CostModel(
        optimizer_cost=waves * window_tokens * window_tokens,
        prefill_cost=kept_tokens * kept_tokens,
        baseline_cost=long_tokens * long_tokens,
    )
