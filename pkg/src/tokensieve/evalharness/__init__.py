"""Evaluation harness: retrieval baseline, needle-retrieval grids, and reports."""

from .niahgrid import (
    GridResult,
    NiahAnswerMock,
    NiahPipeline,
    answer_is_correct,
    grid_eval,
)
from .rag import RagConfig, chunk_spans, rag_select, rank_chunks, tf_cosine
from .reports import (
    FULL_SCALE_AVG_KEPT_TOKENS,
    FULL_SCALE_SPEEDUP_RANGE,
    LatencyReport,
    LatencyRow,
    MethodRow,
    compression_report,
    latency_sweep,
    linear_fit_r2,
    make_timing_context,
)

__all__ = [
    "FULL_SCALE_AVG_KEPT_TOKENS",
    "FULL_SCALE_SPEEDUP_RANGE",
    "GridResult",
    "LatencyReport",
    "LatencyRow",
    "MethodRow",
    "NiahAnswerMock",
    "NiahPipeline",
    "RagConfig",
    "answer_is_correct",
    "chunk_spans",
    "compression_report",
    "grid_eval",
    "latency_sweep",
    "linear_fit_r2",
    "make_timing_context",
    "rag_select",
    "rank_chunks",
    "tf_cosine",
]
