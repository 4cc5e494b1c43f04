"""tokensieve: query-aware token-level compression of long contexts.

A small token-scoring transformer reads (instruction, query, window) inputs
and tags each context token keep/drop; windows of a long document are scored
in parallel and the kept spans are stitched into a short context that a
downstream language model can answer from at a fraction of the attention cost.

Layout:
    core          tokenization, segmentation, span types, input assembly
    scorer        the scoring transformer: model, loss, training, checkpoints
    selection     tag decoding, budget selection, span algebra, coverage
    orchestrator  window planning, parallel scoring, the attention-cost model
    kernels       numba-compiled hot loops with a pure-numpy fallback
    datagen       corpus synthesis, needle grids, QA synthesis, JSONL records
    evalharness   retrieval baseline, accuracy grids, latency reports
    llmclient     downstream LLM protocol: HTTP client and deterministic mocks
    cli           the `tokensieve` command
"""

from . import kernels
from .core import (
    ControlPrompt,
    Granularity,
    OptimizedContext,
    Query,
    Span,
    Token,
    TokenSeq,
    Tokenizer,
    Vocabulary,
    assemble_input,
    count_tokens,
    segment,
    split_words,
)
from .errors import (
    EmptyContext,
    EmptyMask,
    HaystackTooShort,
    NonFiniteLoss,
    NoSupport,
    OverlappingSpans,
    SentenceTooLong,
    SequenceTooLong,
    TokenSieveError,
)
from .llmclient import ChatRequest, ChatResponse, HttpClient, LLMClient, RuleMockClient, cascade_answer
from .orchestrator import CostModel, compress, plan_windows, predict_cost, score_windows
from .scorer import ScorerConfig, forward, init_params, load_checkpoint, save_checkpoint, train
from .selection import (
    GoldFacts,
    SelectionMode,
    SelectionPolicy,
    coverage,
    coverage_objective,
    render_optimized,
)

__version__ = "0.1.0"

__all__ = [
    "ChatRequest",
    "ChatResponse",
    "ControlPrompt",
    "CostModel",
    "EmptyContext",
    "EmptyMask",
    "GoldFacts",
    "Granularity",
    "HaystackTooShort",
    "HttpClient",
    "LLMClient",
    "NoSupport",
    "NonFiniteLoss",
    "OptimizedContext",
    "OverlappingSpans",
    "Query",
    "RuleMockClient",
    "ScorerConfig",
    "SelectionMode",
    "SelectionPolicy",
    "SentenceTooLong",
    "SequenceTooLong",
    "Span",
    "Token",
    "TokenSeq",
    "TokenSieveError",
    "Tokenizer",
    "Vocabulary",
    "__version__",
    "assemble_input",
    "cascade_answer",
    "compress",
    "count_tokens",
    "coverage",
    "coverage_objective",
    "forward",
    "init_params",
    "kernels",
    "load_checkpoint",
    "plan_windows",
    "predict_cost",
    "render_optimized",
    "save_checkpoint",
    "score_windows",
    "segment",
    "split_words",
    "train",
]
