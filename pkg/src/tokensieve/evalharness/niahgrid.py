"""Needle-retrieval grid evaluation: length x depth accuracy matrices.

The downstream reader is pluggable; NiahAnswerMock is a deterministic stand-in
that extracts the needle value by pattern matching over whatever context text
it is shown, so end-to-end accuracy measures exactly whether compression kept
the needle sentence.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core.spans import OptimizedContext
from ..core.tokenizer import Tokenizer
from ..datagen.niah import (
    NEEDLE_TEMPLATE,
    NiahInstance,
    SynthesisSpec,
    _ParagraphPool,
    load_corpus_texts,
    make_instance,
    needle_value_pattern,
    query_key_pattern,
)
from ..llmclient import CascadeResult, ChatRequest, ChatResponse, LLMClient, cascade_answer
from ..orchestrator import compress
from ..scorer.config import ScorerConfig
from ..scorer.model import Parameters
from ..selection import SelectionPolicy

NO_ANSWER = "I could not find the answer."


def _split_cascade_user(user: str) -> tuple[str, str]:
    """(context_text, question_text) out of the downstream payload format."""
    body, _, tail = user.rpartition("\n\nQuestion: ")
    if not tail:
        return "", ""
    question = tail.rsplit("\nAnswer:", 1)[0]
    context = body[len("Context:\n") :] if body.startswith("Context:\n") else body
    return context, question


@dataclass
class NiahAnswerMock:
    """Deterministic reader: finds `key`'s needle value in the shown context, or reports failure."""

    kind: str = "numbers"
    template: str = NEEDLE_TEMPLATE

    def complete(self, request: ChatRequest) -> ChatResponse:
        from ..core.tokenizer import count_tokens

        context, question = _split_cascade_user(request.user)
        answer = NO_ANSWER
        key_match = query_key_pattern().search(question)
        if key_match:
            key = key_match.group(1).strip()
            value_match = needle_value_pattern(key, self.kind, self.template).search(context)
            if value_match:
                answer = value_match.group(1).strip().rstrip(".")
        return ChatResponse(
            text=answer,
            input_token_count=count_tokens(request.system) + count_tokens(request.user),
            output_token_count=count_tokens(answer),
        )


@dataclass
class NiahPipeline:
    """Compress-then-answer pipeline bound to one scorer and one downstream client."""

    params: Parameters
    cfg: ScorerConfig
    tokenizer: Tokenizer
    policy: SelectionPolicy
    client: LLMClient
    window_tokens: int | None = None
    parallelism: int | None = None
    template: str = "original"

    def run(self, instance: NiahInstance) -> tuple[CascadeResult, OptimizedContext]:
        example = instance.example
        subset = compress(
            example.prompt,
            example.query,
            example.context,
            self.policy,
            self.params,
            self.cfg,
            self.tokenizer,
            window_tokens=self.window_tokens,
            parallelism=self.parallelism,
        )
        result = cascade_answer(
            example.prompt, example.query, subset, self.client, template=self.template, allow_empty=True
        )
        return result, subset


def answer_is_correct(instance: NiahInstance, answer: str) -> bool:
    """Verbatim containment of the needle value in the reader's answer."""
    return instance.value in answer


@dataclass(frozen=True)
class GridResult:
    lengths: tuple[int, ...]
    depths: tuple[float, ...]
    trials: int
    accuracy: np.ndarray = field(compare=False)  # [len(lengths), len(depths)]
    mean_kept_tokens: np.ndarray = field(compare=False)

    @property
    def mean_accuracy(self) -> float:
        return float(self.accuracy.mean())

    @property
    def min_cell(self) -> float:
        return float(self.accuracy.min())

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["length", "depth", "accuracy", "mean_optimized_tokens", "trials"])
            for i, length in enumerate(self.lengths):
                for j, depth in enumerate(self.depths):
                    writer.writerow(
                        [
                            length,
                            depth,
                            f"{self.accuracy[i, j]:.4f}",
                            f"{self.mean_kept_tokens[i, j]:.1f}",
                            self.trials,
                        ]
                    )

    def write_heatmap_svg(self, path: str | Path) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(self.depths), 1.2 + 0.7 * len(self.lengths)))
        im = ax.imshow(self.accuracy, vmin=0.0, vmax=1.0, cmap="RdYlGn", aspect="auto")
        ax.set_xticks(range(len(self.depths)), [f"{d:.2f}" for d in self.depths])
        ax.set_yticks(range(len(self.lengths)), [str(n) for n in self.lengths])
        ax.set_xlabel("needle depth")
        ax.set_ylabel("context tokens")
        for i in range(len(self.lengths)):
            for j in range(len(self.depths)):
                ax.text(j, i, f"{self.accuracy[i, j]:.2f}", ha="center", va="center", fontsize=8)
        fig.colorbar(im, ax=ax, label="retrieval accuracy")
        fig.tight_layout()
        fig.savefig(path, format="svg")
        plt.close(fig)


def grid_eval(
    pipeline: NiahPipeline,
    corpus_source,
    lengths: Sequence[int],
    depths: Sequence[float],
    trials: int,
    seed: int = 0,
    kind: str = "numbers",
) -> GridResult:
    """Accuracy per (length, depth) cell over `trials` fresh instances each.

    Every trial reseeds its own generator from (seed, cell, trial), so cells
    are independent and the whole grid is reproducible.
    """
    texts = load_corpus_texts(corpus_source)
    spec = SynthesisSpec(
        haystack_source=texts,
        lengths=tuple(lengths),
        depths=tuple(depths),
        seed=seed,
        kind=kind,
    )
    accuracy = np.zeros((len(lengths), len(depths)), dtype=np.float64)
    kept_tokens_sum = np.zeros_like(accuracy)
    for i, length in enumerate(lengths):
        for j, depth in enumerate(depths):
            hits = 0
            tokens = 0
            for t in range(trials):
                rng = np.random.default_rng((seed, i, j, t))
                pool = _ParagraphPool(texts, rng)
                used: set[tuple[str, str]] = set()
                instance = make_instance(pool, length, depth, pipeline.tokenizer, rng, spec, used)
                result, subset = pipeline.run(instance)
                hits += int(answer_is_correct(instance, result.answer))
                tokens += subset.token_count
            accuracy[i, j] = hits / trials
            kept_tokens_sum[i, j] = tokens / trials
    return GridResult(
        lengths=tuple(lengths),
        depths=tuple(depths),
        trials=trials,
        accuracy=accuracy,
        mean_kept_tokens=kept_tokens_sum,
    )
