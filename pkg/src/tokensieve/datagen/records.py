"""JSONL persistence for training examples and gold QA records.

A training-example record stores the raw context text plus gold spans
(half-open token ranges); tags and category labels are reconstructed on load,
so records stay readable and independent of the tag encoding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..core.assemble import ControlPrompt, Granularity, Query
from ..core.spans import Span
from ..core.tokenizer import Tokenizer
from ..errors import TokenSieveError
from ..scorer.training import TrainingExample
from .labels import keyword_labels
from .synthesis import gold_spans_of


@dataclass(frozen=True)
class GoldQA:
    """An externally supplied question/answer over a context document."""

    question: str
    answer: str
    context_text: str
    supporting_spans: tuple[Span, ...] = ()


def example_to_record(example: TrainingExample) -> dict:
    return {
        "prompt": {
            "text": example.prompt.text,
            "granularity": example.prompt.granularity.value,
        },
        "query": example.query.text,
        "context": example.context.source,
        "gold_spans": [[s.start, s.end] for s in gold_spans_of(example)],
    }


def record_to_example(record: dict, tokenizer: Tokenizer) -> TrainingExample:
    try:
        prompt = ControlPrompt(
            text=record["prompt"]["text"],
            granularity=Granularity(record["prompt"]["granularity"]),
        )
        query = Query(record["query"])
        context = tokenizer.tokenize(record["context"])
        spans = tuple(Span(int(s), int(e)) for s, e in record["gold_spans"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TokenSieveError(f"malformed training record: {exc}") from exc
    return TrainingExample(
        prompt=prompt, query=query, context=context, labels=keyword_labels(context, spans)
    )


def save_examples_jsonl(path: str | Path, examples: Iterable[TrainingExample]) -> int:
    """Write one JSON object per line; returns the number of records written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example_to_record(example), ensure_ascii=False) + "\n")
            count += 1
    return count


def load_examples_jsonl(path: str | Path, tokenizer: Tokenizer) -> list[TrainingExample]:
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                examples.append(record_to_example(json.loads(line), tokenizer))
    return examples


def load_qa_jsonl(path: str | Path) -> list[GoldQA]:
    """Read gold QA records: {"question", "answer", "context", "supporting_spans"?}."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            try:
                records.append(
                    GoldQA(
                        question=raw["question"],
                        answer=raw["answer"],
                        context_text=raw["context"],
                        supporting_spans=tuple(
                            Span(int(s), int(e)) for s, e in raw.get("supporting_spans", [])
                        ),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise TokenSieveError(f"malformed QA record: {exc}") from exc
    return records
