"""LLM-in-the-loop example synthesis: forward (fragments -> QA), backward
(QA -> supporting sentences via map-reduce), and the answer-consistency filter.

All client interactions use a strict line format (QUESTION:/ANSWER:/SUPPORT:
or YES/NO + SUPPORT:) so deterministic mocks can script them; supporting
sentences must appear verbatim in the context or the example is rejected.
The exact prompt wordings live in the constants below.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core.assemble import ControlPrompt, Granularity, Query
from ..core.segment import fragment_fixed, split_sentences
from ..core.spans import Span
from ..core.tokenizer import Tokenizer, TokenSeq
from ..errors import NoSupport
from ..llmclient import ChatRequest, LLMClient, cascade_payload
from ..scorer.training import TrainingExample
from ..selection import build_optimized_context, coalesce_spans, render_optimized, spans_from_tags
from .labels import keyword_labels

logger = logging.getLogger(__name__)

SUPPORT_PROMPT = ControlPrompt(
    text="Extract the sentences from the document that support answering the user's question.",
    granularity=Granularity.SENTENCE,
)

FORWARD_SYSTEM = "You write extractive question-answer pairs over document fragments."
FORWARD_USER_TEMPLATE = (
    "Write one question answerable from the fragments below, its short answer, and the "
    "exact supporting sentences copied verbatim.\n"
    "Reply with a QUESTION: line, an ANSWER: line, and one SUPPORT: line per supporting "
    "sentence.\n\n{fragments}"
)

BACKWARD_SYSTEM = "You check whether a document fragment supports an answer."
BACKWARD_USER_TEMPLATE = (
    "Question: {question}\nAnswer: {answer}\n\nFragment:\n{fragment}\n\n"
    "If the fragment contains sentences supporting the answer, reply YES followed by one "
    "SUPPORT: line per sentence copied verbatim; otherwise reply NO."
)

CONSISTENCY_SYSTEM = "Answer the question using only the provided context."

_ARTICLES = frozenset({"a", "an", "the"})


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: str


@dataclass(frozen=True)
class DropRecord:
    reason: str  # "parse" | "containment" | "answer_mismatch"
    detail: str


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    cleaned = re.sub(r"[^0-9a-z\s]", " ", text.lower())
    words = [w for w in cleaned.split() if w not in _ARTICLES]
    return " ".join(words)


def _sentence_spans_covering(context: TokenSeq, byte_lo: int, byte_hi: int) -> list[Span]:
    """Whole-sentence spans intersecting the byte range [byte_lo, byte_hi)."""
    first = last = None
    for tok in context:
        if tok.byte_span[1] > byte_lo and tok.byte_span[0] < byte_hi:
            if first is None:
                first = tok.pos
            last = tok.pos
    if first is None:
        return []
    hit = Span(first, last + 1)
    return [s for s in split_sentences(context) if s.intersects(hit)]


def locate_support(
    context: TokenSeq, support: str, byte_lo: int = 0, byte_hi: int | None = None
) -> list[Span]:
    """Sentence spans covering the first verbatim occurrence of `support`; [] if absent.

    The search may be restricted to the byte range [byte_lo, byte_hi).
    """
    needle = support.strip().encode("utf-8")
    if not needle:
        return []
    if byte_hi is None:
        byte_hi = len(context.source_bytes)
    off = context.source_bytes.find(needle, byte_lo, byte_hi)
    if off < 0:
        return []
    return _sentence_spans_covering(context, off, off + len(needle))


def _parse_lines(text: str, prefix: str) -> list[str]:
    return [line[len(prefix) :].strip() for line in text.splitlines() if line.startswith(prefix)]


def forward_synthesis(
    context: TokenSeq,
    client: LLMClient,
    rng: np.random.Generator,
    tokenizer: Tokenizer,
    fragment_len: int = 256,
    draws: int = 1,
) -> tuple[list[TrainingExample], list[DropRecord]]:
    """Generate QA examples from random fragment subsets of one document.

    Per draw: sample N ~ uniform{1, 2, 3} fragments, ask the client for a
    question/answer/supporting-sentences triple, verify every supporting
    sentence appears verbatim in the context, and label those sentences as
    gold.  Returns kept examples plus one DropRecord per rejected draw.
    """
    fragments = fragment_fixed(context, fragment_len)
    if len(fragments) < 3:
        raise ValueError(f"context yields {len(fragments)} fragments; need >= 3")
    examples: list[TrainingExample] = []
    drops: list[DropRecord] = []
    for _ in range(draws):
        n = int(rng.integers(1, 4))
        chosen = sorted(int(i) for i in rng.choice(len(fragments), size=n, replace=False))
        blocks = []
        for rank, idx in enumerate(chosen, start=1):
            frag = fragments[idx]
            blocks.append(f"Fragment {rank}:\n{context.covered_text(frag.start, frag.end)}")
        request = ChatRequest(
            system=FORWARD_SYSTEM,
            user=FORWARD_USER_TEMPLATE.format(fragments="\n\n".join(blocks)),
        )
        response = client.complete(request)
        questions = _parse_lines(response.text, "QUESTION:")
        answers = _parse_lines(response.text, "ANSWER:")
        supports = _parse_lines(response.text, "SUPPORT:")
        if len(questions) != 1 or len(answers) != 1 or not supports:
            drops.append(DropRecord("parse", f"malformed reply: {response.text[:80]!r}"))
            continue
        spans: list[Span] = []
        missing = None
        for support in supports:
            located = locate_support(context, support)
            if not located:
                missing = support
                break
            spans.extend(located)
        if missing is not None:
            drops.append(DropRecord("containment", f"support not verbatim in context: {missing[:80]!r}"))
            continue
        examples.append(
            TrainingExample(
                prompt=SUPPORT_PROMPT,
                query=Query(questions[0]),
                context=context,
                labels=keyword_labels(context, coalesce_spans(spans)),
            )
        )
    for drop in drops:
        logger.info("forward_synthesis drop (%s): %s", drop.reason, drop.detail)
    return examples, drops


def backward_synthesis(
    qa: QAPair,
    context: TokenSeq,
    client: LLMClient,
    tokenizer: Tokenizer,
    fragment_len: int = 256,
) -> TrainingExample:
    """Map-reduce support location for an existing QA pair.

    Every fragment is checked independently (map); verified citations are
    unioned into gold spans (reduce), so the result does not depend on any
    execution order.  Raises NoSupport when no fragment yields a verbatim
    supporting sentence.
    """
    fragments = fragment_fixed(context, fragment_len)
    spans: list[Span] = []
    for frag in fragments:
        request = ChatRequest(
            system=BACKWARD_SYSTEM,
            user=BACKWARD_USER_TEMPLATE.format(
                question=qa.question,
                answer=qa.answer,
                fragment=context.covered_text(frag.start, frag.end),
            ),
        )
        response = client.complete(request)
        first = response.text.strip().splitlines()[0].strip().upper() if response.text.strip() else "NO"
        if not first.startswith("YES"):
            continue
        frag_lo = context[frag.start].byte_span[0]
        frag_hi = context[frag.end - 1].byte_span[1]
        for support in _parse_lines(response.text, "SUPPORT:"):
            spans.extend(locate_support(context, support, frag_lo, frag_hi))
    if not spans:
        raise NoSupport(f"no fragment supports the answer {qa.answer!r}")
    return TrainingExample(
        prompt=SUPPORT_PROMPT,
        query=Query(qa.question),
        context=context,
        labels=keyword_labels(context, coalesce_spans(spans)),
    )


def gold_spans_of(example: TrainingExample) -> list[Span]:
    """The non-O span structure encoded in an example's labels."""
    tags = np.array([int(l.tag) for l in example.labels], dtype=np.int64)
    return spans_from_tags(tags)


def consistency_filter(
    example: TrainingExample,
    reference_answer: str,
    client: LLMClient,
) -> tuple[bool, DropRecord | None]:
    """Keep the example iff the client, shown only the gold spans, reproduces the answer.

    Matching is up to normalization (case, punctuation, articles, whitespace).
    """
    subset = build_optimized_context(tuple(gold_spans_of(example)), example.context)
    request = ChatRequest(
        system=CONSISTENCY_SYSTEM,
        user=cascade_payload(render_optimized(subset), example.query.text),
    )
    response = client.complete(request)
    if normalize_answer(response.text) == normalize_answer(reference_answer):
        return True, None
    drop = DropRecord(
        "answer_mismatch",
        f"got {response.text[:60]!r}, expected {reference_answer[:60]!r}",
    )
    logger.info("consistency_filter drop: %s", drop.detail)
    return False, drop
