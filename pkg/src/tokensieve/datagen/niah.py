"""Needle-in-a-haystack synthesis: haystacks from a corpus, needle insertion,
training examples, and the templates shared with evaluation.

A needle is one templated sentence carrying a (key, value) fact; it is inserted
at the sentence boundary nearest a requested depth fraction.  Gold labels tag
exactly the needle's tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core.assemble import ControlPrompt, Granularity, Query
from ..core.segment import split_paragraphs, split_sentences
from ..core.spans import Span
from ..core.tokenizer import Tokenizer, TokenSeq
from ..core.vocab import Vocabulary
from ..errors import HaystackTooShort
from ..scorer.training import TrainingExample
from .labels import keyword_labels

NEEDLE_TEMPLATE = "One of the special magic {kind} for {key} is: {value}."

_SINGULAR = {"numbers": "number", "words": "word"}

#: Key phrases are pairs drawn from this list; it is disjoint from the filler
#: vocabulary so keys never collide with haystack prose.
KEY_WORDS = (
    "amber basalt cobalt coral crimson ember falcon garnet glacier harbor heron indigo jasper "
    "juniper kestrel lagoon lantern magnet marble meadow nickel obsidian onyx opal orchid osprey "
    "pebble pewter quartz quill raven saffron sapphire sparrow spruce summit talon thistle topaz "
    "tundra umber velvet walnut willow zephyr zinc"
).split()


def niah_control_prompt(kind: str = "numbers", template: str = NEEDLE_TEMPLATE) -> ControlPrompt:
    shape = template.replace("{kind}", kind).replace("{key}", "KEY").replace("{value}", "VALUE")
    return ControlPrompt(
        text=f"Extract the needle sentences of the form '{shape}' from the document.",
        granularity=Granularity.SENTENCE,
    )


def niah_query(key: str, kind: str = "numbers") -> Query:
    return Query(text=f"What is the special magic {_SINGULAR.get(kind, 'value')} for {key}?")


def needle_value_pattern(key: str, kind: str = "numbers", template: str = NEEDLE_TEMPLATE) -> re.Pattern:
    """Whitespace-tolerant regex capturing the value of `key`'s needle in free text."""
    rendered = template.replace("{kind}", kind).replace("{key}", key)
    prefix, _, suffix = rendered.partition("{value}")
    pre = r"\s+".join(re.escape(w) for w in prefix.split())
    suf = re.escape(suffix.strip())
    return re.compile(pre + r"\s*(.+?)" + suf) if suf else re.compile(pre + r"\s*(\S+)")


def query_key_pattern() -> re.Pattern:
    return re.compile(r"\bfor\s+(.+?)\?")


@dataclass(frozen=True)
class SynthesisSpec:
    """Grid of (length, depth) haystack cells to synthesize.

    haystack_source is a directory of UTF-8 text files (one document each) or
    an in-memory list of document strings.  per_cell repeats each grid cell
    with fresh keys/values.
    """

    haystack_source: str | Path | Sequence[str]
    lengths: tuple[int, ...]
    depths: tuple[float, ...]
    needle_template: str = NEEDLE_TEMPLATE
    seed: int = 0
    per_cell: int = 1
    kind: str = "numbers"

    def __post_init__(self) -> None:
        if not self.lengths or not self.depths:
            raise ValueError("lengths and depths must be non-empty")
        if any(l < 8 for l in self.lengths):
            raise ValueError("haystack lengths must be >= 8 tokens")
        if any(not 0.0 <= d <= 1.0 for d in self.depths):
            raise ValueError("depths must lie in [0, 1]")
        if self.per_cell < 1:
            raise ValueError("per_cell must be >= 1")
        if self.kind not in _SINGULAR:
            raise ValueError(f"unknown needle kind {self.kind!r}")


@dataclass(frozen=True)
class NiahInstance:
    """One synthesized haystack with its needle's bookkeeping."""

    example: TrainingExample
    key: str
    value: str
    needle_text: str
    needle_span: Span
    length: int
    depth: float


def load_corpus_texts(source: str | Path | Sequence[str]) -> list[str]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        if path.is_dir():
            files = sorted(path.glob("*.txt"))
            if not files:
                raise FileNotFoundError(f"no *.txt corpus files under {path}")
            return [f.read_text(encoding="utf-8") for f in files]
        return [path.read_text(encoding="utf-8")]
    return list(source)


class _ParagraphPool:
    """Seed-deterministic endless stream of corpus paragraphs."""

    def __init__(self, texts: list[str], rng: np.random.Generator):
        self._paragraphs = [p.strip() for t in texts for p in t.split("\n\n") if p.strip()]
        if not self._paragraphs:
            raise HaystackTooShort("corpus contains no paragraphs")
        self._rng = rng
        self._queue: list[int] = []

    def next(self) -> str:
        if not self._queue:
            self._queue = list(self._rng.permutation(len(self._paragraphs)))
        return self._paragraphs[self._queue.pop()]


def make_haystack(pool: _ParagraphPool, length: int, tokenizer: Tokenizer) -> TokenSeq:
    """Corpus paragraphs concatenated to ~`length` tokens, cut at a sentence boundary."""
    pieces: list[str] = []
    total = 0
    from ..core.tokenizer import count_tokens

    while total < length:
        p = pool.next()
        pieces.append(p)
        total += count_tokens(p)
    seq = tokenizer.tokenize("\n\n".join(pieces))
    sentences = split_sentences(seq)
    end = 0
    for s in sentences:
        if s.end > length:
            break
        end = s.end
    if end == 0:
        raise HaystackTooShort(f"no sentence fits within {length} tokens")
    return tokenizer.tokenize(seq.covered_text(0, end))


def insert_needle(
    haystack: TokenSeq, needle_text: str, depth: float, tokenizer: Tokenizer
) -> tuple[TokenSeq, Span]:
    """Splice the needle in at the sentence boundary nearest floor(depth * n).

    Returns the new sequence and the needle's token span within it.
    """
    n = len(haystack)
    target = int(np.floor(depth * n))
    boundaries = [s.start for s in split_sentences(haystack)] + [n]
    best = min(boundaries, key=lambda b: (abs(b - target), b))
    needle_bytes = needle_text.encode("utf-8")
    src = haystack.source_bytes
    if best == n:
        insert_at = len(src)
        new_bytes = src + b" " + needle_bytes
        needle_start = insert_at + 1
    else:
        insert_at = haystack.tokens[best].byte_span[0]
        new_bytes = src[:insert_at] + needle_bytes + b" " + src[insert_at:]
        needle_start = insert_at
    seq = tokenizer.tokenize(new_bytes.decode("utf-8"))
    needle_end = needle_start + len(needle_bytes)
    first = last = None
    for tok in seq:
        if tok.byte_span[0] >= needle_start and tok.byte_span[1] <= needle_end:
            if first is None:
                first = tok.pos
            last = tok.pos
    if first is None:
        raise AssertionError("needle insertion produced no covered tokens")
    return seq, Span(first, last + 1)


def _draw_key_value(
    rng: np.random.Generator, kind: str, used: set[tuple[str, str]]
) -> tuple[str, str]:
    from .wordbank import FILLER_WORDS

    while True:
        i, j = rng.choice(len(KEY_WORDS), size=2, replace=False)
        key = f"{KEY_WORDS[int(i)]} {KEY_WORDS[int(j)]}"
        if kind == "numbers":
            value = str(int(rng.integers(100000, 1000000)))
        else:
            a, b = rng.integers(0, len(FILLER_WORDS), size=2)
            value = f"{FILLER_WORDS[int(a)]} {FILLER_WORDS[int(b)]}"
        if (key, value) not in used:
            used.add((key, value))
            return key, value


def make_instance(
    pool: _ParagraphPool,
    length: int,
    depth: float,
    tokenizer: Tokenizer,
    rng: np.random.Generator,
    spec: SynthesisSpec,
    used: set[tuple[str, str]],
) -> NiahInstance:
    key, value = _draw_key_value(rng, spec.kind, used)
    needle_text = spec.needle_template.replace("{kind}", spec.kind).replace("{key}", key).replace(
        "{value}", value
    )
    haystack = make_haystack(pool, length, tokenizer)
    context, needle_span = insert_needle(haystack, needle_text, depth, tokenizer)
    example = TrainingExample(
        prompt=niah_control_prompt(spec.kind, spec.needle_template),
        query=niah_query(key, spec.kind),
        context=context,
        labels=keyword_labels(context, [needle_span]),
    )
    return NiahInstance(
        example=example,
        key=key,
        value=value,
        needle_text=needle_text,
        needle_span=needle_span,
        length=length,
        depth=depth,
    )


def synth_niah_instances(spec: SynthesisSpec, tokenizer: Tokenizer) -> list[NiahInstance]:
    """One instance per (length, depth) grid cell, repeated per_cell times."""
    texts = load_corpus_texts(spec.haystack_source)
    rng = np.random.default_rng(spec.seed)
    pool = _ParagraphPool(texts, rng)
    used: set[tuple[str, str]] = set()
    instances = []
    for length in spec.lengths:
        for depth in spec.depths:
            for _ in range(spec.per_cell):
                instances.append(make_instance(pool, length, depth, tokenizer, rng, spec, used))
    return instances


def synth_niah(spec: SynthesisSpec, tokenizer: Tokenizer) -> list[TrainingExample]:
    return [inst.example for inst in synth_niah_instances(spec, tokenizer)]


def build_niah_vocabulary(corpus_texts: Sequence[str], kind: str = "numbers") -> Vocabulary:
    """Corpus vocabulary extended with the key words and template/query prose.

    Needle values are deliberately left out-of-vocabulary: they are arbitrary
    payloads the scorer should tag from context, not memorize.
    """
    extras = [
        " ".join(KEY_WORDS),
        niah_control_prompt(kind).text,
        niah_query("amber basalt", kind).text,
        NEEDLE_TEMPLATE.replace("{kind}", kind).replace("{key}", "amber basalt").replace("{value}", ""),
    ]
    return Vocabulary.build(list(corpus_texts) + extras)


def build_niah_training_set(
    corpus_texts: Sequence[str],
    tokenizer: Tokenizer,
    n_examples: int,
    window_tokens: int = 256,
    seed: int = 0,
    kind: str = "numbers",
    windowed_frac: float = 0.3,
    negative_frac: float = 0.2,
) -> list[TrainingExample]:
    """Training mix mirroring what window-parallel inference will see.

    Three example shapes: short whole haystacks containing the needle, window
    slices cut from longer haystacks (the needle may be truncated at a window
    edge, as real windows do), and needle-free windows labeled all O.
    """
    rng = np.random.default_rng(seed)
    pool = _ParagraphPool(list(corpus_texts), rng)
    used: set[tuple[str, str]] = set()
    spec = SynthesisSpec(
        haystack_source=list(corpus_texts),
        lengths=(window_tokens,),
        depths=(0.5,),
        seed=seed,
        kind=kind,
    )
    examples: list[TrainingExample] = []
    while len(examples) < n_examples:
        draw = rng.random()
        if draw < negative_frac:
            length = int(rng.integers(window_tokens // 2, int(window_tokens * 1.4)))
            context = make_haystack(pool, length, tokenizer)
            key, _ = _draw_key_value(rng, kind, used)
            examples.append(
                TrainingExample(
                    prompt=niah_control_prompt(kind),
                    query=niah_query(key, kind),
                    context=context,
                    labels=keyword_labels(context, []),
                )
            )
        elif draw < negative_frac + windowed_frac:
            length = int(rng.integers(int(window_tokens * 1.6), window_tokens * 3))
            depth = float(rng.random())
            inst = make_instance(pool, length, depth, tokenizer, rng, spec, used)
            context = inst.example.context
            span = inst.needle_span
            # any window start overlapping the needle by at least one token;
            # starts near the edges produce the truncated needles real
            # inference windows will contain
            lo = max(0, span.start - window_tokens + 1)
            hi = min(span.end - 1, len(context) - window_tokens)
            start = int(rng.integers(lo, hi + 1)) if hi > lo else max(0, hi)
            window = context.slice(start, start + window_tokens)
            overlap_lo = max(span.start, start) - start
            overlap_hi = min(span.end, start + window_tokens) - start
            gold = [Span(overlap_lo, overlap_hi)] if overlap_hi > overlap_lo else []
            examples.append(
                TrainingExample(
                    prompt=inst.example.prompt,
                    query=inst.example.query,
                    context=window,
                    labels=keyword_labels(window, gold),
                )
            )
        else:
            length = int(rng.integers(window_tokens // 2, int(window_tokens * 1.4)))
            depth = float(rng.random())
            examples.append(make_instance(pool, length, depth, tokenizer, rng, spec, used).example)
    return examples
