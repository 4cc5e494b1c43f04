"""JSONL persistence round-trip tests."""

import json

import pytest

from tokensieve.core import ControlPrompt, Granularity, Query, Span
from tokensieve.datagen.labels import keyword_labels
from tokensieve.datagen.records import (
    GoldQA,
    example_to_record,
    load_examples_jsonl,
    load_qa_jsonl,
    record_to_example,
    save_examples_jsonl,
)
from tokensieve.datagen.synthesis import gold_spans_of
from tokensieve.errors import TokenSieveError
from tokensieve.scorer.training import TrainingExample


def _example(tokenizer, text="alpha beta gamma delta epsilon zeta.", spans=(Span(2, 4),)):
    ctx = tokenizer.tokenize(text)
    return TrainingExample(
        prompt=ControlPrompt("keep the key words", Granularity.KEYWORD),
        query=Query("which words matter?"),
        context=ctx,
        labels=keyword_labels(ctx, spans),
    )


def test_record_round_trip_preserves_everything(tokenizer):
    ex = _example(tokenizer)
    rec = example_to_record(ex)
    back = record_to_example(rec, tokenizer)
    assert back.prompt == ex.prompt
    assert back.query == ex.query
    assert back.context.source == ex.context.source
    assert gold_spans_of(back) == gold_spans_of(ex)
    assert [l.tag for l in back.labels] == [l.tag for l in ex.labels]


def test_record_is_plain_json(tokenizer):
    rec = example_to_record(_example(tokenizer))
    # must survive a serialization cycle and use only JSON types
    again = json.loads(json.dumps(rec))
    assert again == rec
    assert set(rec) == {"prompt", "query", "context", "gold_spans"}
    assert rec["gold_spans"] == [[2, 4]]


def test_jsonl_save_load_cycle(tokenizer, tmp_path):
    examples = [
        _example(tokenizer),
        _example(tokenizer, "one two three four five six seven.", (Span(0, 2), Span(5, 6))),
    ]
    path = tmp_path / "examples.jsonl"
    assert save_examples_jsonl(path, examples) == 2
    loaded = load_examples_jsonl(path, tokenizer)
    assert len(loaded) == 2
    for orig, back in zip(examples, loaded):
        assert back.context.source == orig.context.source
        assert gold_spans_of(back) == gold_spans_of(orig)
    # file is genuine JSONL: one parseable object per non-empty line
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 2
    for line in lines:
        json.loads(line)


def test_load_skips_blank_lines(tokenizer, tmp_path):
    path = tmp_path / "examples.jsonl"
    rec = json.dumps(example_to_record(_example(tokenizer)))
    path.write_text(rec + "\n\n" + rec + "\n")
    assert len(load_examples_jsonl(path, tokenizer)) == 2


@pytest.mark.parametrize(
    "mutate",
    [
        lambda r: r.pop("query"),
        lambda r: r.pop("gold_spans"),
        lambda r: r["prompt"].pop("granularity"),
        lambda r: r.update(prompt={"text": "x", "granularity": "not-a-level"}),
        lambda r: r.update(gold_spans=[[3, 1]]),  # end < start
        lambda r: r.update(gold_spans=[["a", "b"]]),
    ],
)
def test_malformed_record_raises_package_error(tokenizer, mutate):
    rec = example_to_record(_example(tokenizer))
    mutate(rec)
    with pytest.raises(TokenSieveError, match="malformed training record"):
        record_to_example(rec, tokenizer)


def test_load_qa_jsonl(tmp_path):
    path = tmp_path / "qa.jsonl"
    rows = [
        {"question": "q1?", "answer": "a1", "context": "ctx one."},
        {
            "question": "q2?",
            "answer": "a2",
            "context": "ctx two.",
            "supporting_spans": [[0, 2]],
        },
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    qa = load_qa_jsonl(path)
    assert qa[0] == GoldQA("q1?", "a1", "ctx one.")
    assert qa[1].supporting_spans == (Span(0, 2),)


def test_load_qa_jsonl_malformed(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text(json.dumps({"question": "q", "context": "c"}) + "\n")
    with pytest.raises(TokenSieveError, match="malformed QA record"):
        load_qa_jsonl(path)
