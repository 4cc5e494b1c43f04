import pytest

from tokensieve.core import ControlPrompt, Granularity, Query, assemble_input, count_tokens
from tokensieve.core.tokenizer import verify_token_seq
from tokensieve.core.vocab import CTX_MARKER, QRY_MARKER, SYS_MARKER


def test_marker_tokens_get_reserved_ids(tokenizer, sample_context):
    prompt = ControlPrompt(text="Keep the key facts.")
    query = Query(text="What matters?")
    assembled = assemble_input(prompt, query, sample_context, tokenizer)
    texts = assembled.seq.texts()
    ids = assembled.seq.ids()
    assert texts.count(SYS_MARKER) == 1
    assert texts.count(QRY_MARKER) == 1
    assert texts.count(CTX_MARKER) == 1
    assert ids[texts.index(SYS_MARKER)] == 1
    assert ids[texts.index(QRY_MARKER)] == 2
    assert ids[texts.index(CTX_MARKER)] == 3


def test_layout_and_context_arithmetic(tokenizer, sample_context):
    prompt = ControlPrompt(text="Keep the key facts.")
    query = Query(text="What matters?")
    assembled = assemble_input(prompt, query, sample_context, tokenizer)
    n_p = count_tokens(prompt.text)
    n_q = count_tokens(query.text)
    assert assembled.context_start == 1 + n_p + 1 + n_q + 1
    assert assembled.context_len == len(sample_context)
    assert len(assembled.seq) == assembled.context_start + len(sample_context)
    assert assembled.context_position(0) == assembled.context_start
    assert assembled.context_position(len(sample_context) - 1) == len(assembled.seq) - 1


def test_window_tokens_preserved_exactly(tokenizer, sample_context):
    window = sample_context.slice(5, 17)
    assembled = assemble_input(
        ControlPrompt(text="p"), Query(text="q"), window, tokenizer
    )
    got = assembled.seq.tokens[assembled.context_start :]
    assert [t.text for t in got] == window.texts()
    assert [t.id for t in got] == [t.id for t in window]


def test_assembled_sequence_is_well_formed(tokenizer, sample_context):
    assembled = assemble_input(
        ControlPrompt(text="Keep facts!"), Query(text="what?"), sample_context, tokenizer
    )
    verify_token_seq(assembled.seq)
    # the context slice of the assembled source reads back the original text
    lo = assembled.context_start
    hi = lo + assembled.context_len
    original = sample_context.covered_text(0, len(sample_context))
    assert assembled.seq.covered_text(lo, hi) == original


def test_empty_prompt_or_query_rejected():
    with pytest.raises(ValueError):
        ControlPrompt(text="   ")
    with pytest.raises(ValueError):
        Query(text="")


def test_default_granularity_is_sentence():
    assert ControlPrompt(text="x").granularity is Granularity.SENTENCE


def test_empty_window_still_assembles(tokenizer, sample_context):
    window = sample_context.slice(3, 3)
    assembled = assemble_input(ControlPrompt(text="p"), Query(text="q"), window, tokenizer)
    assert assembled.context_len == 0
    assert assembled.seq.texts()[-1] == CTX_MARKER
