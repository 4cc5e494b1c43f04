"""Example-synthesis tests with fully scripted mock clients."""

import numpy as np
import pytest

from tokensieve.core import Span
from tokensieve.datagen.synthesis import (
    QAPair,
    backward_synthesis,
    consistency_filter,
    forward_synthesis,
    gold_spans_of,
    locate_support,
    normalize_answer,
)
from tokensieve.errors import NoSupport
from tokensieve.llmclient import MockRule, RuleMockClient
from tokensieve.scorer.loss import Tag

DOC = (
    "The mill was built in 1811 on the north bank. It ground wheat for the valley towns. "
    "A flood destroyed the first wheel in 1820. The second wheel used iron bearings. "
    "Local records praise the miller's honesty. The mill closed when the railway arrived. "
    "Its stones were reused in the church wall. Nothing remains at the site today."
)


@pytest.fixture()
def doc_seq(tokenizer):
    return tokenizer.tokenize(DOC)


# ---------------------------------------------------------------------------
# answer normalization
# ---------------------------------------------------------------------------


def test_normalize_answer_frozen_cases():
    assert normalize_answer("The Iron Bearings!") == "iron bearings"
    assert normalize_answer("  a   flood  ") == "flood"
    assert normalize_answer("1,811") == "1 811"
    assert normalize_answer("An answer, the answer.") == "answer answer"
    assert normalize_answer("") == ""


def test_normalize_answer_equivalence_classes():
    assert normalize_answer("The Mill") == normalize_answer("mill")
    assert normalize_answer("iron-bearings") == normalize_answer("iron bearings")
    assert normalize_answer("wheat") != normalize_answer("flour")


# ---------------------------------------------------------------------------
# support location
# ---------------------------------------------------------------------------


def test_locate_support_finds_whole_sentence(doc_seq):
    spans = locate_support(doc_seq, "The second wheel used iron bearings.")
    assert len(spans) == 1
    assert doc_seq.covered_text(spans[0].start, spans[0].end) == "The second wheel used iron bearings."


def test_locate_support_partial_match_widens_to_sentence(doc_seq):
    spans = locate_support(doc_seq, "iron bearings")
    assert len(spans) == 1
    assert "second wheel" in doc_seq.covered_text(spans[0].start, spans[0].end)


def test_locate_support_absent_returns_empty(doc_seq):
    assert locate_support(doc_seq, "submarine periscope") == []
    assert locate_support(doc_seq, "   ") == []


def test_locate_support_respects_byte_range(doc_seq):
    # "wheel" appears in two sentences; restricting to the tail must find the later one
    full = locate_support(doc_seq, "wheel")
    late_start = doc_seq.source_bytes.find(b"The second wheel")
    restricted = locate_support(doc_seq, "wheel", byte_lo=late_start)
    assert full != restricted
    assert "iron bearings" in doc_seq.covered_text(restricted[0].start, restricted[0].end)


# ---------------------------------------------------------------------------
# forward synthesis
# ---------------------------------------------------------------------------


def _forward_client(reply):
    return RuleMockClient(rules=[MockRule("Fragment 1:", reply)])


def test_forward_synthesis_keeps_verbatim_example(doc_seq, tokenizer):
    reply = (
        "QUESTION: What did the second wheel use?\n"
        "ANSWER: iron bearings\n"
        "SUPPORT: The second wheel used iron bearings."
    )
    rng = np.random.default_rng(0)
    examples, drops = forward_synthesis(doc_seq, _forward_client(reply), rng, tokenizer, fragment_len=24)
    assert drops == []
    assert len(examples) == 1
    ex = examples[0]
    assert ex.query.text == "What did the second wheel use?"
    spans = gold_spans_of(ex)
    assert len(spans) == 1
    assert doc_seq.covered_text(spans[0].start, spans[0].end) == "The second wheel used iron bearings."


def test_forward_synthesis_drop_reasons(doc_seq, tokenizer):
    rng = np.random.default_rng(0)
    # malformed reply: no QUESTION line
    examples, drops = forward_synthesis(
        doc_seq, _forward_client("ANSWER: x\nSUPPORT: y"), rng, tokenizer, fragment_len=24
    )
    assert examples == [] and [d.reason for d in drops] == ["parse"]
    # support sentence not verbatim in the document
    reply = "QUESTION: q?\nANSWER: a\nSUPPORT: This sentence is not in the document."
    examples, drops = forward_synthesis(
        doc_seq, _forward_client(reply), np.random.default_rng(0), tokenizer, fragment_len=24
    )
    assert examples == [] and [d.reason for d in drops] == ["containment"]


def test_forward_synthesis_multiple_draws_account_for_all(doc_seq, tokenizer):
    reply = (
        "QUESTION: What destroyed the first wheel?\n"
        "ANSWER: a flood\n"
        "SUPPORT: A flood destroyed the first wheel in 1820."
    )
    rng = np.random.default_rng(1)
    examples, drops = forward_synthesis(
        doc_seq, _forward_client(reply), rng, tokenizer, fragment_len=24, draws=5
    )
    assert len(examples) + len(drops) == 5
    assert len(examples) == 5  # same scripted reply is always verbatim


def test_forward_synthesis_needs_three_fragments(tokenizer):
    tiny = tokenizer.tokenize("Just one short sentence here.")
    with pytest.raises(ValueError, match="fragments"):
        forward_synthesis(tiny, RuleMockClient(), np.random.default_rng(0), tokenizer, fragment_len=256)


def test_forward_synthesis_multi_support(doc_seq, tokenizer):
    reply = (
        "QUESTION: What happened to the mill's parts?\n"
        "ANSWER: reused in the church wall\n"
        "SUPPORT: Its stones were reused in the church wall.\n"
        "SUPPORT: The second wheel used iron bearings."
    )
    examples, drops = forward_synthesis(
        doc_seq, _forward_client(reply), np.random.default_rng(0), tokenizer, fragment_len=24
    )
    assert drops == []
    assert len(gold_spans_of(examples[0])) == 2


# ---------------------------------------------------------------------------
# backward synthesis
# ---------------------------------------------------------------------------


def test_backward_synthesis_unions_fragment_citations(doc_seq, tokenizer):
    # the client says YES only for the fragment containing the bearings sentence
    client = RuleMockClient(
        rules=[
            MockRule("wheel used iron", "YES\nSUPPORT: The second wheel used iron bearings."),
            MockRule("", "NO"),
        ]
    )
    qa = QAPair(question="What kind of bearings were used?", answer="iron")
    ex = backward_synthesis(qa, doc_seq, client, tokenizer, fragment_len=24)
    spans = gold_spans_of(ex)
    assert len(spans) == 1
    assert "iron bearings" in doc_seq.covered_text(spans[0].start, spans[0].end)
    # labels carry sentence-shaped B..E runs
    tags = [int(l.tag) for l in ex.labels]
    assert tags[spans[0].start] == int(Tag.B)
    assert tags[spans[0].end - 1] == int(Tag.E)


def test_backward_synthesis_no_support_raises(doc_seq, tokenizer):
    client = RuleMockClient(rules=[MockRule("", "NO")])
    qa = QAPair(question="q?", answer="nothing")
    with pytest.raises(NoSupport):
        backward_synthesis(qa, doc_seq, client, tokenizer, fragment_len=24)


def test_backward_synthesis_ignores_support_outside_fragment(doc_seq, tokenizer):
    """A YES citing a sentence from a different fragment must not create spans there."""
    client = RuleMockClient(
        rules=[
            # every fragment answers YES but cites a sentence from the document head
            MockRule("", "YES\nSUPPORT: The mill was built in 1811 on the north bank."),
        ]
    )
    qa = QAPair(question="When was the mill built?", answer="1811")
    ex = backward_synthesis(qa, doc_seq, client, tokenizer, fragment_len=24)
    spans = gold_spans_of(ex)
    # only the fragment actually containing the sentence contributes
    assert len(spans) == 1
    assert doc_seq.covered_text(spans[0].start, spans[0].end).startswith("The mill was built")


# ---------------------------------------------------------------------------
# consistency filter
# ---------------------------------------------------------------------------


def _example_with_gold(tokenizer, doc_seq):
    reply = (
        "QUESTION: What did the second wheel use?\n"
        "ANSWER: iron bearings\n"
        "SUPPORT: The second wheel used iron bearings."
    )
    examples, _ = forward_synthesis(
        doc_seq, _forward_client(reply), np.random.default_rng(0), tokenizer, fragment_len=24
    )
    return examples[0]


def test_consistency_filter_keeps_matching_answer(tokenizer, doc_seq):
    ex = _example_with_gold(tokenizer, doc_seq)
    client = RuleMockClient(rules=[MockRule("second wheel", "The iron bearings.")])
    kept, drop = consistency_filter(ex, "iron bearings", client)
    assert kept and drop is None


def test_consistency_filter_drops_mismatch(tokenizer, doc_seq):
    ex = _example_with_gold(tokenizer, doc_seq)
    client = RuleMockClient(rules=[MockRule("", "wooden pegs")])
    kept, drop = consistency_filter(ex, "iron bearings", client)
    assert not kept
    assert drop.reason == "answer_mismatch"


def test_consistency_filter_sees_only_gold_spans(tokenizer, doc_seq):
    ex = _example_with_gold(tokenizer, doc_seq)
    seen = {}

    class Capture:
        def complete(self, request):
            seen["user"] = request.user
            from tokensieve.llmclient import ChatResponse

            return ChatResponse("iron bearings", 1, 1)

    consistency_filter(ex, "iron bearings", Capture())
    assert "The second wheel used iron bearings." in seen["user"]
    assert "miller's honesty" not in seen["user"]
