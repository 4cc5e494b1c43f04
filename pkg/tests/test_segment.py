import pytest
from hypothesis import given
from hypothesis import strategies as st

from tokensieve.core import Tokenizer, Vocabulary, segment
from tokensieve.core.segment import fragment_fixed, split_paragraphs, split_sentences
from tokensieve.core.spans import Span
from tokensieve.errors import SentenceTooLong


def toks(text):
    return Tokenizer(Vocabulary.build([text])).tokenize(text)


def test_sentence_split_frozen():
    seq = toks("One two. Three four! Five six? Seven")
    # tokens: One two . Three four ! Five six ? Seven
    assert split_sentences(seq) == [Span(0, 3), Span(3, 6), Span(6, 9), Span(9, 10)]


def test_terminal_punct_without_space_does_not_split():
    seq = toks("e.g. this stays")
    # tokens: e . g . this stays -- the first period abuts 'g', so only the
    # second period (followed by a space) ends a sentence
    sents = split_sentences(seq)
    assert sents == [Span(0, 4), Span(4, 6)]


def test_cjk_terminal_punctuation():
    seq = toks("你好。 再见！ 好")
    sents = split_sentences(seq)
    assert len(sents) == 3
    assert sents[0].end == 3  # 你 好 。


def test_paragraph_split_on_blank_line():
    seq = toks("First para here. Still first.\n\nSecond para now. And more.")
    paras = split_paragraphs(seq)
    assert len(paras) == 2
    assert paras[0].end == paras[1].start
    assert paras[-1].end == len(seq)


def test_single_newline_is_not_paragraph_break():
    seq = toks("Line one.\nLine two.")
    assert len(split_paragraphs(seq)) == 1


def test_sentences_nest_inside_paragraphs(sample_context):
    sm = segment(sample_context)
    for s in sm.sentence_bounds:
        assert any(
            p.start <= s.start and s.end <= p.end for p in sm.paragraph_bounds
        ), f"sentence {s} straddles a paragraph boundary"


def test_segment_map_intersection_helpers(sample_context):
    sm = segment(sample_context)
    first = sm.sentence_bounds[0]
    hits = sm.sentences_intersecting(Span(first.start, first.start + 1))
    assert hits == [first]
    assert sm.paragraphs_intersecting(Span(0, len(sample_context)))== list(sm.paragraph_bounds)


def test_bounds_partition_the_sequence(sample_context):
    sm = segment(sample_context)
    for bounds in (sm.sentence_bounds, sm.paragraph_bounds):
        assert bounds[0].start == 0
        assert bounds[-1].end == len(sample_context)
        for a, b in zip(bounds, bounds[1:]):
            assert a.end == b.start


@given(st.text(alphabet="ab .!?\n", max_size=80))
def test_segment_invariants_random_text(text):
    vocab = Vocabulary.build([text])
    seq = Tokenizer(vocab).tokenize(text)
    if len(seq) == 0:
        return
    sm = segment(seq)
    assert sm.sentence_bounds[0].start == 0 and sm.sentence_bounds[-1].end == len(seq)
    for s in sm.sentence_bounds:
        assert any(p.start <= s.start and s.end <= p.end for p in sm.paragraph_bounds)


def test_fragment_fixed_keeps_whole_sentences():
    # 4 sentences of 3 tokens each ("Aa bb." = 3 tokens); fragment length 5
    seq = toks("Aa bb. Cc dd. Ee ff. Gg hh.")
    frags = fragment_fixed(seq, 5)
    for frag in frags:
        for s in split_sentences(seq):
            inside = s.start >= frag.start and s.end <= frag.end
            outside = s.end <= frag.start or s.start >= frag.end
            assert inside or outside


def test_fragment_fixed_prunes_straddlers():
    seq = toks("Aa bb. Cc dd. Ee ff. Gg hh.")
    # 12 tokens, fragment_len 5: sentence [3,6) straddles the 5-token edge and is pruned
    frags = fragment_fixed(seq, 5)
    covered = {i for f in frags for i in range(f.start, f.end)}
    assert 0 in covered
    assert not {3, 4, 5} <= covered


def test_fragment_fixed_rejects_oversized_sentence():
    seq = toks("one two three four five six seven eight nine ten.")
    with pytest.raises(SentenceTooLong):
        fragment_fixed(seq, 4)


def test_fragment_fixed_whole_doc_single_fragment(sample_context):
    frags = fragment_fixed(sample_context, len(sample_context))
    assert frags == [Span(0, len(sample_context))]
