"""Training-data generation: filler corpora, label encoding, extractive
summary oracles, needle-in-a-haystack synthesis, LLM-driven QA synthesis,
and JSONL persistence."""

from .extractive import greedy_extractive_labels, rouge1_f1, rouge1_f1_texts
from .labels import keyword_labels
from .niah import (
    KEY_WORDS,
    NEEDLE_TEMPLATE,
    NiahInstance,
    SynthesisSpec,
    build_niah_training_set,
    build_niah_vocabulary,
    insert_needle,
    load_corpus_texts,
    make_haystack,
    make_instance,
    needle_value_pattern,
    niah_control_prompt,
    niah_query,
    query_key_pattern,
    synth_niah,
    synth_niah_instances,
)
from .records import (
    GoldQA,
    example_to_record,
    load_examples_jsonl,
    load_qa_jsonl,
    record_to_example,
    save_examples_jsonl,
)
from .synthesis import (
    DropRecord,
    QAPair,
    backward_synthesis,
    consistency_filter,
    forward_synthesis,
    gold_spans_of,
    locate_support,
    normalize_answer,
)
from .wordbank import filler_document, filler_paragraph, filler_sentence, write_corpus

__all__ = [
    "KEY_WORDS",
    "NEEDLE_TEMPLATE",
    "DropRecord",
    "GoldQA",
    "NiahInstance",
    "QAPair",
    "SynthesisSpec",
    "backward_synthesis",
    "build_niah_training_set",
    "build_niah_vocabulary",
    "consistency_filter",
    "example_to_record",
    "filler_document",
    "filler_paragraph",
    "filler_sentence",
    "forward_synthesis",
    "gold_spans_of",
    "greedy_extractive_labels",
    "insert_needle",
    "keyword_labels",
    "load_corpus_texts",
    "load_examples_jsonl",
    "load_qa_jsonl",
    "locate_support",
    "make_haystack",
    "make_instance",
    "needle_value_pattern",
    "niah_control_prompt",
    "niah_query",
    "normalize_answer",
    "query_key_pattern",
    "record_to_example",
    "rouge1_f1",
    "rouge1_f1_texts",
    "save_examples_jsonl",
    "synth_niah",
    "synth_niah_instances",
    "write_corpus",
]
