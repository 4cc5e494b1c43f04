"""Greedy extractive labeling against a reference summary (ROUGE-1 F1)."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from ..core.tokenizer import TokenSeq


def _unigrams(tokens: Sequence[str]) -> Counter:
    return Counter(t.lower() for t in tokens)


def rouge1_f1(candidate: Counter, reference: Counter) -> float:
    """F1 over unigram multisets; empty candidate or reference scores 0."""
    cand_total = sum(candidate.values())
    ref_total = sum(reference.values())
    if cand_total == 0 or ref_total == 0:
        return 0.0
    overlap = sum(min(c, reference[t]) for t, c in candidate.items())
    if overlap == 0:
        return 0.0
    precision = overlap / cand_total
    recall = overlap / ref_total
    return 2.0 * precision * recall / (precision + recall)


def rouge1_f1_texts(candidate_tokens: Sequence[str], reference_tokens: Sequence[str]) -> float:
    return rouge1_f1(_unigrams(candidate_tokens), _unigrams(reference_tokens))


def greedy_extractive_labels(
    sentences: Sequence[TokenSeq], reference: TokenSeq, max_sents: int
) -> list[int]:
    """Greedily pick sentences that maximize ROUGE-1 F1 against the reference.

    Each step adds the sentence with the best resulting F1 (ties: lower index)
    and stops when no sentence strictly improves the score or `max_sents` is
    reached.  Returns indices in selection order.
    """
    if max_sents < 0:
        raise ValueError("max_sents must be >= 0")
    ref = _unigrams(reference.texts())
    sent_grams = [_unigrams(s.texts()) for s in sentences]
    selected: list[int] = []
    selected_grams: Counter = Counter()
    best_f1 = 0.0
    while len(selected) < max_sents:
        best_idx = -1
        best_gain_f1 = best_f1
        for idx, grams in enumerate(sent_grams):
            if idx in selected:
                continue
            f1 = rouge1_f1(selected_grams + grams, ref)
            if f1 > best_gain_f1:
                best_gain_f1 = f1
                best_idx = idx
        if best_idx < 0:
            break
        selected.append(best_idx)
        selected_grams = selected_grams + sent_grams[best_idx]
        best_f1 = best_gain_f1
    return selected
