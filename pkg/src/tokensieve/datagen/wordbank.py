"""Deterministic filler prose for haystacks and test corpora.

Generated documents look like plain English essays (varied sentence lengths,
occasional commas, paragraph breaks) while staying fully seed-determined; they
give the tokenizer, segmenter, and retrieval baselines realistic structure
without shipping third-party text.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core.tokenizer import count_tokens

FILLER_WORDS = (
    "about above actually after again against almost along already also although always among "
    "analysis answer anyone appear approach area argue around article aspect assume attention "
    "author available away balance basic because become before begin behavior behind believe "
    "below benefit better between beyond board book both bring broad build business career "
    "careful carry case cause central century certain challenge chance change chapter choice "
    "choose claim class clear close collect college common community company compare complex "
    "concept concern condition consider contain continue contrast control cost could course "
    "create culture current data debate decade decide decision deep degree describe design "
    "detail develop difference different difficult direction discuss distance draw early "
    "economy effect effort eight either energy enough entire environment especially essay "
    "evidence exactly example expect experience explain express fact factor familiar famous "
    "field figure final first focus follow force form forward found four frame friend full "
    "further future general give ground group grow habit half hand happen hard help history "
    "hold hope hour house however human idea imagine impact important improve include increase "
    "indeed industry influence inside instead interest issue itself journey keep kind know "
    "language large late later lead learn least leave less letter level light likely limit "
    "line listen little local long longer machine major manner market matter maybe meaning "
    "measure meet member memory mention method middle might mind model moment money month "
    "moreover morning move movement much music must narrow nature nearly need never night "
    "north note notice number object observe obtain occur offer often once open order other "
    "outside over paper paragraph part particular pass past pattern people perhaps period "
    "person phrase picture piece place plan point policy position possible power practice "
    "present pressure probably problem process produce program project provide public purpose "
    "question quite raise range rather reach read reason recent record reduce reflect region "
    "remain remember report require research respond rest result return review rich right "
    "river role room rule school science second section seem sense sentence serious serve "
    "several shape share short should side simple since single situation small social society "
    "sometimes soon sound source space speak special spend stage stand start state statement "
    "station step still story street strong structure student study subject suggest summer "
    "support sure surface system table take teach term theory there thing think third thought "
    "through time today together toward town trade training travel treat tree true turn type "
    "under understand unit until upon usual value various view village visit voice wait walk "
    "want watch water week weight where whether which while whole wide will window winter "
    "within without word work world would write year young"
).split()


def filler_sentence(rng: np.random.Generator, lo: int = 6, hi: int = 18) -> str:
    """One sentence of lo..hi filler words with light punctuation."""
    n = int(rng.integers(lo, hi + 1))
    words = [FILLER_WORDS[int(i)] for i in rng.integers(0, len(FILLER_WORDS), size=n)]
    if n >= 9 and rng.random() < 0.4:
        words[int(rng.integers(3, n - 3))] += ","
    terminal = "." if rng.random() < 0.92 else ("?" if rng.random() < 0.5 else "!")
    return words[0].capitalize() + " " + " ".join(words[1:]) + terminal


def filler_paragraph(rng: np.random.Generator, n_sentences: int | None = None) -> str:
    count = n_sentences if n_sentences is not None else int(rng.integers(3, 8))
    return " ".join(filler_sentence(rng) for _ in range(count))


def filler_document(rng: np.random.Generator, approx_tokens: int) -> str:
    """Paragraph-structured prose of at least `approx_tokens` tokens."""
    paragraphs: list[str] = []
    total = 0
    while total < approx_tokens:
        p = filler_paragraph(rng)
        paragraphs.append(p)
        total += count_tokens(p)
    return "\n\n".join(paragraphs)


def write_corpus(directory: str | Path, n_docs: int, tokens_per_doc: int, seed: int = 0) -> list[Path]:
    """Write n_docs filler documents (one UTF-8 file each) and return their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_docs):
        path = directory / f"essay_{i:02d}.txt"
        path.write_text(filler_document(rng, tokens_per_doc) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
