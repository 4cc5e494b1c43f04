import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tokensieve.core import ControlPrompt, Query, Tokenizer, Vocabulary
from tokensieve.core.spans import Span
from tokensieve.datagen.labels import keyword_labels
from tokensieve.scorer import ScorerConfig, init_params
from tokensieve.scorer.training import TrainingExample

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

SAMPLE_TEXT = (
    "The quick brown fox jumps over the lazy dog. A second sentence sits here, quietly.\n\n"
    "New paragraph starts now! Does it ask a question? Yes. The needle value is 427913 "
    "for the record. Final words follow."
)


@pytest.fixture(scope="session")
def vocab() -> Vocabulary:
    return Vocabulary.build([SAMPLE_TEXT.lower(), SAMPLE_TEXT])


@pytest.fixture(scope="session")
def tokenizer(vocab) -> Tokenizer:
    return Tokenizer(vocab)


@pytest.fixture(scope="session")
def sample_context(tokenizer):
    return tokenizer.tokenize(SAMPLE_TEXT)


@pytest.fixture(scope="session")
def tiny_cfg(vocab) -> ScorerConfig:
    return ScorerConfig(
        vocab_size=len(vocab), d_model=32, n_heads=4, n_layers=4, n_causal=3, d_ff=64, max_seq=160
    )


@pytest.fixture(scope="session")
def tiny_params(tiny_cfg):
    return init_params(tiny_cfg)


@pytest.fixture(scope="session")
def sample_example(sample_context) -> TrainingExample:
    return TrainingExample(
        prompt=ControlPrompt(text="Extract the needle sentence."),
        query=Query(text="What is the needle value?"),
        context=sample_context,
        labels=keyword_labels(sample_context, [Span(24, 33)]),
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
