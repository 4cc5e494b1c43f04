"""Transformer forward-pass tests: hybrid masking, shapes, determinism."""

import numpy as np
import pytest

from tokensieve.errors import SequenceTooLong
from tokensieve.scorer import ScorerConfig
from tokensieve.scorer.model import (
    attention_mask,
    forward,
    forward_boundary,
    forward_states,
    init_params,
    layer_is_causal,
    param_spec,
)


def test_param_spec_shapes(tiny_cfg):
    spec = dict(param_spec(tiny_cfg))
    d, f = tiny_cfg.d_model, tiny_cfg.d_ff
    assert spec["embedding"] == (tiny_cfg.vocab_size, d)
    assert spec["block0.attn.wq"] == (d, d)
    assert spec["block0.ff.w1"] == (d, f)
    assert spec["block0.ff.w2"] == (f, d)
    assert spec["boundary.w"] == (d, tiny_cfg.tag_set_size)
    # one entry per declared tensor, no duplicates
    names = [name for name, _ in param_spec(tiny_cfg)]
    assert len(names) == len(set(names))


def test_init_params_deterministic(tiny_cfg):
    a = init_params(tiny_cfg)
    b = init_params(tiny_cfg)
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])
    # norm gains start at one, biases at zero
    assert (a["block0.ln1.g"] == 1.0).all()
    assert (a["block0.ln1.b"] == 0.0).all()
    assert (a["boundary.b"] == 0.0).all()


def test_layer_split_matches_config(tiny_cfg):
    causal_layers = [l for l in range(tiny_cfg.n_layers) if layer_is_causal(l, tiny_cfg)]
    assert causal_layers == list(range(tiny_cfg.n_causal))


def test_attention_mask_shapes(tiny_cfg):
    low = attention_mask(0, 6, tiny_cfg)
    high = attention_mask(tiny_cfg.n_layers - 1, 6, tiny_cfg)
    assert low.shape == high.shape == (6, 6)
    assert np.array_equal(low, np.tril(np.ones((6, 6), dtype=bool)))
    assert high.all()


def test_forward_shapes(tiny_params, tiny_cfg, rng):
    ids = rng.integers(0, tiny_cfg.vocab_size, size=12)
    out = forward(tiny_params, ids, tiny_cfg)
    assert out.category_logits.shape == (12, tiny_cfg.vocab_size)
    assert out.boundary_logits.shape == (12, tiny_cfg.tag_set_size)
    assert np.isfinite(out.category_logits).all()
    assert np.isfinite(out.boundary_logits).all()


def test_forward_boundary_matches_full_forward(tiny_params, tiny_cfg, rng):
    """The category-skipping inference path must agree with the full pass."""
    ids = rng.integers(0, tiny_cfg.vocab_size, size=20)
    full = forward(tiny_params, ids, tiny_cfg)
    fast = forward_boundary(tiny_params, ids, tiny_cfg)
    np.testing.assert_array_equal(full.boundary_logits, fast)


def test_forward_accepts_token_seq(tiny_params, tiny_cfg, tokenizer):
    seq = tokenizer.tokenize("the needle hides in the meadow")
    out_seq = forward(tiny_params, seq, tiny_cfg)
    out_ids = forward(tiny_params, seq.ids(), tiny_cfg)
    np.testing.assert_array_equal(out_seq.boundary_logits, out_ids.boundary_logits)


def test_sequence_too_long_raises(tiny_params, tiny_cfg):
    ids = np.zeros(tiny_cfg.max_seq + 1, dtype=np.int64)
    with pytest.raises(SequenceTooLong):
        forward(tiny_params, ids, tiny_cfg)


def test_max_length_is_accepted(tiny_params, tiny_cfg):
    ids = np.zeros(tiny_cfg.max_seq, dtype=np.int64)
    out = forward(tiny_params, ids, tiny_cfg)
    assert out.boundary_logits.shape[0] == tiny_cfg.max_seq


def test_causal_layers_isolate_earlier_positions(tiny_params, tiny_cfg, rng):
    """Perturbing position j leaves every i < j untouched in causal layers.

    This is exact equality, not a tolerance: the mask zeroes the softmax
    weights of future positions, so no arithmetic path exists from j back
    to i.
    """
    n = 16
    ids = rng.integers(4, tiny_cfg.vocab_size, size=n)
    perturbed = ids.copy()
    j = 9
    perturbed[j] = (perturbed[j] + 1) % tiny_cfg.vocab_size

    _, states_a, _ = forward_states(tiny_params, ids, tiny_cfg)
    _, states_b, _ = forward_states(tiny_params, perturbed, tiny_cfg)

    for layer in range(tiny_cfg.n_causal):
        assert (states_a[layer][:j] == states_b[layer][:j]).all(), (
            f"causal layer {layer} leaked information backwards"
        )


def test_bidirectional_layers_spread_information(tiny_params, tiny_cfg, rng):
    """After the final (bidirectional) layer, a perturbation reaches all positions."""
    n = 16
    ids = rng.integers(4, tiny_cfg.vocab_size, size=n)
    perturbed = ids.copy()
    perturbed[9] = (perturbed[9] + 1) % tiny_cfg.vocab_size

    _, states_a, _ = forward_states(tiny_params, ids, tiny_cfg)
    _, states_b, _ = forward_states(tiny_params, perturbed, tiny_cfg)

    final_a = states_a[-1]
    final_b = states_b[-1]
    changed = np.abs(final_a - final_b).max(axis=1) > 0
    assert changed.all(), "some position never saw the perturbation"


def test_category_head_ties_embedding(tiny_params, tiny_cfg, rng):
    """Category logits are hidden @ embedding.T (weight tying, no extra matrix)."""
    ids = rng.integers(0, tiny_cfg.vocab_size, size=8)
    out, _, final_hidden = forward_states(tiny_params, ids, tiny_cfg)
    np.testing.assert_allclose(
        out.category_logits, final_hidden @ tiny_params["embedding"].T, atol=1e-12
    )


def test_forward_is_deterministic(tiny_params, tiny_cfg):
    ids = np.arange(10, dtype=np.int64) % tiny_cfg.vocab_size
    a = forward(tiny_params, ids, tiny_cfg)
    b = forward(tiny_params, ids, tiny_cfg)
    np.testing.assert_array_equal(a.boundary_logits, b.boundary_logits)
    np.testing.assert_array_equal(a.category_logits, b.category_logits)


def test_config_rejects_tiny_vocab():
    with pytest.raises(ValueError):
        ScorerConfig(vocab_size=2)
