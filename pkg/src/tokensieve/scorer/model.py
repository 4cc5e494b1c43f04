"""Hybrid-attention transformer: forward pass and manual backward pass.

Architecture: tied token embedding + fixed sinusoidal positions, pre-norm
blocks (x += attn(ln(x)); x += ff(ln(x))), final layer norm, then two heads on
every position: a category head tied to the embedding table (vocab-sized
logits) and a 4-way boundary-tag head.  The lower `n_causal` layers mask
attention causally; upper layers attend bidirectionally.

Everything is float64.  The backward pass is written by hand against the same
cached activations the forward produces, so gradients can be checked against
central finite differences coordinate-by-coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import kernels
from ..core.tokenizer import TokenSeq
from ..errors import SequenceTooLong
from .config import ScorerConfig

Parameters = dict[str, np.ndarray]

_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_A = 0.044715


def _gelu(x: np.ndarray) -> np.ndarray:
    u = _GELU_C * (x + _GELU_A * x**3)
    return 0.5 * x * (1.0 + np.tanh(u))


def _gelu_grad(x: np.ndarray) -> np.ndarray:
    u = _GELU_C * (x + _GELU_A * x**3)
    t = np.tanh(u)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)


def param_spec(cfg: ScorerConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Ordered (name, shape) declaration of every weight tensor."""
    d, f = cfg.d_model, cfg.d_ff
    spec: list[tuple[str, tuple[int, ...]]] = [("embedding", (cfg.vocab_size, d))]
    for layer in range(cfg.n_layers):
        p = f"block{layer}."
        spec += [
            (p + "ln1.g", (d,)),
            (p + "ln1.b", (d,)),
            (p + "attn.wq", (d, d)),
            (p + "attn.wk", (d, d)),
            (p + "attn.wv", (d, d)),
            (p + "attn.wo", (d, d)),
            (p + "ln2.g", (d,)),
            (p + "ln2.b", (d,)),
            (p + "ff.w1", (d, f)),
            (p + "ff.b1", (f,)),
            (p + "ff.w2", (f, d)),
            (p + "ff.b2", (d,)),
        ]
    spec += [
        ("ln_f.g", (d,)),
        ("ln_f.b", (d,)),
        ("boundary.w", (d, cfg.tag_set_size)),
        ("boundary.b", (cfg.tag_set_size,)),
    ]
    return spec


def init_params(cfg: ScorerConfig) -> Parameters:
    """Seed-deterministic initialization (N(0, 0.02) weights, unit/zero norms)."""
    rng = np.random.default_rng(cfg.seed)
    params: Parameters = {}
    for name, shape in param_spec(cfg):
        base = name.rsplit(".", 1)[-1]
        if base in ("g",):
            params[name] = np.ones(shape)
        elif base in ("b", "b1", "b2"):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.normal(0.0, 0.02, size=shape)
    return params


@lru_cache(maxsize=32)
def _sinusoidal(n: int, d: int) -> np.ndarray:
    pos = np.arange(n, dtype=np.float64)[:, None]
    dim = np.arange(d // 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * dim / d)
    enc = np.zeros((n, d))
    enc[:, 0::2] = np.sin(angle)
    enc[:, 1::2] = np.cos(angle)
    enc.setflags(write=False)
    return enc


def attention_mask(layer_idx: int, seq_len: int, cfg: ScorerConfig) -> np.ndarray:
    """Boolean [seq_len, seq_len] mask; mask[i, j] is True when i may attend to j."""
    if not 0 <= layer_idx < cfg.n_layers:
        raise ValueError(f"layer_idx {layer_idx} out of range")
    if layer_idx < cfg.n_causal:
        return np.tril(np.ones((seq_len, seq_len), dtype=bool))
    return np.ones((seq_len, seq_len), dtype=bool)


def layer_is_causal(layer_idx: int, cfg: ScorerConfig) -> bool:
    return layer_idx < cfg.n_causal


@dataclass(frozen=True)
class HeadOutputs:
    """Per-position logits from both heads.

    category_logits is None when the pass was asked for boundary logits only
    (the inference path: tag decisions never read the category head).
    """

    category_logits: np.ndarray | None  # [n, vocab_size]
    boundary_logits: np.ndarray  # [n, tag_set_size]


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    n, d = x.shape
    return x.reshape(n, n_heads, d // n_heads).transpose(1, 0, 2)  # [h, n, dh]


def _merge_heads(x: np.ndarray) -> np.ndarray:
    h, n, dh = x.shape
    return x.transpose(1, 0, 2).reshape(n, h * dh)


def _check_length(n: int, cfg: ScorerConfig) -> None:
    if n > cfg.max_seq:
        raise SequenceTooLong(f"sequence of {n} tokens exceeds max_seq {cfg.max_seq}")
    if n == 0:
        raise ValueError("cannot run the scorer on an empty sequence")


def _as_ids(inp: TokenSeq | np.ndarray) -> np.ndarray:
    if isinstance(inp, TokenSeq):
        return inp.ids()
    return np.asarray(inp, dtype=np.int64)


def _forward_internal(
    params: Parameters,
    ids: np.ndarray,
    cfg: ScorerConfig,
    keep_cache: bool,
    want_category: bool = True,
):
    n = ids.shape[0]
    _check_length(n, cfg)
    scale = 1.0 / np.sqrt(cfg.head_dim)
    x = params["embedding"][ids] + _sinusoidal(n, cfg.d_model)
    cache: dict = {"ids": ids, "x0": x} if keep_cache else {}
    layer_states: list[np.ndarray] = []
    for layer in range(cfg.n_layers):
        p = f"block{layer}."
        causal = layer_is_causal(layer, cfg)
        h1, xhat1, rstd1 = kernels.layer_norm(x, params[p + "ln1.g"], params[p + "ln1.b"])
        q = _split_heads(h1 @ params[p + "attn.wq"], cfg.n_heads)
        k = _split_heads(h1 @ params[p + "attn.wk"], cfg.n_heads)
        v = _split_heads(h1 @ params[p + "attn.wv"], cfg.n_heads)
        scores = np.matmul(q, k.transpose(0, 2, 1)) * scale
        probs = kernels.masked_softmax(scores, causal)
        ctx = _merge_heads(np.matmul(probs, v))
        attn_out = ctx @ params[p + "attn.wo"]
        x_mid = x + attn_out
        h2, xhat2, rstd2 = kernels.layer_norm(x_mid, params[p + "ln2.g"], params[p + "ln2.b"])
        pre = h2 @ params[p + "ff.w1"] + params[p + "ff.b1"]
        act = _gelu(pre)
        ff_out = act @ params[p + "ff.w2"] + params[p + "ff.b2"]
        x_next = x_mid + ff_out
        if keep_cache:
            cache[p] = {
                "x_in": x,
                "h1": h1,
                "xhat1": xhat1,
                "rstd1": rstd1,
                "q": q,
                "k": k,
                "v": v,
                "probs": probs,
                "ctx": ctx,
                "x_mid": x_mid,
                "h2": h2,
                "xhat2": xhat2,
                "rstd2": rstd2,
                "pre": pre,
                "act": act,
            }
        layer_states.append(x_next)
        x = x_next
    hf, xhatf, rstdf = kernels.layer_norm(x, params["ln_f.g"], params["ln_f.b"])
    if keep_cache:
        cache["x_last"] = x
        cache["hf"] = hf
        cache["xhatf"] = xhatf
        cache["rstdf"] = rstdf
    outputs = HeadOutputs(
        category_logits=hf @ params["embedding"].T if want_category else None,
        boundary_logits=hf @ params["boundary.w"] + params["boundary.b"],
    )
    return outputs, cache, layer_states, hf


def forward(params: Parameters, inp: TokenSeq | np.ndarray, cfg: ScorerConfig) -> HeadOutputs:
    """Run both heads over the input; raises SequenceTooLong past cfg.max_seq."""
    outputs, _, _, _ = _forward_internal(params, _as_ids(inp), cfg, keep_cache=False)
    return outputs


def forward_boundary(params: Parameters, inp: TokenSeq | np.ndarray, cfg: ScorerConfig) -> np.ndarray:
    """Boundary-tag logits only ([n, tag_set_size]).

    Inference decodes keep/drop decisions purely from the boundary head; this
    path skips the vocab-sized category projection, which dominates the
    forward cost at realistic vocabulary sizes.
    """
    outputs, _, _, _ = _forward_internal(
        params, _as_ids(inp), cfg, keep_cache=False, want_category=False
    )
    return outputs.boundary_logits


def forward_states(params: Parameters, inp: TokenSeq | np.ndarray, cfg: ScorerConfig):
    """Forward pass that also returns each block's output and the final hidden state.

    Returns (outputs, layer_states, final_hidden) where layer_states[l] is the
    residual stream after block l ([n, d_model]) and final_hidden is the
    post-norm state feeding both heads.
    """
    outputs, _, layer_states, hf = _forward_internal(params, _as_ids(inp), cfg, keep_cache=False)
    return outputs, layer_states, hf


def forward_cached(params: Parameters, inp: TokenSeq | np.ndarray, cfg: ScorerConfig):
    """Forward pass retaining the activation cache needed by `backward`."""
    outputs, cache, _, _ = _forward_internal(params, _as_ids(inp), cfg, keep_cache=True)
    return outputs, cache


def backward(
    params: Parameters,
    cache: dict,
    cfg: ScorerConfig,
    d_category: np.ndarray,
    d_boundary: np.ndarray,
) -> Parameters:
    """Gradients of a scalar loss given head-logit gradients.

    `d_category` [n, vocab] and `d_boundary` [n, tags] are dLoss/dlogits; the
    return value maps every parameter name to its gradient array (same shapes
    as `param_spec`).
    """
    grads: Parameters = {name: np.zeros(shape) for name, shape in param_spec(cfg)}
    hf = cache["hf"]
    scale = 1.0 / np.sqrt(cfg.head_dim)

    # heads
    grads["boundary.w"] += hf.T @ d_boundary
    grads["boundary.b"] += d_boundary.sum(axis=0)
    grads["embedding"] += d_category.T @ hf  # tied category head
    d_hf = d_boundary @ params["boundary.w"].T + d_category @ params["embedding"]

    # final norm
    dx, dg, db = kernels.layer_norm_grad(d_hf, cache["xhatf"], cache["rstdf"], params["ln_f.g"])
    grads["ln_f.g"] += dg
    grads["ln_f.b"] += db

    for layer in range(cfg.n_layers - 1, -1, -1):
        p = f"block{layer}."
        c = cache[p]
        # feed-forward branch
        d_ff_out = dx
        grads[p + "ff.w2"] += c["act"].T @ d_ff_out
        grads[p + "ff.b2"] += d_ff_out.sum(axis=0)
        d_act = d_ff_out @ params[p + "ff.w2"].T
        d_pre = d_act * _gelu_grad(c["pre"])
        grads[p + "ff.w1"] += c["h2"].T @ d_pre
        grads[p + "ff.b1"] += d_pre.sum(axis=0)
        d_h2 = d_pre @ params[p + "ff.w1"].T
        d_x_mid, dg2, db2 = kernels.layer_norm_grad(d_h2, c["xhat2"], c["rstd2"], params[p + "ln2.g"])
        grads[p + "ln2.g"] += dg2
        grads[p + "ln2.b"] += db2
        d_x_mid = d_x_mid + dx  # residual

        # attention branch
        d_attn_out = d_x_mid
        grads[p + "attn.wo"] += c["ctx"].T @ d_attn_out
        d_ctx = _split_heads(d_attn_out @ params[p + "attn.wo"].T, cfg.n_heads)
        d_probs = np.matmul(d_ctx, c["v"].transpose(0, 2, 1))
        d_v = np.matmul(c["probs"].transpose(0, 2, 1), d_ctx)
        d_scores = kernels.softmax_grad(c["probs"], d_probs)
        d_q = np.matmul(d_scores, c["k"]) * scale
        d_k = np.matmul(d_scores.transpose(0, 2, 1), c["q"]) * scale
        h1 = c["h1"]
        grads[p + "attn.wq"] += h1.T @ _merge_heads(d_q)
        grads[p + "attn.wk"] += h1.T @ _merge_heads(d_k)
        grads[p + "attn.wv"] += h1.T @ _merge_heads(d_v)
        d_h1 = (
            _merge_heads(d_q) @ params[p + "attn.wq"].T
            + _merge_heads(d_k) @ params[p + "attn.wk"].T
            + _merge_heads(d_v) @ params[p + "attn.wv"].T
        )
        d_x_in, dg1, db1 = kernels.layer_norm_grad(d_h1, c["xhat1"], c["rstd1"], params[p + "ln1.g"])
        grads[p + "ln1.g"] += dg1
        grads[p + "ln1.b"] += db1
        dx = d_x_in + d_x_mid  # residual

    # embedding lookup
    np.add.at(grads["embedding"], cache["ids"], dx)
    return grads
