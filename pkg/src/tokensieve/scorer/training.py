"""Training loop, example preparation, and the finite-difference gradient check."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..core.assemble import ControlPrompt, Query, assemble_input
from ..core.tokenizer import Tokenizer, TokenSeq
from ..errors import NonFiniteLoss
from .config import ScorerConfig
from .loss import JointLabel, Tag, gradient_mask, head_gradients, labels_to_arrays
from .model import Parameters, backward, forward_cached, param_spec

logger = logging.getLogger(__name__)


def validate_tag_sequence(tags: np.ndarray) -> None:
    """Well-formedness: I/E may only follow B or I."""
    prev = int(Tag.O)
    for i, t in enumerate(tags):
        if t in (int(Tag.I), int(Tag.E)) and prev not in (int(Tag.B), int(Tag.I)):
            raise ValueError(f"malformed tag sequence: tag {Tag(int(t)).name} at {i} follows {Tag(prev).name}")
        prev = int(t)


@dataclass(frozen=True)
class TrainingExample:
    prompt: ControlPrompt
    query: Query
    context: TokenSeq
    labels: tuple[JointLabel, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.context):
            raise ValueError(
                f"labels ({len(self.labels)}) must align one-to-one with context tokens ({len(self.context)})"
            )
        _, tags = labels_to_arrays(self.labels)
        validate_tag_sequence(tags)


@dataclass(frozen=True)
class PreparedExample:
    """An example assembled into scorer input with label arrays over all positions.

    Non-context positions (markers, prompt, query) carry tag O and are never
    masked into the loss.
    """

    ids: np.ndarray
    category_gold: np.ndarray
    tag_gold: np.ndarray
    context_start: int
    context_len: int

    def loss_mask(self, labels_mask: np.ndarray) -> np.ndarray:
        mask = np.zeros(self.ids.shape[0], dtype=bool)
        mask[self.context_start : self.context_start + self.context_len] = labels_mask
        return mask


def prepare_example(example: TrainingExample, tokenizer: Tokenizer) -> PreparedExample:
    assembled = assemble_input(example.prompt, example.query, example.context, tokenizer)
    n = len(assembled.seq)
    cat = np.zeros(n, dtype=np.int64)
    tag = np.full(n, int(Tag.O), dtype=np.int64)
    cat_ctx, tag_ctx = labels_to_arrays(example.labels)
    lo = assembled.context_start
    hi = lo + assembled.context_len
    cat[lo:hi] = cat_ctx
    tag[lo:hi] = tag_ctx
    return PreparedExample(
        ids=assembled.seq.ids(),
        category_gold=cat,
        tag_gold=tag,
        context_start=lo,
        context_len=assembled.context_len,
    )


def example_loss_and_grads(
    params: Parameters,
    prep: PreparedExample,
    cfg: ScorerConfig,
    mask: np.ndarray,
):
    outputs, cache = forward_cached(params, prep.ids, cfg)
    loss, d_cat, d_bnd = head_gradients(outputs, prep.category_gold, prep.tag_gold, mask)
    grads = backward(params, cache, cfg, d_cat, d_bnd)
    return loss, grads


def train(
    dataset: list[TrainingExample],
    cfg: ScorerConfig,
    tokenizer: Tokenizer,
    epochs: int = 3,
    lr: float = 3e-4,
    batch_size: int = 8,
    mask_rate: float = 0.5,
    seed: int = 0,
    init: Parameters | None = None,
) -> tuple[Parameters, list[float]]:
    """Plain SGD with a constant learning rate over shuffled batches.

    Returns the trained parameters and the mean loss per epoch.  Aborts with
    NonFiniteLoss (carrying the batch index) if any batch loss is NaN/inf.
    Pass `init` to continue training from existing weights (they are copied,
    never mutated in place).
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    from .model import init_params

    prepared = [prepare_example(ex, tokenizer) for ex in dataset]
    params = {k: v.copy() for k, v in init.items()} if init is not None else init_params(cfg)
    rng = np.random.default_rng((cfg.seed, seed))
    names = [name for name, _ in param_spec(cfg)]
    epoch_losses: list[float] = []
    batch_index = 0
    for epoch in range(epochs):
        order = rng.permutation(len(prepared))
        losses: list[float] = []
        for lo in range(0, len(order), batch_size):
            batch = [prepared[i] for i in order[lo : lo + batch_size]]
            accum: Parameters = {}
            batch_loss = 0.0
            for prep in batch:
                labels_mask = _context_mask(prep, mask_rate, rng)
                loss, grads = example_loss_and_grads(params, prep, cfg, prep.loss_mask(labels_mask))
                batch_loss += loss
                for name in names:
                    if name in accum:
                        accum[name] += grads[name]
                    else:
                        accum[name] = grads[name]
            batch_loss /= len(batch)
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(batch_index)
            inv = lr / len(batch)
            for name in names:
                params[name] -= inv * accum[name]
            losses.append(batch_loss)
            batch_index += 1
        epoch_losses.append(float(np.mean(losses)))
        logger.info("epoch %d: mean loss %.6f", epoch, epoch_losses[-1])
    return params, epoch_losses


def _context_mask(prep: PreparedExample, mask_rate: float, rng: np.random.Generator) -> np.ndarray:
    tags = prep.tag_gold[prep.context_start : prep.context_start + prep.context_len]
    labels = [JointLabel(0, Tag(int(t))) for t in tags]
    mask = gradient_mask(labels, mask_rate, rng)
    if not mask.any():
        # an all-O example at a high mask rate can draw an empty mask; keep
        # one random position so the batch still carries a defined loss
        mask[int(rng.integers(len(mask)))] = True
    return mask


def finite_diff_check(
    params: Parameters,
    example: TrainingExample,
    cfg: ScorerConfig,
    tokenizer: Tokenizer,
    n_coords: int = 120,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic gradients and central differences.

    Samples `n_coords` random parameter coordinates; relative error uses
    max(|analytic|, |numeric|, 1e-6) as the denominator.  The 1e-6 floor keeps
    the comparison meaningful in double precision: a central difference of a
    ~O(1) loss at step h carries ~eps/h absolute rounding noise, so near-zero
    gradients (orders below the tensor's gradient scale) agree with the
    analytic value in absolute terms but cannot support a pure ratio test.
    The loss mask is all context positions (deterministic), so the check
    covers both heads.
    """
    prep = prepare_example(example, tokenizer)
    mask = prep.loss_mask(np.ones(prep.context_len, dtype=bool))
    _, grads = example_loss_and_grads(params, prep, cfg, mask)

    def loss_at(p: Parameters) -> float:
        outputs, _ = forward_cached(p, prep.ids, cfg)
        loss, _, _ = head_gradients(outputs, prep.category_gold, prep.tag_gold, mask)
        return loss

    rng = np.random.default_rng(seed)
    names = [name for name, _ in param_spec(cfg)]
    worst = 0.0
    for _ in range(n_coords):
        name = names[int(rng.integers(len(names)))]
        flat = params[name].reshape(-1)
        idx = int(rng.integers(flat.shape[0]))
        original = flat[idx]
        flat[idx] = original + step
        plus = loss_at(params)
        flat[idx] = original - step
        minus = loss_at(params)
        flat[idx] = original
        numeric = (plus - minus) / (2.0 * step)
        analytic = grads[name].reshape(-1)[idx]
        rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-6)
        worst = max(worst, rel)
    return worst
