"""Joint token-scoring loss: category cross-entropy + boundary-tag cross-entropy.

Each position carries two labels: the token's own vocabulary id (category) and
a boundary tag in {O, B, I, E}.  The loss at a position is the boundary-tag
cross-entropy plus, when the tag is not O, the category cross-entropy; the
total is averaged over the positions a gradient mask selects.  Positions with
a non-O tag are always masked in; O positions are masked in independently with
probability (1 - rate).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMask
from .model import HeadOutputs


class Tag(enum.IntEnum):
    O = 0
    B = 1
    I = 2
    E = 3


@dataclass(frozen=True)
class JointLabel:
    category: int  # the token's own vocabulary id
    tag: Tag


def labels_to_arrays(labels: list[JointLabel] | tuple[JointLabel, ...]):
    cat = np.array([l.category for l in labels], dtype=np.int64)
    tag = np.array([int(l.tag) for l in labels], dtype=np.int64)
    return cat, tag


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def head_gradients(
    outputs: HeadOutputs,
    category_gold: np.ndarray,
    tag_gold: np.ndarray,
    grad_mask: np.ndarray,
):
    """Loss plus dLoss/dlogits for both heads.

    The category term is skipped (weight zero) wherever the gold tag is O, so
    a fully-O mask exercises only the boundary head.
    """
    n = outputs.boundary_logits.shape[0]
    if grad_mask.shape != (n,):
        raise ValueError("grad_mask must be one flag per position")
    active = int(grad_mask.sum())
    if active == 0:
        raise EmptyMask("gradient mask selects no positions")

    cat_active = grad_mask & (tag_gold != int(Tag.O))
    inv = 1.0 / active

    bnd_logp = _log_softmax(outputs.boundary_logits)
    rows = np.arange(n)
    loss = -bnd_logp[grad_mask, tag_gold[grad_mask]].sum() * inv
    d_boundary = np.zeros_like(outputs.boundary_logits)
    d_boundary[grad_mask] = np.exp(bnd_logp[grad_mask])
    d_boundary[grad_mask, tag_gold[grad_mask]] -= 1.0
    d_boundary *= inv

    d_category = np.zeros_like(outputs.category_logits)
    if cat_active.any():
        cat_logp = _log_softmax(outputs.category_logits[cat_active])
        loss += -cat_logp[np.arange(cat_logp.shape[0]), category_gold[cat_active]].sum() * inv
        d_rows = np.exp(cat_logp)
        d_rows[np.arange(d_rows.shape[0]), category_gold[cat_active]] -= 1.0
        d_category[cat_active] = d_rows * inv

    return float(loss), d_category, d_boundary


def joint_loss(
    outputs: HeadOutputs,
    labels: list[JointLabel] | tuple[JointLabel, ...],
    grad_mask: np.ndarray,
) -> float:
    """Mean per-masked-position loss (see module docstring for the factorization)."""
    category_gold, tag_gold = labels_to_arrays(labels)
    loss, _, _ = head_gradients(outputs, category_gold, tag_gold, np.asarray(grad_mask, dtype=bool))
    return loss


def gradient_mask(
    labels: list[JointLabel] | tuple[JointLabel, ...],
    rate: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Boolean mask: non-O positions always in; O positions in w.p. (1 - rate)."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    _, tag_gold = labels_to_arrays(labels)
    mask = tag_gold != int(Tag.O)
    o_positions = ~mask
    mask = mask | (o_positions & (rng.random(len(mask)) < (1.0 - rate)))
    return mask
