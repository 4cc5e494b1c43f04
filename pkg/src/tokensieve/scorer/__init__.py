"""Token scorer: hybrid-attention transformer, loss, training, checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import TAG_SET_SIZE, ScorerConfig
from .loss import JointLabel, Tag, gradient_mask, head_gradients, joint_loss
from .model import (
    HeadOutputs,
    Parameters,
    attention_mask,
    backward,
    forward,
    forward_cached,
    forward_states,
    init_params,
    layer_is_causal,
    param_spec,
)
from .training import (
    PreparedExample,
    TrainingExample,
    example_loss_and_grads,
    finite_diff_check,
    prepare_example,
    train,
    validate_tag_sequence,
)

__all__ = [
    "HeadOutputs",
    "JointLabel",
    "Parameters",
    "PreparedExample",
    "ScorerConfig",
    "TAG_SET_SIZE",
    "Tag",
    "TrainingExample",
    "attention_mask",
    "backward",
    "example_loss_and_grads",
    "finite_diff_check",
    "forward",
    "forward_cached",
    "forward_states",
    "gradient_mask",
    "head_gradients",
    "init_params",
    "joint_loss",
    "layer_is_causal",
    "load_checkpoint",
    "param_spec",
    "prepare_example",
    "save_checkpoint",
    "train",
    "validate_tag_sequence",
]
