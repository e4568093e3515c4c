from .checkpoint import CHECKPOINT_MAGIC, decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint
from .gradcheck import GradientReport, check_gradients, finite_difference
from .layers import (
    LinearParams,
    LstmParams,
    gelu,
    kl_divergence,
    linear_forward,
    lstm_sequence,
    lstm_step,
    mse_loss,
    sigmoid,
    tanh,
)
from .optim import (
    Adam,
    Optimizer,
    OptimizerKind,
    OptimizerState,
    Sgd,
    adam_step,
    make_optimizer,
    sgd_step,
    step_decay_lr,
)
from .params import ParameterSet
from .tensor import Array, Op, Tensor, backward, concat, stack

__all__: tuple[str, ...] = (
    "Array",
    "Op",
    "Tensor",
    "backward",
    "concat",
    "stack",
    "LinearParams",
    "LstmParams",
    "linear_forward",
    "lstm_step",
    "lstm_sequence",
    "gelu",
    "sigmoid",
    "tanh",
    "mse_loss",
    "kl_divergence",
    "ParameterSet",
    "OptimizerKind",
    "OptimizerState",
    "Optimizer",
    "Adam",
    "Sgd",
    "adam_step",
    "sgd_step",
    "step_decay_lr",
    "make_optimizer",
    "CHECKPOINT_MAGIC",
    "encode_checkpoint",
    "decode_checkpoint",
    "read_checkpoint",
    "write_checkpoint",
    "GradientReport",
    "check_gradients",
    "finite_difference",
)
