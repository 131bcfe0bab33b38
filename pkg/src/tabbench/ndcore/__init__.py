from .tensor import (
    GraphError,
    NonFiniteError,
    ShapeError,
    Tape,
    Tensor,
    add,
    as_tensor,
    broadcast_to,
    clamp_min,
    concatenate,
    cosine_similarity,
    cross_entropy,
    div,
    exp,
    grad_enabled,
    l2_norm,
    layer_norm,
    log,
    log_softmax,
    matmul,
    mean,
    mse,
    mul,
    neg,
    no_grad,
    pairwise_cosine,
    power,
    relu,
    reshape,
    softmax,
    sqrt,
    sub,
    sum_,
    swapaxes,
    take,
    transpose,
)
from .optim import Adam, AdamState, adam_step
from .nn import MLP, LayerNorm, Linear, Module, xavier_uniform
from .gradcheck import check_gradients, numeric_grad, relative_error
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
