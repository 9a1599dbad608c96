from .tensor import (
    NEG_LARGE,
    Tensor,
    add,
    backward,
    concat,
    conv1d,
    conv1d_np,
    conv1d_windows,
    embed,
    inference_mode,
    layer_norm,
    layer_norm_np,
    log_softmax,
    log_softmax_np,
    matmul,
    matmul_np,
    mean_,
    mul,
    narrow,
    pick,
    relu,
    softmax,
    softmax_np,
    sum_,
    tensor,
    topo_order,
    transpose,
)
from .init import ParamSet, glorot_uniform, rng_for
from .optim import WarmupCosine, clip_grad_norm, grad_norm, sgd_step, zero_grads
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "NEG_LARGE",
    "Tensor",
    "add",
    "backward",
    "concat",
    "conv1d",
    "conv1d_np",
    "conv1d_windows",
    "embed",
    "inference_mode",
    "layer_norm",
    "layer_norm_np",
    "log_softmax",
    "log_softmax_np",
    "matmul",
    "matmul_np",
    "mean_",
    "mul",
    "narrow",
    "pick",
    "relu",
    "softmax",
    "softmax_np",
    "sum_",
    "tensor",
    "topo_order",
    "transpose",
    "ParamSet",
    "glorot_uniform",
    "rng_for",
    "WarmupCosine",
    "clip_grad_norm",
    "grad_norm",
    "sgd_step",
    "zero_grads",
    "load_checkpoint",
    "save_checkpoint",
]
