from .tensor import Tensor, backward, constant, no_grad
from .ops import (
    PRIMITIVE_KINDS,
    add,
    apply_primitive,
    concat,
    conv1d,
    element_mul,
    layernorm,
    linear,
    matmul,
    mish,
    mse,
    relu,
    reshape,
    scalar_mul,
    slice_,
    softmax,
    transpose,
)
from .params import ParameterStore
from .optim import OptimizerState, adamw_step, cosine_warmup_lr
from .gradcheck import gradient_check

__all__ = [
    "Tensor", "backward", "constant", "no_grad", "apply_primitive", "PRIMITIVE_KINDS",
    "add", "scalar_mul", "element_mul", "matmul", "conv1d", "linear", "relu", "mish",
    "layernorm", "concat", "slice_", "mse", "softmax", "reshape", "transpose",
    "ParameterStore", "OptimizerState", "adamw_step", "cosine_warmup_lr", "gradient_check",
]
