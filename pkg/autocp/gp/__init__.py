from .encoding import PipelineEncoding, decode, encode
from .kernel import AdditiveKernelParams, BlockParams, gram, kernel_eval
from .process import (
    GPState,
    gp_fit,
    gp_posterior,
    gp_predict,
    gp_predict_raw,
    joint_log_marginal,
    joint_log_marginal_and_grad,
    optimize_hyperparams,
)

__all__ = [
    "AdditiveKernelParams",
    "BlockParams",
    "GPState",
    "PipelineEncoding",
    "decode",
    "encode",
    "gp_fit",
    "gp_posterior",
    "gp_predict",
    "gp_predict_raw",
    "gram",
    "joint_log_marginal",
    "joint_log_marginal_and_grad",
    "kernel_eval",
    "optimize_hyperparams",
]
