"""Minimal deterministic deep-learning kernel: rank-4 tensors, the layer
forward/backward passes the gesture network needs, SGD with momentum, and a
finite-difference gradient checker."""

from .tensor import Tensor, Parameter, as_nchw
from .layers import (
    Conv2d,
    BatchNorm2d,
    ReLU,
    MaxPool2d,
    Flatten,
    Linear,
    conv2d_forward,
    conv2d_backward,
    batchnorm_forward,
    batchnorm_backward,
    relu,
    relu_backward,
    maxpool_forward,
    maxpool_backward,
    linear_forward,
    linear_backward,
    softmax_cross_entropy,
)
from .network import Network, build_tongue_net, build_from_topology, INPUT_SHAPE
from .optim import SGDMomentum
from .gradcheck import (
    GradCheckReport,
    check_layer,
    check_network,
    check_softmax_cross_entropy,
    max_relative_error,
)

__all__ = [
    "Tensor",
    "Parameter",
    "as_nchw",
    "Conv2d",
    "BatchNorm2d",
    "ReLU",
    "MaxPool2d",
    "Flatten",
    "Linear",
    "conv2d_forward",
    "conv2d_backward",
    "batchnorm_forward",
    "batchnorm_backward",
    "relu",
    "relu_backward",
    "maxpool_forward",
    "maxpool_backward",
    "linear_forward",
    "linear_backward",
    "softmax_cross_entropy",
    "Network",
    "build_tongue_net",
    "build_from_topology",
    "INPUT_SHAPE",
    "SGDMomentum",
    "GradCheckReport",
    "check_layer",
    "check_network",
    "check_softmax_cross_entropy",
    "max_relative_error",
]
