"""Dense float64 reverse-mode differentiation for small MLPs and hypernetworks."""

from .activations import IDENTITY, RELU, TANH, Activation
from .gradcheck import grad_check
from .tape import DimensionError, NumericError, Tape, TapeStateError, Var, backward, forward

__all__ = [
    "Activation",
    "TANH",
    "RELU",
    "IDENTITY",
    "Tape",
    "Var",
    "forward",
    "backward",
    "grad_check",
    "DimensionError",
    "NumericError",
    "TapeStateError",
]
