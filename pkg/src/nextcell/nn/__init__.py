"""Minimal dense-tensor numeric core with reverse-mode gradients."""

from .gradcheck import grad_check
from .layers import gat_layer, gcn_layer, inner_product_decode
from .losses import bce, cross_entropy, kl_divergence
from .optim import ModelState, adam_step, load_state, save_state
from .tensor import Tape, Tensor

__all__ = [
    "Tape", "Tensor", "ModelState", "adam_step", "save_state", "load_state",
    "gcn_layer", "gat_layer", "inner_product_decode",
    "bce", "cross_entropy", "kl_divergence", "grad_check",
]
