"""Regression losses with analytic gradients w.r.t. the predictions.

Both shrinkage losses scale the squared residual by ``exp(y)`` and by a
sigmoid gate that suppresses easy samples::

    l_i = exp(y_i) r_i^2 / (1 + exp(a (c - s(r_i))))

with ``s(r) = |r|`` for the modified loss and ``s(r) = r`` for the original
one. Every function returns ``(loss, d_pred)``.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ContractViolation, InvalidConfig


class Reduction(str, enum.Enum):
    SUM = "sum"
    MEAN = "mean"


@dataclass(frozen=True)
class ShrinkageParams:
    a: float = 10.0
    c: float = 0.2
    reduction: Reduction = Reduction.MEAN

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0):
            raise InvalidConfig(f"a and c must be > 0, got a={self.a}, c={self.c}")
        object.__setattr__(self, "reduction", Reduction(self.reduction))


def _residual(pred, y):
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if pred.shape != y.shape or pred.ndim != 1:
        raise ContractViolation(
            f"pred and y must be equal-length vectors, got {pred.shape}, {y.shape}")
    return pred - y, y


def _reduce(per_elem, grad, reduction):
    if Reduction(reduction) is Reduction.MEAN and per_elem.size:
        return float(per_elem.mean()), grad / per_elem.size
    return float(per_elem.sum()), grad


def shrinkage_weight(r, a=10.0, c=0.2):
    """Gate ``1 / (1 + exp(a (c - |r|)))`` of the modified loss."""
    return expit(a * (np.abs(r) - c))


def _gated(r, y, gate_arg, dgate_dr, p):
    # expit(z) == 1 / (1 + exp(-z)) without overflow for large |z|
    s = expit(p.a * gate_arg)
    scale = np.exp(y)
    per_elem = scale * r * r * s
    grad = scale * (2.0 * r * s + r * r * p.a * s * (1.0 - s) * dgate_dr)
    return _reduce(per_elem, grad, p.reduction)


def shrinkage_modified(pred, y, p=None):
    """Shrinkage loss gated on the absolute residual.

    The subgradient of ``|r|`` at ``r = 0`` is taken as 0.
    """
    p = p or ShrinkageParams()
    r, y = _residual(pred, y)
    return _gated(r, y, np.abs(r) - p.c, np.sign(r), p)


def shrinkage_origin(pred, y, p=None):
    """Original shrinkage loss, gated on the signed residual."""
    p = p or ShrinkageParams()
    r, y = _residual(pred, y)
    return _gated(r, y, r - p.c, 1.0, p)


def mse(pred, y, reduction=Reduction.MEAN):
    """Squared error ``sum_i r_i^2`` (or its mean)."""
    r, _ = _residual(pred, y)
    return _reduce(r * r, 2.0 * r, reduction)


class LossKind(str, enum.Enum):
    MODIFIED = "modified"
    ORIGIN = "origin"
    MSE = "mse"


def evaluate_loss(kind, pred, y, params=None):
    """Dispatch to one of the three losses by name."""
    kind = LossKind(kind)
    params = params or ShrinkageParams()
    if kind is LossKind.MODIFIED:
        return shrinkage_modified(pred, y, params)
    if kind is LossKind.ORIGIN:
        return shrinkage_origin(pred, y, params)
    return mse(pred, y, params.reduction)
