"""Penalized transport objective: mean cost plus a kernel moment-matching term.

For a batch X (source), Y (target) of equal size M and the current map T,
the training objective is

    inv_lambda * (1/M) sum_i c(X_i, T(X_i))
    + (1/(M(M-1))) sum_{i != j} K(T(X_i), T(X_j))
    - (2/M^2) sum_{i,j} K(T(X_i), Y_j)

i.e. the transport cost weighted by the reciprocal penalty coefficient plus
the T-dependent part of the unbiased squared-MMD statistic. The reported
``mmd2`` adds back the Y-only term so it equals ``mmd2_unbiased`` between
the batch images and Y. ``inv_lambda = 0`` is the pure matching limit.

Gradients flow through the map outputs only: the objective's derivative with
respect to each image T(X_i) combines the cost derivative with the
point-wise statistic gradient, then backpropagates through the network.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import InputError, NumericError
from .kernel import KernelSpec, kernel_sum_and_grad_rowsum
from .mmd import _pair_sum
from .nn import MlpParams, ParamGrads, mlp_backward, mlp_forward_batch
from .util import as_points


class CostFamily(str, Enum):
    SQUARED_EUCLIDEAN = "squared_euclidean"


@dataclass(frozen=True)
class CostSpec:
    family: CostFamily = CostFamily.SQUARED_EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "family", CostFamily(self.family))


def cost_values(cost: CostSpec, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """c(X_i, T_i) per row; squared Euclidean distance."""
    return ((X - T) ** 2).sum(axis=1)


def cost_grad_images(cost: CostSpec, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """d c(X_i, t) / d t at t = T_i, one row per point."""
    return 2.0 * (T - X)


class LossValues(NamedTuple):
    objective: float
    mmd2: float
    mean_cost: float


def _check_batch(params: MlpParams, X, Y, inv_lambda: float):
    X = as_points(X, "X")
    Y = as_points(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise InputError(f"batch sizes must match, got {X.shape[0]} and {Y.shape[0]}")
    if X.shape[0] < 2:
        raise InputError("need at least 2 points per batch for the unbiased statistic")
    if X.shape[1] != Y.shape[1] or X.shape[1] != params.input_dim:
        raise InputError(
            f"dimension mismatch: X has {X.shape[1]}, Y has {Y.shape[1]}, "
            f"map expects {params.input_dim}"
        )
    if not (np.isfinite(inv_lambda) and inv_lambda >= 0.0):
        raise InputError(f"inv_lambda must be finite and >= 0, got {inv_lambda}")
    return X, Y


def _evaluate(
    params: MlpParams,
    X: np.ndarray,
    Y: np.ndarray,
    kernel: KernelSpec,
    inv_lambda: float,
    cost: CostSpec,
    want_grad: bool,
) -> tuple[LossValues, ParamGrads | None]:
    m = X.shape[0]
    T = mlp_forward_batch(params, X)
    mean_cost = float(cost_values(cost, X, T).mean())
    if want_grad:
        sxx_full, gxx = kernel_sum_and_grad_rowsum(kernel, T, T, skip_equal_index=True)
        sxy, gxy = kernel_sum_and_grad_rowsum(kernel, T, Y)
    else:
        sxx_full = _pair_sum(kernel, T, T)
        sxy = _pair_sum(kernel, T, Y)
    # The diagonal of K(T, T) is exactly m ones; removing it leaves the
    # off-diagonal U-statistic sum.
    xx = (sxx_full - m) / (m * (m - 1))
    cross = -2.0 * sxy / (m * m)
    yy = (_pair_sum(kernel, Y, Y) - m) / (m * (m - 1))
    objective = inv_lambda * mean_cost + xx + cross
    values = LossValues(float(objective), float(xx + cross + yy), mean_cost)
    if not all(np.isfinite(v) for v in values):
        raise NumericError(f"non-finite loss values: {values}")
    if not want_grad:
        return values, None
    upstream = (inv_lambda / m) * cost_grad_images(cost, X, T)
    upstream = upstream + (2.0 / (m * (m - 1))) * gxx - (2.0 / (m * m)) * gxy
    grads = mlp_backward(params, X, upstream)
    for g in grads.arrays():
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite loss gradient")
    return values, grads


def monge_mmd_loss(
    params: MlpParams,
    X,
    Y,
    kernel: KernelSpec,
    inv_lambda: float,
    cost: CostSpec = CostSpec(),
) -> LossValues:
    """Objective, full unbiased squared MMD, and mean transport cost for one batch."""
    X, Y = _check_batch(params, X, Y, inv_lambda)
    values, _ = _evaluate(params, X, Y, kernel, inv_lambda, cost, want_grad=False)
    return values


def monge_mmd_loss_with_grad(
    params: MlpParams,
    X,
    Y,
    kernel: KernelSpec,
    inv_lambda: float,
    cost: CostSpec = CostSpec(),
) -> tuple[LossValues, ParamGrads]:
    """Loss values together with exact parameter gradients of the objective."""
    X, Y = _check_batch(params, X, Y, inv_lambda)
    values, grads = _evaluate(params, X, Y, kernel, inv_lambda, cost, want_grad=True)
    return values, grads


def monge_mmd_loss_grad(
    params: MlpParams,
    X,
    Y,
    kernel: KernelSpec,
    inv_lambda: float,
    cost: CostSpec = CostSpec(),
) -> ParamGrads:
    """Parameter gradients of the objective for one batch."""
    _, grads = monge_mmd_loss_with_grad(params, X, Y, kernel, inv_lambda, cost)
    return grads
