"""Symmetric strictly positive-definite kernels and their spatial gradients.

Two families are provided, both bounded in (0, 1]:

* Gaussian:  K(x, y) = exp(-alpha * |x - y|^2)
* Matern at half-integer orders 1/2, 3/2, 5/2 with lengthscale ell,
  using the closed forms (r = |x - y|):

    1/2:  exp(-r/ell)
    3/2:  (1 + sqrt(3) r/ell) exp(-sqrt(3) r/ell)
    5/2:  (1 + sqrt(5) r/ell + 5 r^2/(3 ell^2)) exp(-sqrt(5) r/ell)

For every family the spatial gradient factors as
``dK/dx (x, y) = coeff(r) * (x - y)``; ``kernel_grad_x_rowsum`` uses that
factorization to batch gradient sums uniformly across families.

All arithmetic is float64. Gram computation walks row blocks in a fixed
order, so results do not depend on how callers parallelize over rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError
from .util import as_points

# Row blocks are sized so a block of the pairwise difference tensor stays
# around 128 MiB regardless of the number of columns.
_BLOCK_ELEMS = 1 << 24


class KernelFamily(str, Enum):
    GAUSSIAN = "gaussian"
    MATERN = "matern"


class MaternOrder(str, Enum):
    HALF = "half"
    THREE_HALVES = "three_halves"
    FIVE_HALVES = "five_halves"


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its hyperparameters.

    ``alpha`` is the Gaussian bandwidth exponent; ``matern_order`` and
    ``lengthscale`` apply to the Matern family only.
    """

    family: KernelFamily = KernelFamily.GAUSSIAN
    alpha: float = 1.0
    matern_order: MaternOrder = MaternOrder.THREE_HALVES
    lengthscale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        object.__setattr__(self, "matern_order", MaternOrder(self.matern_order))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InputError(f"kernel alpha must be a positive finite real, got {self.alpha}")
        if not (math.isfinite(self.lengthscale) and self.lengthscale > 0):
            raise InputError(
                f"kernel lengthscale must be a positive finite real, got {self.lengthscale}"
            )


def _eval_from_sqdist(spec: KernelSpec, sq: np.ndarray) -> np.ndarray:
    """Kernel values from squared distances (element-wise)."""
    if spec.family is KernelFamily.GAUSSIAN:
        return np.exp(-spec.alpha * sq)
    r = np.sqrt(sq)
    ell = spec.lengthscale
    if spec.matern_order is MaternOrder.HALF:
        return np.exp(-r / ell)
    if spec.matern_order is MaternOrder.THREE_HALVES:
        z = (math.sqrt(3.0) / ell) * r
        return (1.0 + z) * np.exp(-z)
    z = (math.sqrt(5.0) / ell) * r
    return (1.0 + z + z * z / 3.0) * np.exp(-z)


def _grad_coeff_from_sqdist(spec: KernelSpec, sq: np.ndarray) -> np.ndarray:
    """Coefficient c(r) with dK/dx = c(r) * (x - y), element-wise.

    Matern order 1/2 diverges at r = 0; the caller is responsible for
    coincident points there.
    """
    if spec.family is KernelFamily.GAUSSIAN:
        return -2.0 * spec.alpha * np.exp(-spec.alpha * sq)
    r = np.sqrt(sq)
    ell = spec.lengthscale
    if spec.matern_order is MaternOrder.HALF:
        with np.errstate(divide="ignore"):
            return -np.exp(-r / ell) / (ell * r)
    if spec.matern_order is MaternOrder.THREE_HALVES:
        z = (math.sqrt(3.0) / ell) * r
        return -(3.0 / ell**2) * np.exp(-z)
    z = (math.sqrt(5.0) / ell) * r
    return -(5.0 / (3.0 * ell**2)) * (1.0 + z) * np.exp(-z)


def _eval_and_coeff_from_sqdist(spec: KernelSpec, sq: np.ndarray):
    """Kernel values and gradient coefficients sharing one exponential.

    Same results as calling ``_eval_from_sqdist`` and
    ``_grad_coeff_from_sqdist`` separately (each expression below is
    algebraically identical, term for term); the training loop needs both
    per batch and the exponential dominates the cost.
    """
    ell = spec.lengthscale
    if spec.family is KernelFamily.GAUSSIAN:
        k = np.exp(-spec.alpha * sq)
        return k, -2.0 * spec.alpha * k
    r = np.sqrt(sq)
    if spec.matern_order is MaternOrder.HALF:
        k = np.exp(-r / ell)
        with np.errstate(divide="ignore"):
            return k, -k / (ell * r)
    if spec.matern_order is MaternOrder.THREE_HALVES:
        z = (math.sqrt(3.0) / ell) * r
        e = np.exp(-z)
        return (1.0 + z) * e, -(3.0 / ell**2) * e
    z = (math.sqrt(5.0) / ell) * r
    e = np.exp(-z)
    return (1.0 + z + z * z / 3.0) * e, -(5.0 / (3.0 * ell**2)) * (1.0 + z) * e


def _as_vector_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise InputError(f"expected 1-d points, got shapes {x.shape} and {y.shape}")
    if x.shape != y.shape:
        raise InputError(f"point dimensions differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 1:
        raise InputError("points must have dimension >= 1")
    return x, y


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate K(x, y) for two points of equal dimension.

    Symmetric in its arguments and bounded in (0, 1]; K(x, x) == 1 exactly.
    """
    x, y = _as_vector_pair(x, y)
    # Same expression and reduction as _sqdist_rows, so Gram entries and
    # scalar evaluations agree bit-for-bit.
    sq = ((x - y) ** 2).sum()
    return float(_eval_from_sqdist(spec, sq))


def kernel_grad_x(spec: KernelSpec, x, y) -> np.ndarray:
    """Gradient of K(x, y) with respect to x.

    For the Gaussian this is -2*alpha*(x - y)*K(x, y). Matern order 1/2 is
    not differentiable at x == y and raises there.
    """
    x, y = _as_vector_pair(x, y)
    diff = x - y
    sq = (diff**2).sum()
    if sq == 0.0:
        if spec.family is KernelFamily.MATERN and spec.matern_order is MaternOrder.HALF:
            raise InputError("Matern order 1/2 has no gradient at coincident points")
        return np.zeros_like(diff)
    coeff = float(_grad_coeff_from_sqdist(spec, np.float64(sq)))
    return coeff * diff


def _sqdist_rows(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Squared distances between every row of X and every row of Y.

    Computed from explicit differences (not the dot-product identity) so that
    coincident points give exactly 0 and Gram entries match kernel_eval
    bit-for-bit.
    """
    return ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)


def _row_blocks(n_rows: int, n_cols: int, d: int):
    block = max(1, _BLOCK_ELEMS // max(1, n_cols * d))
    for start in range(0, n_rows, block):
        yield start, min(start + block, n_rows)


def kernel_gram(spec: KernelSpec, X, Y) -> np.ndarray:
    """Gram matrix with entry (i, j) = kernel_eval(spec, X[i], Y[j]).

    Gram(X, X) is symmetric positive semidefinite (strictly positive
    definite for distinct points).
    """
    X = as_points(X, "X")
    Y = as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"point dimensions differ: {X.shape[1]} vs {Y.shape[1]}")
    out = np.empty((X.shape[0], Y.shape[0]), dtype=np.float64)
    for i0, i1 in _row_blocks(X.shape[0], Y.shape[0], X.shape[1]):
        out[i0:i1] = _eval_from_sqdist(spec, _sqdist_rows(X[i0:i1], Y))
    return out


def kernel_grad_x_rowsum(
    spec: KernelSpec, X, Y, *, skip_equal_index: bool = False
) -> np.ndarray:
    """Row i of the result is sum_j dK/dx (X[i], Y[j]).

    ``skip_equal_index`` omits the j == i pair (for U-statistic sums where X
    and Y are the same set). Coincident pairs contribute a zero gradient for
    the smooth families; Matern order 1/2 raises on any included coincident
    pair, where its gradient is undefined.

    Walks row blocks in a fixed order, so each row's reduction order is
    independent of how callers parallelize over rows.
    """
    X = as_points(X, "X")
    Y = as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"point dimensions differ: {X.shape[1]} vs {Y.shape[1]}")
    if skip_equal_index and X.shape[0] != Y.shape[0]:
        raise InputError("skip_equal_index requires equally sized sets")
    half = spec.family is KernelFamily.MATERN and spec.matern_order is MaternOrder.HALF
    out = np.empty_like(X)
    for i0, i1 in _row_blocks(X.shape[0], Y.shape[0], X.shape[1]):
        block = X[i0:i1]
        sq = _sqdist_rows(block, Y)
        diag = (np.arange(i1 - i0), np.arange(i0, i1))
        zero = sq == 0.0
        if skip_equal_index:
            zero[diag] = True
        if half:
            included_zero = zero.copy()
            if skip_equal_index:
                included_zero[diag] = False
            if included_zero.any():
                raise InputError("Matern order 1/2 has no gradient at coincident points")
        coeff = _grad_coeff_from_sqdist(spec, sq)
        # At zero distance the pair's gradient contribution vanishes (smooth
        # families) or the pair is excluded; either way the coefficient must
        # not pollute the row sums.
        coeff[zero] = 0.0
        out[i0:i1] = coeff.sum(axis=1)[:, None] * block - coeff @ Y
    return out


def kernel_sum_and_grad_rowsum(
    spec: KernelSpec, X, Y, *, skip_equal_index: bool = False
) -> tuple[float, np.ndarray]:
    """Total kernel sum over all pairs together with row-wise gradient sums.

    Returns ``(sum_{ij} K(X_i, Y_j), G)`` with ``G[i] = sum_j dK/dx(X_i, Y_j)``.
    The sum always runs over every pair (a U-statistic caller subtracts the
    exact diagonal itself); ``skip_equal_index`` drops the j == i pairs from
    the gradient sums only. One batch step needs both quantities, and they
    share the distance matrix and exponential, so computing them together
    nearly halves the kernel work. Values match ``kernel_gram(...).sum()``
    and ``kernel_grad_x_rowsum``.
    """
    X = as_points(X, "X")
    Y = as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"point dimensions differ: {X.shape[1]} vs {Y.shape[1]}")
    if skip_equal_index and X.shape[0] != Y.shape[0]:
        raise InputError("skip_equal_index requires equally sized sets")
    half = spec.family is KernelFamily.MATERN and spec.matern_order is MaternOrder.HALF
    out = np.empty_like(X)
    total = 0.0
    for i0, i1 in _row_blocks(X.shape[0], Y.shape[0], X.shape[1]):
        block = X[i0:i1]
        sq = _sqdist_rows(block, Y)
        diag = (np.arange(i1 - i0), np.arange(i0, i1))
        zero = sq == 0.0
        if skip_equal_index:
            zero[diag] = True
        if half:
            included_zero = zero.copy()
            if skip_equal_index:
                included_zero[diag] = False
            if included_zero.any():
                raise InputError("Matern order 1/2 has no gradient at coincident points")
        k, coeff = _eval_and_coeff_from_sqdist(spec, sq)
        coeff[zero] = 0.0
        total += float(k.sum())
        out[i0:i1] = coeff.sum(axis=1)[:, None] * block - coeff @ Y
    return total, out
