"""Polynomial propagation stacks and per-node coefficient combination.

Three scalar bases are supported on the Laplacian spectrum [0, 2]:

* monomial      p_k(lambda) = lambda^k                  on L
* chebyshev     T_k(2 lambda / lambda_max - 1)          on the scaled Laplacian
* bernstein     C(K,k) (1 - lambda/2)^(K-k) (lambda/2)^k on L

A propagation stack holds the K+1 matrices p_k(operator) @ X; combining it
with an n x (K+1) coefficient matrix evaluates one filter per node without
ever materializing a dense operator.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .graph import (NORMALIZED_LAPLACIAN, SCALED_LAPLACIAN, SparseOperator,
                    spmm)

BASES = ("monomial", "chebyshev", "bernstein")


@dataclass(frozen=True)
class PropagationStack:
    """layers[k] = p_k(operator) @ X; all layers share X's shape."""

    basis: str
    order: int
    layers: list

    @property
    def shape(self):
        return self.layers[0].shape


@dataclass(frozen=True)
class CoefficientMatrix:
    """Per-node filter coefficients, one row of length K+1 per node."""

    psi: np.ndarray

    @property
    def order(self) -> int:
        return self.psi.shape[1] - 1


def _check_basis_operator(basis: str, op: SparseOperator) -> None:
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")
    expected = SCALED_LAPLACIAN if basis == "chebyshev" else NORMALIZED_LAPLACIAN
    if op.kind != expected:
        raise ValueError(f"{basis} propagation needs a {expected} operator, "
                         f"got {op.kind}")


def bernstein_operators(op: SparseOperator) -> tuple:
    """The two factors of the degree-split basis: (I - L/2, L/2)."""
    high = SparseOperator(op.n, op.row_offsets, op.col_indices,
                          0.5 * op.values, op.kind)
    vals = -0.5 * op.values
    low = SparseOperator(op.n, op.row_offsets, op.col_indices, vals, op.kind)
    for i in range(op.n):
        lo, hi = op.row_offsets[i], op.row_offsets[i + 1]
        k = lo + np.searchsorted(op.col_indices[lo:hi], i)
        if k >= hi or op.col_indices[k] != i:
            raise ValueError(f"operator row {i} has no structural diagonal")
        vals[k] += 1.0
    return low, high


def propagate(basis: str, op: SparseOperator, x: np.ndarray,
              order: int) -> PropagationStack:
    """Build the K+1 propagated layers p_k(op) @ x.

    Monomial and chebyshev stacks start at layers[0] == x; for bernstein,
    layers[0] is the k=0 basis term (I - L/2)^K x, not x itself.
    """
    _check_basis_operator(basis, op)
    if order < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x must be a dense n x c matrix")
    if x.shape[0] != op.n:
        raise ValueError("x row count does not match operator dimension")

    if basis == "monomial":
        layers = [x]
        for _ in range(order):
            layers.append(spmm(op, layers[-1]))
    elif basis == "chebyshev":
        layers = [x]
        if order >= 1:
            layers.append(spmm(op, x))
        for _ in range(2, order + 1):
            layers.append(2.0 * spmm(op, layers[-1]) - layers[-2])
    else:  # bernstein
        low, high = bernstein_operators(op)
        powers = [x]
        for _ in range(order):
            powers.append(spmm(high, powers[-1]))
        layers = []
        for k in range(order + 1):
            term = powers[k]
            for _ in range(order - k):
                term = spmm(low, term)
            layers.append(comb(order, k) * term)
    return PropagationStack(basis=basis, order=order, layers=layers)


def combine(stack: PropagationStack, psi) -> np.ndarray:
    """Per-node combination: output row i = sum_k psi[i, k] * layers[k] row i."""
    coeffs = psi.psi if isinstance(psi, CoefficientMatrix) else np.asarray(psi)
    if coeffs.ndim != 2 or coeffs.shape[1] != stack.order + 1:
        raise ValueError(f"psi must be n x {stack.order + 1}")
    if coeffs.shape[0] != stack.shape[0]:
        raise ValueError("psi row count does not match stack")
    out = np.zeros(stack.shape)
    for k, layer in enumerate(stack.layers):
        out += coeffs[:, k:k + 1] * layer
    return out


def frequency_response(basis: str, coeffs, lambda_grid,
                       lambda_max: float = 2.0) -> np.ndarray:
    """Scalar filter response sum_k gamma_k p_k(lambda) on a grid in [0, 2]."""
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")
    coeffs = np.asarray(coeffs, dtype=np.float64)
    grid = np.asarray(lambda_grid, dtype=np.float64)
    # allow eigenvalue-sized rounding just outside the nominal spectrum
    if grid.size and (grid.min() < -1e-9 or grid.max() > 2.0 + 1e-9):
        raise ValueError("lambda grid must lie in [0, 2]")
    grid = np.clip(grid, 0.0, 2.0)
    order = coeffs.size - 1
    return basis_matrix(basis, order, grid, lambda_max) @ coeffs


def basis_matrix(basis: str, order: int, grid: np.ndarray,
                 lambda_max: float = 2.0) -> np.ndarray:
    """Tabulate p_k(lambda) for k = 0..K over the grid; shape (len(grid), K+1)."""
    grid = np.asarray(grid, dtype=np.float64)
    cols = np.empty((grid.size, order + 1))
    if basis == "monomial":
        for k in range(order + 1):
            cols[:, k] = grid ** k
    elif basis == "chebyshev":
        t = 2.0 * grid / lambda_max - 1.0
        cols[:, 0] = 1.0
        if order >= 1:
            cols[:, 1] = t
        for k in range(2, order + 1):
            cols[:, k] = 2.0 * t * cols[:, k - 1] - cols[:, k - 2]
    elif basis == "bernstein":
        half = grid / 2.0
        for k in range(order + 1):
            cols[:, k] = comb(order, k) * (1.0 - half) ** (order - k) * half ** k
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return cols
