"""Quadratic unconstrained binary models: representation, algebra, evaluation.

A model is ``E(x) = x^T Q x + q^T x + c`` over ``x in {0,1}^dim`` with ``Q``
stored as an exactly symmetric dense matrix (diagonal allowed).  Because the
quadratic form counts each off-diagonal pair twice, the effective multiplier
of the product ``x_i x_j`` (i < j) is ``2 Q[i, j]``; the triplet export below
applies that doubling so downstream solvers see plain product coefficients.

The constant ``c`` is carried through the algebra for diagnostics but is
excluded from solver payloads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuboModel:
    """Symmetric dense QUBO. Arrays are copied and frozen at construction."""

    quadratic: np.ndarray
    linear: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        quad = np.array(self.quadratic, dtype=np.float64, order="C")
        lin = np.array(self.linear, dtype=np.float64)
        if quad.ndim != 2 or quad.shape[0] != quad.shape[1]:
            raise ValueError(f"quadratic must be square, got shape {quad.shape}")
        if lin.ndim != 1 or lin.shape[0] != quad.shape[0]:
            raise ValueError(
                f"linear length {lin.shape} does not match quadratic {quad.shape}"
            )
        if not np.array_equal(quad, quad.T):
            raise ValueError("quadratic matrix must be exactly symmetric")
        if not (np.all(np.isfinite(quad)) and np.all(np.isfinite(lin))):
            raise ValueError("QUBO coefficients must be finite")
        if not np.isfinite(self.constant):
            raise ValueError("QUBO constant must be finite")
        quad.setflags(write=False)
        lin.setflags(write=False)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def dim(self) -> int:
        return self.quadratic.shape[0]

    @classmethod
    def zeros(cls, dim: int) -> "QuboModel":
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0.0)


def symmetrized(matrix: np.ndarray) -> np.ndarray:
    """Return (M + M^T) / 2, bitwise symmetric for finite input."""
    m = np.asarray(matrix, dtype=np.float64)
    return (m + m.T) / 2.0


def evaluate(model: QuboModel, x: np.ndarray) -> float:
    """x^T Q x + q^T x + constant for a binary assignment x."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (model.dim,):
        raise ValueError(f"assignment length {xv.shape} does not match dim {model.dim}")
    return float(xv @ model.quadratic @ xv + model.linear @ xv + model.constant)


def add_scaled(a: QuboModel, b: QuboModel, s: float) -> QuboModel:
    """Coefficient-wise a + s*b; evaluate() distributes over the combination."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return QuboModel(
        a.quadratic + s * b.quadratic,
        a.linear + s * b.linear,
        a.constant + s * b.constant,
    )


def max_abs_coefficient(model: QuboModel) -> float:
    """Largest |coefficient| over quadratic and linear terms (constant excluded)."""
    q = float(np.max(np.abs(model.quadratic))) if model.dim else 0.0
    l = float(np.max(np.abs(model.linear))) if model.dim else 0.0
    return max(q, l)


def to_triplets(model: QuboModel) -> list[tuple[int, int, float]]:
    """Canonical upper-triangular export.

    Returns sorted (i, j, value) with i <= j; value is Q[i, i] on the
    diagonal and 2*Q[i, j] off it, so each triplet is the full multiplier of
    the corresponding bit product. Exact zeros are omitted.
    """
    out: list[tuple[int, int, float]] = []
    quad = model.quadratic
    for i in range(model.dim):
        if quad[i, i] != 0.0:
            out.append((i, i, float(quad[i, i])))
        row = quad[i]
        for j in range(i + 1, model.dim):
            if row[j] != 0.0:
                out.append((i, j, float(2.0 * row[j])))
    return out


def from_triplets(
    dim: int,
    triplets: list[tuple[int, int, float]],
    linear: np.ndarray | None = None,
    constant: float = 0.0,
) -> QuboModel:
    """Rebuild a model from the canonical triplet export."""
    quad = np.zeros((dim, dim))
    for i, j, value in triplets:
        if not (0 <= i <= j < dim):
            raise ValueError(f"triplet index ({i}, {j}) out of range for dim {dim}")
        if i == j:
            quad[i, i] = value
        else:
            quad[i, j] += value / 2.0
            quad[j, i] += value / 2.0
    lin = np.zeros(dim) if linear is None else np.asarray(linear, dtype=np.float64)
    return QuboModel(quad, lin, constant)


def fold_diagonal(model: QuboModel) -> QuboModel:
    """Move diagonal quadratic terms into the linear vector (x_i^2 = x_i)."""
    diag = np.diag(model.quadratic).copy()
    quad = model.quadratic.copy()
    np.fill_diagonal(quad, 0.0)
    return QuboModel(quad, model.linear + diag, model.constant)
