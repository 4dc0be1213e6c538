"""Domain-wall conversion between raw variable vectors and binary vectors.

A discretized value is encoded as a run of ones followed by zeros over
``n_bins - 1`` bits: bit i is 1 exactly when i < k, where k is the grid
index of the value. Decoding uses the bit sum, ``grid[popcount(bits)]``, so
*any* binary vector decodes to a grid point even when the wall is broken.
The quadratic penalty below is zero precisely on valid walls, which keeps
annealer outputs near decodable states without ever rejecting one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import VariableSpace, VariableSpec
from .qubo import QuboModel


@dataclass(frozen=True)
class Discretization:
    """Grid for one real/integer variable; step is None for explicit grids."""

    grid: np.ndarray
    step: float | None

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.float64)
        if g.ndim != 1 or g.size < 2:
            raise ValueError("grid must hold at least two values")
        if not np.all(np.diff(g) > 0):
            raise ValueError("grid must be strictly increasing")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @property
    def n_bins(self) -> int:
        return int(self.grid.size)

    @property
    def lower(self) -> float:
        return float(self.grid[0])

    @property
    def upper(self) -> float:
        return float(self.grid[-1])

    @classmethod
    def from_spec(cls, spec: VariableSpec) -> "Discretization":
        if spec.kind == "binary":
            return cls(grid=np.array([0.0, 1.0]), step=1.0)
        if spec.spacing == "uniform":
            grid = np.linspace(spec.lower, spec.upper, spec.n_bins)
            step = (spec.upper - spec.lower) / (spec.n_bins - 1)
            return cls(grid=grid, step=step)
        return cls(grid=np.asarray(spec.grid, dtype=np.float64), step=None)


def encode_real(x: float, disc: Discretization) -> np.ndarray:
    """Encode a value as a domain wall of length n_bins - 1.

    Uniform grids round to the nearest bin (ties go up); explicit grids
    require x to match a grid value exactly.
    """
    x = float(x)
    if x < disc.lower or x > disc.upper:
        raise ValueError(f"value {x} outside bounds ({disc.lower}, {disc.upper})")
    if disc.step is not None:
        k = int(np.floor((x - disc.lower) / disc.step + 0.5))
        k = min(k, disc.n_bins - 1)
    else:
        matches = np.nonzero(disc.grid == x)[0]
        if matches.size == 0:
            raise ValueError(f"value {x} is not on the explicit grid")
        k = int(matches[0])
    bits = np.zeros(disc.n_bins - 1, dtype=np.uint8)
    bits[:k] = 1
    return bits


def decode_real(bits: np.ndarray, disc: Discretization) -> float:
    """Decode via the bit sum; total on any binary vector of the right length."""
    b = np.asarray(bits)
    if b.shape != (disc.n_bins - 1,):
        raise ValueError(
            f"expected {disc.n_bins - 1} bits, got shape {b.shape}"
        )
    return float(disc.grid[int(np.sum(b != 0))])


def _discretizations(space: VariableSpace) -> list[Discretization]:
    return [Discretization.from_spec(v) for v in space.vars]


def encode_point(x: np.ndarray, space: VariableSpace) -> np.ndarray:
    """Concatenate per-variable encodings following the space's bit layout."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (space.dim,):
        raise ValueError(f"point length {xv.shape} does not match space dim {space.dim}")
    bits = np.zeros(space.total_bits, dtype=np.uint8)
    for i, (spec, disc) in enumerate(zip(space.vars, _discretizations(space))):
        if spec.kind == "binary":
            if xv[i] not in (0.0, 1.0):
                raise ValueError(f"binary variable {i} must be 0 or 1, got {xv[i]}")
            bits[space.offsets[i]] = int(xv[i])
        else:
            bits[space.bit_slice(i)] = encode_real(xv[i], disc)
    return bits


def decode_point(bits: np.ndarray, space: VariableSpace) -> np.ndarray:
    """Inverse of encode_point; tolerant of broken walls via sum-based decode."""
    b = np.asarray(bits)
    if b.shape != (space.total_bits,):
        raise ValueError(
            f"expected {space.total_bits} bits, got shape {b.shape}"
        )
    out = np.empty(space.dim)
    for i, disc in enumerate(_discretizations(space)):
        block = b[space.bit_slice(i)]
        if space.vars[i].kind == "binary":
            out[i] = 1.0 if block[0] else 0.0
        else:
            out[i] = decode_real(block, disc)
    return out


def domain_wall_penalty(space: VariableSpace, weight: float) -> QuboModel:
    """Quadratic penalty weight * sum of x_{i+1} (1 - x_i) over adjacent bits.

    Summed within each real/integer variable's bit block; zero iff every
    block is monotone non-increasing (a valid wall). Binary variables
    contribute nothing.
    """
    if weight <= 0:
        raise ValueError("penalty weight must be positive")
    d = space.total_bits
    quad = np.zeros((d, d))
    lin = np.zeros(d)
    for i, spec in enumerate(space.vars):
        if spec.kind == "binary" or spec.width < 2:
            continue
        start = space.offsets[i]
        for p in range(start, start + spec.width - 1):
            # x_{p+1} - x_p x_{p+1}, split across the symmetric pair
            lin[p + 1] += weight
            quad[p, p + 1] -= weight / 2.0
            quad[p + 1, p] -= weight / 2.0
    return QuboModel(quad, lin, 0.0)
