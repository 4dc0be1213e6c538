"""Artificial landscapes and named assessment conditions.

The two landscapes accept vectors of any dimension (Rosenbrock needs at
least two). Binary inputs are lifted to reals as {0.0, 1.0} and evaluated
directly. For combinatorial runs, `make_flipped` complements a random half
of the input bits first, which moves the Rastrigin optimum away from the
all-zero corner (to the indicator vector of the flipped index set) without
changing the optimal value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .problem import OptimizerConfig, VariableSpace, VariableSpec, build_space

_MASK_STREAM = 0xF11B


def rosenbrock(x: np.ndarray) -> float:
    """sum_i (1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2; zero at (1, ..., 1)."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.size < 2:
        raise ValueError("rosenbrock needs at least two coordinates")
    head, tail = xv[:-1], xv[1:]
    return float(np.sum((1.0 - head) ** 2 + 100.0 * (tail - head**2) ** 2))


def rastrigin(x: np.ndarray) -> float:
    """10 n + sum_i x_i^2 - 10 cos(2 pi x_i); zero at the origin."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.size < 1:
        raise ValueError("rastrigin needs at least one coordinate")
    return float(10.0 * xv.size + np.sum(xv**2 - 10.0 * np.cos(2.0 * np.pi * xv)))


@dataclass(frozen=True)
class FlipMask:
    """Indices (1-based) of the floor(d/2) inputs that get complemented."""

    indices: frozenset[int]
    d: int
    seed: int

    def __post_init__(self):
        if len(self.indices) != self.d // 2:
            raise ValueError(
                f"mask must hold {self.d // 2} indices, got {len(self.indices)}"
            )
        if any(i < 1 or i > self.d for i in self.indices):
            raise ValueError("mask indices must lie in [1, d]")

    @property
    def zero_based(self) -> np.ndarray:
        return np.array(sorted(i - 1 for i in self.indices), dtype=np.intp)


def make_mask(d: int, seed: int) -> FlipMask:
    """Draw floor(d/2) distinct 1-based indices from a dedicated RNG stream."""
    if d < 2:
        raise ValueError("flip mask needs d >= 2")
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**63 - 1), _MASK_STREAM]))
    picked = rng.choice(np.arange(1, d + 1), size=d // 2, replace=False)
    return FlipMask(indices=frozenset(int(i) for i in picked), d=d, seed=seed)


@dataclass(frozen=True)
class FlippedLandscape:
    """Black box evaluating base(x with masked bits complemented)."""

    base: Callable[[np.ndarray], float]
    mask: FlipMask

    def __call__(self, x: np.ndarray) -> float:
        xv = np.array(x, dtype=np.float64)
        idx = self.mask.zero_based
        xv[idx] = 1.0 - xv[idx]
        return self.base(xv)


def make_flipped(
    base: Callable[[np.ndarray], float],
    d: int,
    seed: int,
    mask: FlipMask | None = None,
) -> FlippedLandscape:
    """Flip a random half of the inputs before evaluating `base`.

    Applying the same mask twice recovers `base` pointwise. For Rastrigin
    over binary inputs the flipped optimum is the indicator vector of the
    mask (value 0); for Rosenbrock the optimum pre-flip stays all-ones.
    """
    if mask is None:
        mask = make_mask(d, seed)
    return FlippedLandscape(base=base, mask=mask)


LANDSCAPES: dict[str, Callable[[np.ndarray], float]] = {
    "rosenbrock": rosenbrock,
    "rastrigin": rastrigin,
}

# name -> (d, kind, (lower, upper), n_bins); binary rows carry no bounds/grid
_PRESET_ROWS: dict[str, tuple[int, str, tuple[float, float] | None, int | None]] = {
    "r5n": (5, "real", (-3.0, 3.0), 301),
    "r5": (5, "real", (-3.0, 3.0), 61),
    "r10": (10, "real", (-3.0, 3.0), 61),
    "r20": (20, "real", (-3.0, 3.0), 61),
    "r40": (40, "real", (-3.0, 3.0), 61),
    "r80": (80, "real", (-3.0, 3.0), 61),
    "b40": (40, "binary", None, None),
    "b80": (80, "binary", None, None),
    "b160": (160, "binary", None, None),
    "b320": (320, "binary", None, None),
    "b640": (640, "binary", None, None),
}

PRESET_NAMES = tuple(_PRESET_ROWS)


def preset(name: str) -> tuple[VariableSpace, OptimizerConfig]:
    """Named assessment condition: the variable space plus default settings.

    The returned config uses the reference defaults (n_init=10, beta=0,
    lambda=1, gamma=0, alpha_exp=1) and a 5-second anneal time budget; batch
    runners usually swap the budget for a deterministic sweep count.
    """
    if name not in _PRESET_ROWS:
        raise KeyError(
            f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}"
        )
    d, kind, bounds, n_bins = _PRESET_ROWS[name]
    if kind == "binary":
        specs = [VariableSpec.binary() for _ in range(d)]
    else:
        lower, upper = bounds
        specs = [VariableSpec.real(lower, upper, n_bins) for _ in range(d)]
    space = build_space(specs)
    cfg = OptimizerConfig(budget_ms=5000.0)
    return space, cfg
