"""Exponential compression of black-box outputs before surrogate fitting.

Raw outputs with a wide dynamic range swamp a least-squares fit; mapping
``y -> -exp(-(y + shift) / c_m)`` compresses large values toward zero while
magnifying differences among the small values a minimizer cares about. The
map is strictly increasing, so the argmin over any finite sample set is
unchanged.

``shift`` makes the initial outputs non-negative (it is ``-min(y_init)``
when that minimum is negative, else 0) and ``c_m`` is ``alpha_exp`` times
the mean of the shifted initial outputs. Both are frozen at fit time;
re-fitting mid-run would silently change the surrogate's target scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Exponent cap keeping -exp(.) finite for inputs far below the initial minimum.
_EXP_CAP = 700.0


@dataclass(frozen=True)
class TransformState:
    enabled: bool
    c_m: float
    shift: float

    def __post_init__(self):
        if self.enabled and self.c_m <= 0:
            raise ValueError("c_m must be positive when the transform is enabled")
        if self.shift < 0:
            raise ValueError("shift must be non-negative")

    @classmethod
    def identity(cls) -> "TransformState":
        return cls(enabled=False, c_m=1.0, shift=0.0)


def fit_transform(y_init: np.ndarray, alpha_exp: float) -> TransformState:
    """Fit shift and c_m from the initial outputs.

    Degenerate initial data (shifted mean ~ 0, e.g. constant outputs at or
    below zero) disables the transform instead of dividing by zero.
    """
    y = np.asarray(y_init, dtype=np.float64)
    if y.size == 0:
        raise ValueError("y_init must not be empty")
    if alpha_exp <= 0:
        raise ValueError("alpha_exp must be positive")
    shift = max(0.0, -float(np.min(y)))
    shifted_mean = float(np.mean(y + shift))
    if shifted_mean <= 1e-12:
        return TransformState.identity()
    return TransformState(enabled=True, c_m=alpha_exp * shifted_mean, shift=shift)


def apply(state: TransformState, y: float) -> float:
    """-exp(-(y + shift) / c_m) when enabled; identity otherwise.

    The exponent is capped so values far below the initial minimum stay
    finite; far above it the result underflows to -0.0.
    """
    if not state.enabled:
        return float(y)
    exponent = -(float(y) + state.shift) / state.c_m
    return -math.exp(min(exponent, _EXP_CAP))
