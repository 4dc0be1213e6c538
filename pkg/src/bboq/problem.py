"""Core value types: variable spaces, samples, datasets, run configuration.

A decision variable is either a standalone binary bit or a bounded
real/integer value discretized onto a grid of ``n_bins`` points. After
encoding, a real/integer variable occupies ``n_bins - 1`` consecutive bits
and a binary variable occupies one, so the full binary layout is a
concatenation of per-variable bit blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

AUTO = "auto"


class ConfigError(ValueError):
    """Raised by validate_config; carries the full list of violations."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid configuration: " + "; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class VariableSpec:
    """One decision variable.

    kind     -- "binary", "real", or "integer"
    lower    -- lower bound (inclusive); 0 for binary
    upper    -- upper bound (inclusive); 1 for binary
    n_bins   -- grid size for real/integer variables (>= 2)
    spacing  -- "uniform" or "explicit"
    grid     -- explicit grid values (strictly increasing, endpoints = bounds)
    """

    kind: str
    lower: float = 0.0
    upper: float = 1.0
    n_bins: int = 2
    spacing: str = "uniform"
    grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("binary", "real", "integer"):
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind == "binary":
            return
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be >= 2, got {self.n_bins}")
        if not self.lower < self.upper:
            raise ValueError(
                f"lower bound must be below upper bound, got ({self.lower}, {self.upper})"
            )
        if self.spacing == "uniform":
            if self.grid is not None:
                raise ValueError("uniform spacing does not take an explicit grid")
        elif self.spacing == "explicit":
            if self.grid is None or len(self.grid) != self.n_bins:
                raise ValueError("explicit spacing requires a grid of length n_bins")
            g = np.asarray(self.grid, dtype=np.float64)
            if not np.all(np.diff(g) > 0):
                raise ValueError("explicit grid must be strictly increasing")
            if g[0] != self.lower or g[-1] != self.upper:
                raise ValueError("explicit grid must start at lower and end at upper")
        else:
            raise ValueError(f"unknown spacing {self.spacing!r}")

    @classmethod
    def binary(cls) -> "VariableSpec":
        return cls(kind="binary")

    @classmethod
    def real(cls, lower: float, upper: float, n_bins: int) -> "VariableSpec":
        return cls(kind="real", lower=float(lower), upper=float(upper), n_bins=int(n_bins))

    @classmethod
    def real_grid(cls, values: Sequence[float]) -> "VariableSpec":
        values = tuple(float(v) for v in values)
        return cls(
            kind="real",
            lower=values[0],
            upper=values[-1],
            n_bins=len(values),
            spacing="explicit",
            grid=values,
        )

    @classmethod
    def integer(cls, lower: int, upper: int) -> "VariableSpec":
        """Integers are a real variable on an explicit grid of consecutive ints."""
        values = tuple(float(v) for v in range(int(lower), int(upper) + 1))
        if len(values) < 2:
            raise ValueError("integer variable needs at least two values")
        return cls(
            kind="integer",
            lower=values[0],
            upper=values[-1],
            n_bins=len(values),
            spacing="explicit",
            grid=values,
        )

    @property
    def width(self) -> int:
        """Number of binary decision bits this variable occupies."""
        return 1 if self.kind == "binary" else self.n_bins - 1


@dataclass(frozen=True)
class VariableSpace:
    """Ordered variable declarations plus the binary layout after encoding."""

    vars: tuple[VariableSpec, ...]
    offsets: tuple[int, ...]
    total_bits: int

    @property
    def dim(self) -> int:
        return len(self.vars)

    def bit_slice(self, index: int) -> slice:
        """Contiguous bit range claimed by variable `index`."""
        start = self.offsets[index]
        return slice(start, start + self.vars[index].width)

    @property
    def is_all_binary(self) -> bool:
        return all(v.kind == "binary" for v in self.vars)


def build_space(specs: Iterable[VariableSpec]) -> VariableSpace:
    """Assign each variable a contiguous bit range and compute total_bits."""
    specs = tuple(specs)
    if not specs:
        raise ValueError("variable list must not be empty")
    offsets = []
    cursor = 0
    for spec in specs:
        offsets.append(cursor)
        cursor += spec.width
    return VariableSpace(vars=specs, offsets=tuple(offsets), total_bits=cursor)


@dataclass(frozen=True)
class Sample:
    """One evaluated input-output pair.

    x_bits holds the encoded binary input, x_decoded the raw variable values,
    y_raw the black-box output and y_model the (possibly transformed) value
    actually fed to the surrogate.
    """

    x_bits: np.ndarray
    x_decoded: np.ndarray
    y_raw: float
    y_model: float

    def __post_init__(self):
        bits = np.array(self.x_bits, dtype=np.uint8)
        decoded = np.array(self.x_decoded, dtype=np.float64)
        bits.setflags(write=False)
        decoded.setflags(write=False)
        object.__setattr__(self, "x_bits", bits)
        object.__setattr__(self, "x_decoded", decoded)
        object.__setattr__(self, "y_raw", float(self.y_raw))
        object.__setattr__(self, "y_model", float(self.y_model))


class Dataset:
    """Append-only ordered collection of samples.

    Insertion order is preserved: index i is the i-th evaluated pair and
    matches row i of the surrogate's Gram matrices.
    """

    def __init__(self, samples: Iterable[Sample] = ()):
        self._samples: list[Sample] = []
        self._seen: set[bytes] = set()
        for s in samples:
            self.append(s)

    def append(self, sample: Sample) -> None:
        self._samples.append(sample)
        self._seen.add(sample.x_bits.tobytes())

    @property
    def n(self) -> int:
        return len(self._samples)

    def __len__(self) -> int:
        return len(self._samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self._samples)

    def __getitem__(self, i: int) -> Sample:
        return self._samples[i]

    def contains_bits(self, bits: np.ndarray) -> bool:
        return np.asarray(bits, dtype=np.uint8).tobytes() in self._seen

    def y_model_vector(self) -> np.ndarray:
        return np.array([s.y_model for s in self._samples])

    def y_raw_vector(self) -> np.ndarray:
        return np.array([s.y_raw for s in self._samples])

    def bits_matrix(self) -> np.ndarray:
        return np.array([s.x_bits for s in self._samples], dtype=np.float64)


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for one optimization run.

    Exactly one of budget_sweeps / budget_ms should be set; validate_config
    fills in the deterministic sweep default when both are left unset.
    alpha_exp=None disables the output transform. The domain-wall penalty
    weight is per-cycle "auto" by default (scaled off the acquisition
    coefficients) or a fixed positive number.
    """

    n_init: int = 10
    n_cycles: int = 100
    beta: float = 0.0
    lam: float = 1.0
    gamma: float = 0.0
    alpha_exp: float | None = 1.0
    budget_sweeps: int | None = None
    budget_ms: float | None = None
    seed: int = 0
    domain_wall_penalty_weight: float | str = AUTO
    solver: str = "sa"
    n_restarts: int = 4
    pool_size: int = 10
    remote_endpoint: str | None = None


DEFAULT_BUDGET_SWEEPS = 2000


def validate_config(cfg: OptimizerConfig, space: VariableSpace) -> OptimizerConfig:
    """Check a config against a space; resolve auto fields.

    Returns a config with the solver budget resolved (deterministic sweep
    default when unset). Raises ConfigError listing every violation.
    """
    violations: list[str] = []
    if cfg.lam <= 0:
        violations.append("lambda must be positive")
    if cfg.alpha_exp is not None and cfg.alpha_exp <= 0:
        violations.append("alpha_exp must be positive when the transform is enabled")
    if cfg.n_init < 1:
        violations.append("n_init must be at least 1")
    if cfg.n_cycles < 1:
        violations.append("n_cycles must be at least 1")
    if cfg.beta < 0:
        violations.append("beta must be non-negative")
    if cfg.gamma < 0:
        violations.append("gamma must be non-negative")
    if cfg.budget_sweeps is not None and cfg.budget_ms is not None:
        violations.append("set only one of budget_sweeps / budget_ms")
    if cfg.budget_sweeps is not None and cfg.budget_sweeps < 0:
        violations.append("budget_sweeps must be non-negative")
    if cfg.budget_ms is not None and cfg.budget_ms <= 0:
        violations.append("budget_ms must be positive")
    if cfg.n_restarts < 1:
        violations.append("n_restarts must be at least 1")
    if cfg.pool_size < 1:
        violations.append("pool_size must be at least 1")
    w = cfg.domain_wall_penalty_weight
    if isinstance(w, str):
        if w != AUTO:
            violations.append("domain_wall_penalty_weight must be 'auto' or a positive number")
    elif w <= 0:
        violations.append("domain_wall_penalty_weight must be positive")
    if cfg.solver not in ("sa", "exhaustive", "remote"):
        violations.append(f"unknown solver {cfg.solver!r}")
    if cfg.solver == "remote" and not cfg.remote_endpoint:
        violations.append("remote solver requires an endpoint")
    if cfg.solver == "remote" and cfg.budget_ms is None:
        violations.append("remote solver requires a budget_ms time budget")
    if cfg.solver == "exhaustive" and space.total_bits > 24:
        violations.append(
            f"exhaustive solver is limited to 24 bits (space has {space.total_bits})"
        )
    if violations:
        raise ConfigError(violations)
    if cfg.budget_sweeps is None and cfg.budget_ms is None:
        cfg = replace(cfg, budget_sweeps=DEFAULT_BUDGET_SWEEPS)
    return cfg


BlackBox = Callable[[np.ndarray], float]
