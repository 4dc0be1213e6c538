"""Serial optimization loop: fit surrogate, solve its QUBO, evaluate, append.

One run executes:

0. draw ``n_init`` random grid points, evaluate the black box, fit the
   output transform on those initial outputs (then freeze it), and fit the
   surrogate on the transformed values;
1. each cycle, assemble the acquisition QUBO (plus the domain-wall penalty
   when real variables are present), hand it to the configured solver,
2. pick an unevaluated candidate from the solver's pool,
3. decode it and evaluate the black box,
4. transform the output and grow the surrogate by one sample.

Cycle indices in the history follow the plotting convention for initial
data: the initial samples occupy cycles ``-(n_init-1) .. 0`` (cycle 0 is
the state of knowledge before any optimization step) and optimization
cycles run ``1 .. n_cycles``. ``f_best_so_far`` is the running minimum of
raw outputs, so it is non-increasing across the whole history.

Proposed assignments are canonicalized by a decode/encode round trip before
bookkeeping, so duplicate detection works on evaluated points rather than
on raw (possibly wall-breaking) solver bit patterns.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import encoding, surrogate, transform
from .problem import (
    BlackBox,
    Dataset,
    OptimizerConfig,
    Sample,
    VariableSpace,
    validate_config,
)
from .qubo import add_scaled, max_abs_coefficient
from .solver import SolveRequest, SolveResult, solve_exhaustive, solve_remote, solve_sa


@dataclass(frozen=True)
class CycleRecord:
    """One history row; negative cycles hold the initial random samples."""

    cycle: int
    x_new: np.ndarray
    y_new_raw: float
    f_best_so_far: float
    x_best_so_far: np.ndarray
    correlation: float | None
    t_model_ms: float
    t_solve_ms: float
    t_eval_ms: float


@dataclass
class RunHistory:
    """Complete record of one run: n_init + n_cycles rows plus the outcome."""

    records: list[CycleRecord]
    config: OptimizerConfig
    seed: int
    best_x: np.ndarray
    best_y: float
    duplicate_warning: bool = False


class RunAbortedError(RuntimeError):
    """Black-box evaluation failed; `history` holds the completed cycles."""

    def __init__(self, message: str, history: RunHistory):
        super().__init__(message)
        self.history = history


def sample_initial(
    space: VariableSpace, n_init: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Uniform random grid points, pairwise distinct in encoded form.

    Collisions are resampled up to 100 * n_init times; after that the
    duplicates are kept and a warning is issued (tiny spaces cannot supply
    enough distinct points).
    """
    if n_init < 1:
        raise ValueError("n_init must be at least 1")
    points: list[np.ndarray] = []
    seen: set[bytes] = set()
    attempts = 0
    max_attempts = 100 * n_init
    while len(points) < n_init:
        point = np.empty(space.dim)
        for i, spec in enumerate(space.vars):
            if spec.kind == "binary":
                point[i] = float(rng.integers(0, 2))
            else:
                disc = encoding.Discretization.from_spec(spec)
                point[i] = float(disc.grid[rng.integers(0, disc.n_bins)])
        key = encoding.encode_point(point, space).tobytes()
        attempts += 1
        if key in seen and attempts <= max_attempts:
            continue
        if key in seen:
            warnings.warn(
                "initial sampling exhausted resample attempts; keeping duplicates",
                stacklevel=2,
            )
        seen.add(key)
        points.append(point)
    return points


def pick_candidate(
    result: SolveResult,
    dataset: Dataset,
    space: VariableSpace,
    rng: np.random.Generator,
) -> np.ndarray:
    """First unevaluated pool candidate, else a bit-flip perturbation.

    Candidates are compared in canonical encoded form (decode then
    re-encode) so two bit patterns for the same point count as one. When the
    whole pool is already known, single random bit flips of the best
    assignment are tried, then a widening random walk; a space with no
    unseen points left returns the final perturbation regardless.
    """
    if not result.pool:
        raise ValueError("solver result has an empty pool")

    def canonical(bits: np.ndarray) -> np.ndarray:
        return encoding.encode_point(encoding.decode_point(bits, space), space)

    for bits, _ in result.pool:
        cand = canonical(bits)
        if not dataset.contains_bits(cand):
            return cand

    d = space.total_bits
    best = canonical(result.pool[0][0])
    for _ in range(d):
        cand = best.copy()
        cand[rng.integers(0, d)] ^= 1
        cand = canonical(cand)
        if not dataset.contains_bits(cand):
            return cand
    walker = best.copy()
    for _ in range(32 * d):
        walker[rng.integers(0, d)] ^= 1
        cand = canonical(walker)
        if not dataset.contains_bits(cand):
            return cand
    return cand


def _solver_seed(seed: int, cycle: int) -> int:
    ss = np.random.SeedSequence([seed & (2**63 - 1), cycle])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _dispatch(cfg: OptimizerConfig, request: SolveRequest) -> SolveResult:
    if cfg.solver == "sa":
        return solve_sa(request)
    if cfg.solver == "exhaustive":
        return solve_exhaustive(request)
    return solve_remote(request, cfg.remote_endpoint)


def run(
    black_box: BlackBox,
    space: VariableSpace,
    cfg: OptimizerConfig,
    debug: bool = False,
) -> RunHistory:
    """Execute one full optimization run.

    Deterministic given (config, seed) when the solver works in sweep mode.
    With debug=True the surrogate's inverse identities are re-verified every
    cycle. A black-box failure raises RunAbortedError carrying the partial
    history.
    """
    cfg = validate_config(cfg, space)
    rng = np.random.default_rng(cfg.seed)

    records: list[CycleRecord] = []
    dataset = Dataset()

    points = sample_initial(space, cfg.n_init, rng)
    init_keys = {encoding.encode_point(p, space).tobytes() for p in points}
    duplicate_warning = len(init_keys) < len(points)

    init_pairs = []
    f_best = np.inf
    x_best = points[0]
    for k, point in enumerate(points):
        bits = encoding.encode_point(point, space)
        decoded = encoding.decode_point(bits, space)
        t0 = time.perf_counter()
        y_raw = float(black_box(decoded))
        t_eval = (time.perf_counter() - t0) * 1e3
        init_pairs.append((bits, decoded, y_raw, t_eval))
        if y_raw < f_best:
            f_best, x_best = y_raw, decoded
        records.append(
            CycleRecord(
                cycle=k - (cfg.n_init - 1),
                x_new=decoded,
                y_new_raw=y_raw,
                f_best_so_far=f_best,
                x_best_so_far=x_best,
                correlation=None,
                t_model_ms=0.0,
                t_solve_ms=0.0,
                t_eval_ms=t_eval,
            )
        )

    y_init = np.array([pair[2] for pair in init_pairs])
    if cfg.alpha_exp is None:
        tr_state = transform.TransformState.identity()
    else:
        tr_state = transform.fit_transform(y_init, cfg.alpha_exp)

    for bits, decoded, y_raw, _ in init_pairs:
        dataset.append(
            Sample(
                x_bits=bits,
                x_decoded=decoded,
                y_raw=y_raw,
                y_model=transform.apply(tr_state, y_raw),
            )
        )

    kernel_cfg = surrogate.KernelConfig(gamma=cfg.gamma, lam=cfg.lam)
    state = surrogate.fit_initial(
        dataset.bits_matrix(), dataset.y_model_vector(), kernel_cfg
    )

    needs_penalty = not space.is_all_binary
    unit_penalty = (
        encoding.domain_wall_penalty(space, 1.0) if needs_penalty else None
    )

    def finish() -> RunHistory:
        return RunHistory(
            records=records,
            config=cfg,
            seed=cfg.seed,
            best_x=x_best,
            best_y=f_best,
            duplicate_warning=duplicate_warning,
        )

    for cycle in range(1, cfg.n_cycles + 1):
        t0 = time.perf_counter()
        if debug:
            state.verify()
        acq = surrogate.acquisition(state, cfg.beta)
        if unit_penalty is not None:
            w = cfg.domain_wall_penalty_weight
            if isinstance(w, str):
                w = 2.0 * max_abs_coefficient(acq) + 1.0
            acq = add_scaled(acq, unit_penalty, w)
        correlation = (
            surrogate.training_correlation(state, dataset) if state.n >= 2 else None
        )
        t_model = (time.perf_counter() - t0) * 1e3

        request = SolveRequest(
            model=acq,
            budget_sweeps=cfg.budget_sweeps,
            budget_ms=cfg.budget_ms,
            seed=_solver_seed(cfg.seed, cycle),
            n_restarts=cfg.n_restarts,
            pool_size=cfg.pool_size,
        )
        t1 = time.perf_counter()
        result = _dispatch(cfg, request)
        t_solve = (time.perf_counter() - t1) * 1e3

        bits = pick_candidate(result, dataset, space, rng)
        if dataset.contains_bits(bits):
            # only possible when the whole space is already evaluated
            duplicate_warning = True
        decoded = encoding.decode_point(bits, space)
        t2 = time.perf_counter()
        try:
            y_raw = float(black_box(decoded))
        except Exception as exc:
            raise RunAbortedError(
                f"black-box evaluation failed at cycle {cycle}: {exc}", finish()
            ) from exc
        t_eval = (time.perf_counter() - t2) * 1e3

        y_model = transform.apply(tr_state, y_raw)
        dataset.append(
            Sample(x_bits=bits, x_decoded=decoded, y_raw=y_raw, y_model=y_model)
        )
        try:
            state = surrogate.append_sample(state, bits, y_model)
        except surrogate.DegenerateUpdateError:
            # With a near-zero ridge the Schur complement can sink below
            # numerical noise once the Gram matrix goes rank-deficient;
            # rebuild from scratch instead of giving up on the run.
            state = surrogate.fit_initial(
                dataset.bits_matrix(), dataset.y_model_vector(), kernel_cfg
            )
        if y_raw < f_best:
            f_best, x_best = y_raw, decoded
        records.append(
            CycleRecord(
                cycle=cycle,
                x_new=decoded,
                y_new_raw=y_raw,
                f_best_so_far=f_best,
                x_best_so_far=x_best,
                correlation=correlation,
                t_model_ms=t_model,
                t_solve_ms=t_solve,
                t_eval_ms=t_eval,
            )
        )

    return finish()
