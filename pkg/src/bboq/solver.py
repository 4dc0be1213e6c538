"""QUBO minimization backends behind one request/result contract.

Three interchangeable backends:

* `solve_sa` -- multi-restart single-bit-flip simulated annealing with a
  geometric temperature schedule. Energy deltas come from an incrementally
  maintained local-field vector (O(dim) per accepted flip, never a full
  re-evaluation), and the whole inner loop is numba-compiled. Given a sweep
  budget the result is a pure function of (model, sweeps, seed, n_restarts);
  wall-time budgets are converted to sweeps by a short calibration burst, so
  determinism there is only approximate.
* `solve_exhaustive` -- ground-truth enumeration of every assignment for
  dims up to 24, walking states in Gray-code order so each step is a single
  tracked bit flip. Ties break toward the lowest little-endian integer value
  of the assignment.
* `solve_remote` -- HTTP client for an external QUBO service speaking the
  JSON wire format below; returned energies are re-verified locally.

Wire format: POST <endpoint>/solve with
``{"dim": d, "terms": [[i, j, value], ...], "linear": [...],
"timeout_ms": t, "seed": s}`` where terms use the upper-triangular,
doubled-off-diagonal convention of `qubo.to_triplets`; the response is
``{"solution": [0|1, ...], "energy": e}``.

All backends report ``best_energy`` recomputed by `qubo.evaluate`, so the
result is exactly consistent with the model handed in (the internal kernels
ignore the constant; it is added back through the final evaluation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import requests
from numba import njit

from .qubo import QuboModel, evaluate, max_abs_coefficient, to_triplets

_U64 = np.uint64
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class SolverError(RuntimeError):
    pass


class RemoteSolverError(SolverError):
    pass


class TransportError(RemoteSolverError):
    pass


class MalformedResponseError(RemoteSolverError):
    pass


class EnergyMismatchError(RemoteSolverError):
    pass


@dataclass(frozen=True)
class SolveRequest:
    """One solve call: model, budget, seed, restart count.

    Exactly one of budget_sweeps / budget_ms must be set. A sweep budget is
    the total across restarts; each restart gets an even share (minimum one
    sweep, so a zero budget degenerates to evaluating a random start).
    """

    model: QuboModel
    budget_sweeps: int | None = None
    budget_ms: float | None = None
    seed: int = 0
    n_restarts: int = 4
    pool_size: int = 10

    def __post_init__(self):
        if (self.budget_sweeps is None) == (self.budget_ms is None):
            raise ValueError("set exactly one of budget_sweeps / budget_ms")
        if self.budget_sweeps is not None and self.budget_sweeps < 0:
            raise ValueError("budget_sweeps must be non-negative")
        if self.budget_ms is not None and self.budget_ms <= 0:
            raise ValueError("budget_ms must be positive")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be at least 1")
        if self.pool_size < 1:
            raise ValueError("pool_size must be at least 1")


@dataclass(frozen=True)
class SolveStats:
    sweeps: int
    restarts: int
    elapsed_ms: float


@dataclass(frozen=True)
class SolveResult:
    """Best assignment found plus a pool of distinct runner-up candidates.

    Pool entries are distinct in x and sorted ascending by energy (ties by
    bit-pattern bytes); best_x/best_energy duplicate the first entry.
    Everything except stats.elapsed_ms is deterministic for seeded backends.
    """

    best_x: np.ndarray
    best_energy: float
    pool: list[tuple[np.ndarray, float]]
    stats: SolveStats


def _mix64(value: int) -> int:
    """SplitMix64 finalizer; derives decorrelated per-restart kernel seeds."""
    z = (value + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _restart_seed(seed: int, restart: int) -> int:
    return _mix64((seed & _MASK64) ^ _mix64(restart + 1))


@njit(cache=True)
def _rng_next(state):
    state = state + _U64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    z = z ^ (z >> _U64(31))
    return state, z


@njit(cache=True)
def _rng_uniform(z):
    # 53-bit mantissa in [0, 1)
    return (z >> _U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _full_energy(quad, lin, x):
    d = lin.shape[0]
    e = 0.0
    for i in range(d):
        if x[i]:
            e += lin[i] + quad[i, i]
            for j in range(i + 1, d):
                if x[j]:
                    e += 2.0 * quad[i, j]
    return e


@njit(cache=True)
def _init_field(quad, lin, x):
    # field[k] = quad[k,k] + lin[k] + 2 * sum_{j != k} quad[k,j] x_j;
    # the flip delta for bit k is (1 - 2 x_k) * field[k].
    d = lin.shape[0]
    out = np.empty(d)
    for k in range(d):
        acc = 0.0
        for j in range(d):
            if x[j]:
                acc += quad[k, j]
        if x[k]:
            acc -= quad[k, k]
        out[k] = quad[k, k] + lin[k] + 2.0 * acc
    return out


@njit(cache=True)
def _sa_restart(quad, lin, sweeps, t_start, t_ratio, seed, debug):
    d = lin.shape[0]
    state = seed
    x = np.zeros(d, dtype=np.uint8)
    for i in range(d):
        state, z = _rng_next(state)
        if _rng_uniform(z) < 0.5:
            x[i] = 1
    field = _init_field(quad, lin, x)
    energy = _full_energy(quad, lin, x)
    best_x = x.copy()
    best_e = energy
    max_err = 0.0
    temp = t_start
    for _ in range(sweeps):
        for _ in range(d):
            state, z = _rng_next(state)
            k = int(_rng_uniform(z) * d)
            if k >= d:
                k = d - 1
            delta = 1.0 - 2.0 * x[k]
            d_e = delta * field[k]
            accept = d_e <= 0.0
            if not accept:
                state, z = _rng_next(state)
                accept = _rng_uniform(z) < np.exp(-d_e / temp)
            if accept:
                x[k] = 1 - x[k]
                energy += d_e
                for j in range(d):
                    field[j] += 2.0 * delta * quad[j, k]
                field[k] -= 2.0 * delta * quad[k, k]
                if debug:
                    err = abs(energy - _full_energy(quad, lin, x))
                    if err > max_err:
                        max_err = err
                if energy < best_e:
                    best_e = energy
                    for j in range(d):
                        best_x[j] = x[j]
        temp *= t_ratio
    # Greedy zero-temperature polish: the geometric schedule ends at a
    # temperature tied to the largest coefficient, which can still be warm
    # relative to the smallest ones when scales are mixed (e.g. an encoding
    # penalty on top of a surrogate). Descend until no single flip improves.
    improved = True
    passes = 0
    while improved and passes < 64:
        improved = False
        passes += 1
        for k in range(d):
            delta = 1.0 - 2.0 * x[k]
            d_e = delta * field[k]
            if d_e < 0.0:
                x[k] = 1 - x[k]
                energy += d_e
                for j in range(d):
                    field[j] += 2.0 * delta * quad[j, k]
                field[k] -= 2.0 * delta * quad[k, k]
                if debug:
                    err = abs(energy - _full_energy(quad, lin, x))
                    if err > max_err:
                        max_err = err
                improved = True
    if energy < best_e:
        best_e = energy
        for j in range(d):
            best_x[j] = x[j]
    return best_x, best_e, max_err


@njit(cache=True)
def _exhaustive_scan(quad, lin, pool_k):
    # Gray-code walk over all 2^d assignments; one tracked flip per step.
    # Pool arrays stay sorted ascending by (energy, little-endian int).
    d = lin.shape[0]
    x = np.zeros(d, dtype=np.uint8)
    field = np.empty(d)
    for k in range(d):
        field[k] = quad[k, k] + lin[k]
    energy = 0.0
    value = np.int64(0)

    pool_e = np.full(pool_k, np.inf)
    pool_i = np.zeros(pool_k, dtype=np.int64)
    pool_x = np.zeros((pool_k, d), dtype=np.uint8)
    filled = 0

    total = np.int64(1) << d
    step = np.int64(0)
    while True:
        # insert current state if it beats the worst pool slot
        if filled < pool_k or energy < pool_e[filled - 1] or (
            energy == pool_e[filled - 1] and value < pool_i[filled - 1]
        ):
            pos = filled if filled < pool_k else pool_k - 1
            while pos > 0 and (
                energy < pool_e[pos - 1]
                or (energy == pool_e[pos - 1] and value < pool_i[pos - 1])
            ):
                pool_e[pos] = pool_e[pos - 1]
                pool_i[pos] = pool_i[pos - 1]
                for j in range(d):
                    pool_x[pos, j] = pool_x[pos - 1, j]
                pos -= 1
            pool_e[pos] = energy
            pool_i[pos] = value
            for j in range(d):
                pool_x[pos, j] = x[j]
            if filled < pool_k:
                filled += 1
        step += 1
        if step >= total:
            break
        # flip the bit at the lowest set position of `step`
        m = step
        k = 0
        while m & np.int64(1) == 0:
            m >>= 1
            k += 1
        delta = 1.0 - 2.0 * x[k]
        energy += delta * field[k]
        x[k] = 1 - x[k]
        for j in range(d):
            field[j] += 2.0 * delta * quad[j, k]
        field[k] -= 2.0 * delta * quad[k, k]
        value ^= np.int64(1) << k
    return pool_x, pool_e, filled


def _kernel_arrays(model: QuboModel) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.ascontiguousarray(model.quadratic),
        np.ascontiguousarray(model.linear),
    )


def _le_value(bits: np.ndarray) -> int:
    """Assignment read as a little-endian integer (bit i weighs 2^i)."""
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _finish_pool(
    model: QuboModel, candidates: list[np.ndarray], pool_size: int
) -> list[tuple[np.ndarray, float]]:
    """Dedupe, re-evaluate exactly, and sort candidate assignments.

    Ascending by energy; exact ties break toward the lowest little-endian
    integer value so results are deterministic.
    """
    seen: dict[bytes, np.ndarray] = {}
    for x in candidates:
        seen.setdefault(x.tobytes(), x)
    scored = [(x, evaluate(model, x)) for x in seen.values()]
    scored.sort(key=lambda item: (item[1], _le_value(item[0])))
    return scored[:pool_size]


def solve_exhaustive(req: SolveRequest) -> SolveResult:
    """Enumerate every assignment; exact for dim <= 24."""
    model = req.model
    if model.dim > 24:
        raise ValueError(f"exhaustive solver supports dim <= 24, got {model.dim}")
    start = time.perf_counter()
    quad, lin = _kernel_arrays(model)
    pool_k = min(req.pool_size, 1 << model.dim)
    pool_x, _, filled = _exhaustive_scan(quad, lin, pool_k)
    pool = _finish_pool(model, [pool_x[i].copy() for i in range(filled)], req.pool_size)
    elapsed = (time.perf_counter() - start) * 1e3
    best_x, best_e = pool[0]
    stats = SolveStats(sweeps=0, restarts=0, elapsed_ms=elapsed)
    return SolveResult(best_x=best_x, best_energy=best_e, pool=pool, stats=stats)


_CALIBRATION_SWEEPS = 32


def _sweeps_for_budget(req: SolveRequest, quad, lin, t_start, t_ratio) -> int:
    if req.budget_sweeps is not None:
        return req.budget_sweeps
    # Calibration burst: time a short run, then extrapolate to the wall-time
    # budget. Deterministic only for the measured sweep count.
    burst_start = time.perf_counter()
    _sa_restart(
        quad, lin, _CALIBRATION_SWEEPS, t_start, t_ratio,
        _U64(_restart_seed(req.seed, 0)), False,
    )
    per_sweep = max((time.perf_counter() - burst_start) / _CALIBRATION_SWEEPS, 1e-9)
    return max(req.n_restarts, int(req.budget_ms / 1e3 / per_sweep))


def solve_sa(req: SolveRequest, debug: bool = False) -> SolveResult:
    """Multi-restart simulated annealing.

    With debug=True the kernel re-evaluates the energy after every accepted
    flip and the call fails if the incremental tracking ever drifts past
    1e-9 (scaled by the model's coefficient magnitude).
    """
    model = req.model
    start = time.perf_counter()
    quad, lin = _kernel_arrays(model)
    scale = max_abs_coefficient(model)
    if scale > 0.0:
        t_start = scale * model.dim
        t_end = 1e-3 * scale
    else:
        t_start = t_end = 1.0
    sweeps_total = _sweeps_for_budget(req, quad, lin, t_start, 0.99)
    per_restart = max(1, sweeps_total // req.n_restarts)
    t_ratio = (
        (t_end / t_start) ** (1.0 / (per_restart - 1)) if per_restart > 1 else 1.0
    )

    candidates = []
    for r in range(req.n_restarts):
        seed_r = _U64(_restart_seed(req.seed, r))
        x, e_kernel, max_err = _sa_restart(
            quad, lin, per_restart, t_start, t_ratio, seed_r, debug
        )
        if debug and max_err > 1e-9 * max(1.0, scale * model.dim):
            raise AssertionError(
                f"incremental energy drift {max_err:.3e} in restart {r}"
            )
        exact = evaluate(model, x)
        if abs(exact - (e_kernel + model.constant)) > 1e-6 * max(1.0, abs(exact)):
            raise AssertionError(
                f"kernel energy {e_kernel} disagrees with evaluate() {exact}"
            )
        candidates.append(np.asarray(x, dtype=np.uint8))

    pool = _finish_pool(model, candidates, req.pool_size)
    elapsed = (time.perf_counter() - start) * 1e3
    best_x, best_e = pool[0]
    stats = SolveStats(
        sweeps=per_restart * req.n_restarts, restarts=req.n_restarts,
        elapsed_ms=elapsed,
    )
    return SolveResult(best_x=best_x, best_energy=best_e, pool=pool, stats=stats)


def wire_request(model: QuboModel, timeout_ms: int, seed: int) -> dict:
    """JSON-serializable request body for the remote wire format."""
    return {
        "dim": model.dim,
        "terms": [[i, j, v] for (i, j, v) in to_triplets(model)],
        "linear": [float(v) for v in model.linear],
        "timeout_ms": int(timeout_ms),
        "seed": int(seed),
    }


def solve_remote(
    req: SolveRequest, endpoint: str, max_retries: int = 2
) -> SolveResult:
    """Send the model to a remote QUBO service and verify its answer.

    Requires a wall-time budget (the wire format carries timeout_ms only).
    The reported energy is recomputed locally; a disagreement beyond 1e-6
    raises EnergyMismatchError rather than trusting the service.
    """
    model = req.model
    if req.budget_ms is None:
        raise ValueError("remote solver requires a budget_ms time budget")
    start = time.perf_counter()
    url = endpoint.rstrip("/") + "/solve"
    body = wire_request(model, int(req.budget_ms), req.seed)
    read_timeout = req.budget_ms / 1e3 + 10.0

    attempts = max_retries + 1
    last_exc: Exception | None = None
    response = None
    for _ in range(attempts):
        try:
            response = requests.post(url, json=body, timeout=(5.0, read_timeout))
            break
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_exc = exc
    if response is None:
        raise TransportError(
            f"POST {url} failed after {attempts} attempts: {last_exc}"
        )
    if response.status_code != 200:
        raise MalformedResponseError(
            f"server returned status {response.status_code}"
        )
    try:
        payload = response.json()
        solution = np.asarray(payload["solution"], dtype=np.uint8)
        energy = float(payload["energy"])
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponseError(f"cannot parse solver response: {exc}") from exc
    if solution.shape != (model.dim,) or not np.all((solution == 0) | (solution == 1)):
        raise MalformedResponseError(
            f"solution is not a {model.dim}-bit binary vector"
        )
    exact = evaluate(model, solution)
    if abs((exact - model.constant) - energy) > 1e-6:
        raise EnergyMismatchError(
            f"remote energy {energy} vs locally verified {exact - model.constant}"
        )
    elapsed = (time.perf_counter() - start) * 1e3
    stats = SolveStats(sweeps=0, restarts=0, elapsed_ms=elapsed)
    return SolveResult(
        best_x=solution, best_energy=exact, pool=[(solution, exact)], stats=stats
    )
