"""Batch runner: configure runs, execute repeats, emit per-cycle data files.

Subcommands
-----------
run           execute N independent repeats of one condition and write one
              history file per repeat plus an aggregate file
sweep         repeat `run` over a list of values for one parameter
              (beta, alpha_exp or n_init) and write a comparison table
oracle-check  run the embedded self-check suite (inverse maintenance,
              QUBO/kernel equivalence, encoding round trips, SA vs
              exhaustive) and report pass/fail per property

History files are line-delimited JSON: one header object carrying the
effective configuration, then one record per cycle with keys run, cycle,
x_new, y_raw, f_best, correlation, t_model_ms, t_solve_ms, t_eval_ms.
Negative cycles hold the initial random samples. Files are written in a
canonical JSON form (sorted keys, no spaces), so a loader can round-trip
them bit-exactly. The aggregate file reports the per-cycle mean and
population standard deviation of f_best across repeats plus mean timings.

Repeat r uses seed (base seed + r). Binary-variable conditions evaluate the
landscape through a random half-input flip whose mask derives from the
repeat seed (or from the base seed with --fixed-flip-mask). Exit codes:
0 ok, 1 runtime failure, 2 usage error (machine-readable JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import benchmarks, encoding, qubo, solver, surrogate
from .benchmarks import make_flipped, preset
from .optimizer import RunAbortedError, RunHistory, run
from .problem import ConfigError, OptimizerConfig, validate_config

REMOTE_ENDPOINT_ENV = "BBOQ_REMOTE_ENDPOINT"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce one batch of repeats."""

    preset: str
    function: str
    cycles: int = 100
    repeats: int = 1
    seed: int = 0
    solver: str = "sa"
    remote_endpoint: str | None = None
    budget_sweeps: int | None = None
    budget_ms: float | None = None
    beta: float = 0.0
    alpha_exp: float | None = 1.0
    n_init: int = 10
    n_restarts: int = 4
    fixed_flip_mask: bool = False
    zero_timings: bool = False
    workers: int = 1
    out: str = "out"

    def to_dict(self) -> dict:
        return asdict(self)

    def echo_dict(self) -> dict:
        """Provenance echo for output headers.

        Excludes where the files land and how many workers ran: neither
        affects the run's content, and identical runs should produce
        bit-identical files regardless of output location.
        """
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d


def resolve_manifest(manifest: RunManifest):
    """Validate the manifest; return (space, effective OptimizerConfig)."""
    if manifest.repeats < 1:
        raise UsageError("repeats must be at least 1")
    if manifest.function not in benchmarks.LANDSCAPES:
        raise UsageError(
            f"unknown function {manifest.function!r}; expected one of "
            f"{', '.join(benchmarks.LANDSCAPES)}"
        )
    try:
        space, cfg = preset(manifest.preset)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    cfg = replace(
        cfg,
        n_init=manifest.n_init,
        n_cycles=manifest.cycles,
        beta=manifest.beta,
        alpha_exp=manifest.alpha_exp,
        seed=manifest.seed,
        solver=manifest.solver,
        n_restarts=manifest.n_restarts,
        remote_endpoint=manifest.remote_endpoint,
        budget_sweeps=manifest.budget_sweeps,
        budget_ms=manifest.budget_ms,
    )
    if cfg.budget_sweeps is None and cfg.budget_ms is None and cfg.solver == "sa":
        # deterministic reproduction default; the 5 s wall-clock budget of the
        # reference protocol stays available behind --budget-ms
        cfg = replace(cfg, budget_sweeps=2000)
    try:
        cfg = validate_config(cfg, space)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    return space, cfg


def _black_box(manifest: RunManifest, space, run_seed: int):
    base = benchmarks.LANDSCAPES[manifest.function]
    if space.is_all_binary:
        mask_seed = manifest.seed if manifest.fixed_flip_mask else run_seed
        flipped = make_flipped(base, space.dim, mask_seed)
        return flipped, sorted(flipped.mask.indices)
    return base, None


def execute_repeat(manifest: RunManifest, run_index: int) -> tuple[RunHistory, list | None]:
    """Run one repeat with its derived seed; returns (history, flip mask)."""
    space, cfg = resolve_manifest(manifest)
    run_seed = manifest.seed + run_index
    cfg = replace(cfg, seed=run_seed)
    black_box, mask = _black_box(manifest, space, run_seed)
    return run(black_box, space, cfg), mask


class RepeatFailed(RuntimeError):
    """One repeat aborted; carries the partial history for emission."""

    def __init__(self, message: str, run_index: int, history, mask):
        super().__init__(message)
        self.run_index = run_index
        self.history = history
        self.mask = mask


def _pool_worker(args: tuple[dict, int]):
    manifest_dict, run_index = args
    manifest = RunManifest(**manifest_dict)
    try:
        return execute_repeat(manifest, run_index)
    except RunAbortedError as exc:
        space, _ = resolve_manifest(manifest)
        run_seed = manifest.seed + run_index
        mask = None
        if space.is_all_binary:
            mask_seed = manifest.seed if manifest.fixed_flip_mask else run_seed
            mask = sorted(benchmarks.make_mask(space.dim, mask_seed).indices)
        raise RepeatFailed(str(exc), run_index, exc.history, mask) from exc


# ---------------------------------------------------------------------------
# history files


def dumps_line(obj) -> str:
    """Canonical one-line JSON: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def history_lines(
    manifest: RunManifest, run_index: int, history: RunHistory, mask: list | None
) -> list[str]:
    header = {
        "type": "header",
        "kind": "history",
        "run": run_index,
        "seed": history.seed,
        "manifest": manifest.echo_dict(),
        "config": _config_dict(history.config),
        "flip_mask": mask,
        "duplicate_warning": history.duplicate_warning,
    }
    lines = [dumps_line(header)]
    for rec in history.records:
        lines.append(
            dumps_line(
                {
                    "run": run_index,
                    "cycle": rec.cycle,
                    "x_new": [float(v) for v in rec.x_new],
                    "y_raw": rec.y_new_raw,
                    "f_best": rec.f_best_so_far,
                    "correlation": rec.correlation,
                    "t_model_ms": 0.0 if manifest.zero_timings else rec.t_model_ms,
                    "t_solve_ms": 0.0 if manifest.zero_timings else rec.t_solve_ms,
                    "t_eval_ms": 0.0 if manifest.zero_timings else rec.t_eval_ms,
                }
            )
        )
    return lines


def _config_dict(cfg: OptimizerConfig) -> dict:
    d = asdict(cfg)
    return d


def write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def load_history(path) -> tuple[dict, list[dict]]:
    """Parse a history file back into (header, records)."""
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise ValueError(f"{path} does not start with a header line")
    return lines[0], lines[1:]


def aggregate_rows(per_run_records: list[list[dict]]) -> list[dict]:
    """Per-cycle mean/std of f_best across repeats plus mean timings.

    Standard deviation uses the population convention (divide by the number
    of repeats).
    """
    by_cycle: dict[int, list[dict]] = {}
    for records in per_run_records:
        for rec in records:
            by_cycle.setdefault(rec["cycle"], []).append(rec)
    rows = []
    for cycle in sorted(by_cycle):
        recs = by_cycle[cycle]
        f = np.array([r["f_best"] for r in recs])
        rows.append(
            {
                "cycle": cycle,
                "n_runs": len(recs),
                "f_best_mean": float(np.mean(f)),
                "f_best_std": float(np.std(f)),
                "t_model_ms_mean": float(np.mean([r["t_model_ms"] for r in recs])),
                "t_solve_ms_mean": float(np.mean([r["t_solve_ms"] for r in recs])),
                "t_eval_ms_mean": float(np.mean([r["t_eval_ms"] for r in recs])),
            }
        )
    return rows


def aggregate_lines(manifest: RunManifest, rows: list[dict]) -> list[str]:
    header = {
        "type": "header",
        "kind": "aggregate",
        "manifest": manifest.echo_dict(),
        "repeats": manifest.repeats,
        "std_convention": "population",
    }
    return [dumps_line(header)] + [dumps_line(r) for r in rows]


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(manifest: RunManifest, out_dir: Path | None = None) -> int:
    """Execute the repeats and write history + aggregate files."""
    resolve_manifest(manifest)  # fail fast on usage errors
    out = Path(out_dir) if out_dir is not None else Path(manifest.out)
    per_run_records: list[list[dict]] = []

    jobs = [(manifest.to_dict(), r) for r in range(manifest.repeats)]
    try:
        if manifest.workers > 1 and manifest.repeats > 1:
            _warm_sa_jit()
            with ProcessPoolExecutor(
                max_workers=min(manifest.workers, manifest.repeats)
            ) as pool:
                results = list(pool.map(_pool_worker, jobs))
        else:
            results = [_pool_worker(job) for job in jobs]
    except RepeatFailed as exc:
        # keep whatever cycles completed on disk before failing the command
        lines = history_lines(manifest, exc.run_index, exc.history, exc.mask)
        write_lines(out / f"history_{exc.run_index:02d}_partial.jsonl", lines)
        raise RuntimeError(
            f"repeat {exc.run_index} aborted ({exc}); partial history written"
        ) from exc

    for run_index, (history, mask) in enumerate(results):
        lines = history_lines(manifest, run_index, history, mask)
        write_lines(out / f"history_{run_index:02d}.jsonl", lines)
        per_run_records.append([json.loads(line) for line in lines[1:]])
        print(
            f"[run {run_index}] seed={history.seed} best={history.best_y:.6g}",
            flush=True,
        )

    rows = aggregate_rows(per_run_records)
    write_lines(out / "aggregate.jsonl", aggregate_lines(manifest, rows))
    final = rows[-1]
    print(
        f"[aggregate] cycles={manifest.cycles} repeats={manifest.repeats} "
        f"final f_best mean={final['f_best_mean']:.6g} std={final['f_best_std']:.6g}"
    )
    return 0


_SWEEP_PARAMS = ("beta", "alpha_exp", "n_init")


def cmd_sweep(manifest: RunManifest, param: str, values: list) -> int:
    """One aggregate per value plus a combined comparison table."""
    if param not in _SWEEP_PARAMS:
        raise UsageError(f"unknown sweep parameter {param!r}; expected {_SWEEP_PARAMS}")
    if not values:
        raise UsageError("sweep needs at least one value")
    out = Path(manifest.out)
    comparison: list[tuple[str, float, int, float, float]] = []
    for value in values:
        sub = replace(manifest, **{param: value})
        label = f"{param}_{value:g}" if isinstance(value, float) else f"{param}_{value}"
        code = cmd_run(sub, out_dir=out / label)
        if code != 0:
            return code
        _, rows = _load_aggregate(out / label / "aggregate.jsonl")
        for row in rows:
            comparison.append(
                (param, value, row["cycle"], row["f_best_mean"], row["f_best_std"])
            )
    table = out / "comparison.csv"
    table.parent.mkdir(parents=True, exist_ok=True)
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("param,value,cycle,f_best_mean,f_best_std\n")
        for param_name, value, cycle, mean, std in comparison:
            fh.write(f"{param_name},{value!r},{cycle},{mean!r},{std!r}\n")
    print(f"[sweep] wrote {table}")
    return 0


def _load_aggregate(path) -> tuple[dict, list[dict]]:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    return lines[0], lines[1:]


def _warm_sa_jit() -> None:
    """Compile the annealing kernels once before forking workers."""
    tiny = qubo.QuboModel(np.eye(2), np.zeros(2))
    solver.solve_sa(solver.SolveRequest(model=tiny, budget_sweeps=2, n_restarts=1))
    solver.solve_exhaustive(solver.SolveRequest(model=tiny, budget_sweeps=1, n_restarts=1))


# ---------------------------------------------------------------------------
# oracle check


def _check(name: str, ok: bool, detail: str, failures: list[str]) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    if not ok:
        failures.append(name)


def cmd_oracle_check(corrupt: str | None = None) -> int:
    """Embedded self-check suite; any failed property gives a non-zero exit.

    `corrupt` is a test hook that injects a known fault (currently "lmu")
    to prove the corresponding check actually detects corruption.
    """
    rng = np.random.default_rng(20240817)
    failures: list[str] = []

    # incremental inverse maintenance vs direct inverses
    worst = 0.0
    for gamma in (0.0, 1.0):
        for lam in (1.0, 1e-3):
            cfg = surrogate.KernelConfig(gamma=gamma, lam=lam)
            d = int(rng.integers(20, 50))
            n = int(rng.integers(8, 30))
            X = (rng.random((n, d)) < 0.5).astype(np.float64)
            y = rng.normal(size=n)
            state = surrogate.fit_initial(X[:2], y[:2], cfg)
            for i in range(2, n):
                state = surrogate.append_sample(state, X[i], y[i])
            if corrupt == "lmu":
                tampered = state.L_mu.copy()
                tampered[0, 0] += 1e-4
                state = replace(state, L_mu=tampered)
            eye = np.eye(state.n)
            dev = max(
                float(np.max(np.abs(state.L_mu - np.linalg.inv(state.K_mu + lam * eye)))),
                float(np.max(np.abs(state.L_sigma - np.linalg.inv(state.K_sigma + lam * eye)))),
            )
            worst = max(worst, dev)
    _check(
        "incremental-inverse",
        worst < 1e-8,
        f"max deviation from direct inverse {worst:.2e} (tol 1e-8)",
        failures,
    )

    # assembled quadratic model vs kernel expansion
    worst = 0.0
    for _ in range(10):
        cfg = surrogate.KernelConfig(gamma=float(rng.integers(0, 2)), lam=1.0)
        d = int(rng.integers(5, 25))
        n = int(rng.integers(2, 15))
        X = (rng.random((n, d)) < 0.5).astype(np.float64)
        state = surrogate.fit_initial(X, rng.normal(size=n), cfg)
        model = surrogate.assemble_mu(state)
        for _ in range(5):
            x = (rng.random(d) < 0.5).astype(np.float64)
            expansion = sum(
                state.c_hat[j] * surrogate.k_mu(X[j], x, cfg.gamma) for j in range(n)
            )
            dev = abs(qubo.evaluate(model, x) - (expansion - state.mu_constant))
            worst = max(worst, dev)
    _check(
        "mean-model-expansion",
        worst < 1e-8,
        f"max |assembled - kernel expansion| {worst:.2e} (tol 1e-8)",
        failures,
    )

    # assembled spread model vs its defining expression
    worst = 0.0
    for _ in range(10):
        cfg = surrogate.KernelConfig(gamma=float(rng.integers(0, 2)), lam=1.0)
        d = int(rng.integers(5, 25))
        n = int(rng.integers(2, 15))
        X = (rng.random((n, d)) < 0.5).astype(np.float64)
        state = surrogate.fit_initial(X, rng.normal(size=n), cfg)
        model = surrogate.assemble_sigma(state)
        for _ in range(5):
            x = (rng.random(d) < 0.5).astype(np.float64)
            kvec = X @ x + cfg.gamma
            direct = surrogate.k_sigma(x, x, cfg.gamma) - kvec @ state.L_sigma @ kvec
            dev = abs(qubo.evaluate(model, x) + state.sigma_constant - direct)
            worst = max(worst, dev)
    _check(
        "spread-model-expansion",
        worst < 1e-9,
        f"max |assembled - direct| {worst:.2e} (tol 1e-9)",
        failures,
    )

    # encoding round trips and quantization bound
    space, _ = preset("r5")
    spec = space.vars[0]
    disc = encoding.Discretization.from_spec(spec)
    ok = all(
        encoding.decode_real(encoding.encode_real(g, disc), disc) == g
        for g in disc.grid
    )
    qworst = 0.0
    for _ in range(1000):
        x = float(rng.uniform(spec.lower, spec.upper))
        err = abs(encoding.decode_real(encoding.encode_real(x, disc), disc) - x)
        qworst = max(qworst, err)
    half_step = disc.step / 2 + 1e-12
    _check(
        "encode-decode",
        ok and qworst <= half_step,
        f"grid round trip exact, quantization error {qworst:.4f} <= {half_step:.4f}",
        failures,
    )

    # annealer vs exhaustive ground truth on small random models
    n_models, hits = 40, 0
    for k in range(n_models):
        model_rng = np.random.default_rng(1000 + k)
        d = 16
        quad = qubo.symmetrized(model_rng.normal(size=(d, d)))
        model = qubo.QuboModel(quad, model_rng.normal(size=d))
        exact = solver.solve_exhaustive(
            solver.SolveRequest(model=model, budget_sweeps=1, pool_size=1)
        )
        sa = solver.solve_sa(
            solver.SolveRequest(model=model, budget_sweeps=10_000, seed=k, n_restarts=4)
        )
        if abs(sa.best_energy - exact.best_energy) < 1e-9:
            hits += 1
    rate = hits / n_models
    _check(
        "sa-vs-exhaustive",
        rate >= 0.9,
        f"ground-state hit rate {rate:.2%} on {n_models} 16-bit models (need >= 90%)",
        failures,
    )

    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(failures)}")
        return 1
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


# flag -> default; every flag defaults to SUPPRESS at parse time so a YAML
# config can fill in anything the command line left unspecified
_FLAG_DEFAULTS: dict = {
    "preset": None,
    "function": "rastrigin",
    "cycles": 100,
    "repeats": 1,
    "seed": 0,
    "solver": "sa",
    "endpoint": None,
    "budget_sweeps": None,
    "budget_ms": None,
    "beta": 0.0,
    "alpha_exp": 1.0,
    "no_transform": False,
    "n_init": 10,
    "n_restarts": 4,
    "fixed_flip_mask": False,
    "zero_timings": False,
    "workers": 1,
    "config": None,
    "out": "out",
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--preset", default=S, help="named condition, e.g. r5 or b40")
    p.add_argument("--function", default=S, help="rosenbrock | rastrigin")
    p.add_argument("--cycles", type=int, default=S)
    p.add_argument("--repeats", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument(
        "--solver",
        default=S,
        help="sa | exhaustive | remote (endpoint from --endpoint or "
        f"${REMOTE_ENDPOINT_ENV})",
    )
    p.add_argument("--endpoint", default=S, help="remote solver base URL")
    p.add_argument("--budget-sweeps", type=int, default=S)
    p.add_argument("--budget-ms", type=float, default=S)
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--alpha-exp", type=float, default=S)
    p.add_argument("--no-transform", action="store_true", default=S)
    p.add_argument("--n-init", type=int, default=S)
    p.add_argument("--n-restarts", type=int, default=S)
    p.add_argument("--fixed-flip-mask", action="store_true", default=S)
    p.add_argument("--zero-timings", action="store_true", default=S,
                   help="write 0.0 timings for bit-reproducible files")
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--config", default=S, help="YAML file with defaults for these flags")
    p.add_argument("--out", default=S)


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    explicit = {k: v for k, v in vars(args).items() if k != "command"}
    explicit.pop("param", None)
    explicit.pop("values", None)
    merged = dict(_FLAG_DEFAULTS)
    config_path = explicit.get("config", None)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            overrides = yaml.safe_load(fh) or {}
        if not isinstance(overrides, dict):
            raise UsageError(f"config file {config_path} must hold a mapping")
        for key, val in overrides.items():
            key = str(key).replace("-", "_")
            if key not in merged:
                raise UsageError(f"unknown config key {key!r}")
            merged[key] = val
    merged.update(explicit)  # command line wins over the config file

    if merged["preset"] is None:
        raise UsageError("a preset is required (flag --preset or config key)")
    solver_choice = str(merged["solver"])
    endpoint = merged["endpoint"] or os.environ.get(REMOTE_ENDPOINT_ENV)
    if solver_choice.startswith("remote:"):
        endpoint = solver_choice.split(":", 1)[1]
        solver_choice = "remote"
    return RunManifest(
        preset=merged["preset"],
        function=merged["function"],
        cycles=int(merged["cycles"]),
        repeats=int(merged["repeats"]),
        seed=int(merged["seed"]),
        solver=solver_choice,
        remote_endpoint=endpoint,
        budget_sweeps=None if merged["budget_sweeps"] is None else int(merged["budget_sweeps"]),
        budget_ms=None if merged["budget_ms"] is None else float(merged["budget_ms"]),
        beta=float(merged["beta"]),
        alpha_exp=None if merged["no_transform"] else float(merged["alpha_exp"]),
        n_init=int(merged["n_init"]),
        n_restarts=int(merged["n_restarts"]),
        fixed_flip_mask=bool(merged["fixed_flip_mask"]),
        zero_timings=bool(merged["zero_timings"]),
        workers=int(merged["workers"]),
        out=str(merged["out"]),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bboq",
        description="Surrogate-assisted black-box optimization over QUBO solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute repeats of one condition")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter study")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=_SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list, e.g. 0,0.0001,0.001")

    p_oracle = sub.add_parser("oracle-check", help="run the embedded self checks")
    p_oracle.add_argument("--corrupt", default=None, choices=("lmu",),
                          help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_manifest_from_args(args))
        if args.command == "sweep":
            manifest = _manifest_from_args(args)
            caster = int if args.param == "n_init" else float
            values = [caster(v) for v in str(args.values).split(",") if v.strip()]
            return cmd_sweep(manifest, args.param, values)
        if args.command == "oracle-check":
            return cmd_oracle_check(corrupt=args.corrupt)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(dumps_line({"error": str(exc), "kind": "usage"}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(dumps_line({"error": str(exc), "kind": "runtime"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
