"""Tests for the annealing, exhaustive, and remote solver backends."""

import itertools
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from bboq.qubo import QuboModel, evaluate, from_triplets, symmetrized
from bboq.solver import (
    EnergyMismatchError,
    MalformedResponseError,
    SolveRequest,
    TransportError,
    solve_exhaustive,
    solve_remote,
    solve_sa,
    wire_request,
)


def random_model(rng, d):
    return QuboModel(symmetrized(rng.normal(size=(d, d))), rng.normal(size=d))


def enumerate_minimum(model):
    """Independent oracle: dense enumeration over all assignments."""
    d = model.dim
    assignments = np.array(list(itertools.product([0, 1], repeat=d)), dtype=float)
    # itertools orders by the *first* coordinate slowest; energies via matmul
    energies = (
        np.einsum("ki,ij,kj->k", assignments, model.quadratic, assignments)
        + assignments @ model.linear
        + model.constant
    )
    best = np.min(energies)
    ties = assignments[np.abs(energies - best) < 1e-12]
    return best, {tuple(int(v) for v in t) for t in ties}


class TestExhaustive:
    def test_tie_break_prefers_low_little_endian(self):
        model = QuboModel(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([-1.0, -1.0]))
        res = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
        assert res.best_energy == -1.0
        assert res.best_x.tolist() == [1, 0]  # value 1 beats (0,1) = value 2

    def test_zero_model_returns_all_zeros(self):
        res = solve_exhaustive(SolveRequest(model=QuboModel.zeros(5), budget_sweeps=1))
        assert res.best_energy == 0.0
        assert res.best_x.tolist() == [0] * 5

    def test_independent_bits(self):
        d = 6
        model = QuboModel(np.eye(d), np.full(d, -2.0))
        res = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
        assert res.best_x.tolist() == [1] * d
        assert res.best_energy == -d

    def test_matches_dense_enumeration(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            model = random_model(rng, 8)
            res = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
            best, minimizers = enumerate_minimum(model)
            assert abs(res.best_energy - best) < 1e-9
            assert tuple(res.best_x.tolist()) in minimizers

    def test_pool_sorted_distinct_and_consistent(self):
        rng = np.random.default_rng(22)
        model = random_model(rng, 8)
        res = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1, pool_size=6))
        assert len({x.tobytes() for x, _ in res.pool}) == 6
        energies = [e for _, e in res.pool]
        assert energies == sorted(energies)
        for x, e in res.pool:
            assert e == evaluate(model, x)

    def test_dim_cap(self):
        with pytest.raises(ValueError, match="dim <= 24"):
            solve_exhaustive(SolveRequest(model=QuboModel.zeros(25), budget_sweeps=1))

    def test_constant_carried_through(self):
        model = QuboModel(np.eye(2), np.zeros(2), constant=7.5)
        res = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
        assert res.best_energy == 7.5


class TestSimulatedAnnealing:
    def test_finds_exhaustive_optimum_on_small_models(self):
        hits = 0
        for k in range(25):
            rng = np.random.default_rng(300 + k)
            model = random_model(rng, 16)
            exact = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
            sa = solve_sa(
                SolveRequest(model=model, budget_sweeps=10_000, seed=k, n_restarts=4)
            )
            hits += abs(sa.best_energy - exact.best_energy) < 1e-9
        assert hits >= 24

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(23)
        model = random_model(rng, 20)
        req = SolveRequest(model=model, budget_sweeps=400, seed=99, n_restarts=3)
        a, b = solve_sa(req), solve_sa(req)
        assert np.array_equal(a.best_x, b.best_x)
        assert a.best_energy == b.best_energy
        assert len(a.pool) == len(b.pool)
        for (xa, ea), (xb, eb) in zip(a.pool, b.pool):
            assert np.array_equal(xa, xb) and ea == eb

    def test_zero_sweep_budget_still_returns_valid_result(self):
        rng = np.random.default_rng(24)
        model = random_model(rng, 10)
        res = solve_sa(SolveRequest(model=model, budget_sweeps=0, seed=1, n_restarts=2))
        assert res.best_energy == evaluate(model, res.best_x)

    def test_incremental_energy_tracking(self):
        rng = np.random.default_rng(25)
        model = random_model(rng, 15)
        res = solve_sa(
            SolveRequest(model=model, budget_sweeps=600, seed=7, n_restarts=2),
            debug=True,
        )
        assert res.best_energy == evaluate(model, res.best_x)

    def test_pool_entries_distinct_sorted_verified(self):
        rng = np.random.default_rng(26)
        model = random_model(rng, 12)
        res = solve_sa(
            SolveRequest(model=model, budget_sweeps=2000, seed=5, n_restarts=8)
        )
        keys = {x.tobytes() for x, _ in res.pool}
        assert len(keys) == len(res.pool)
        energies = [e for _, e in res.pool]
        assert energies == sorted(energies)
        for x, e in res.pool:
            assert e == evaluate(model, x)

    def test_more_sweeps_never_hurt_on_average(self):
        rng = np.random.default_rng(27)
        model = random_model(rng, 24)
        low, high = [], []
        for seed in range(50):
            low.append(
                solve_sa(
                    SolveRequest(model=model, budget_sweeps=100, seed=seed, n_restarts=1)
                ).best_energy
            )
            high.append(
                solve_sa(
                    SolveRequest(model=model, budget_sweeps=200, seed=seed, n_restarts=1)
                ).best_energy
            )
        low, high = np.array(low), np.array(high)
        diff = high - low
        slack = 3.0 * diff.std() / np.sqrt(len(diff))
        assert high.mean() <= low.mean() + slack

    def test_time_budget_mode_runs(self):
        rng = np.random.default_rng(28)
        model = random_model(rng, 10)
        res = solve_sa(SolveRequest(model=model, budget_ms=50.0, seed=1, n_restarts=2))
        assert res.stats.sweeps >= 2
        assert res.best_energy == evaluate(model, res.best_x)

    def test_request_validation(self):
        model = QuboModel.zeros(2)
        with pytest.raises(ValueError):
            SolveRequest(model=model)  # no budget
        with pytest.raises(ValueError):
            SolveRequest(model=model, budget_sweeps=10, budget_ms=1.0)
        with pytest.raises(ValueError):
            SolveRequest(model=model, budget_sweeps=-1)
        with pytest.raises(ValueError):
            SolveRequest(model=model, budget_sweeps=1, n_restarts=0)


# ---------------------------------------------------------------------------
# remote backend against a threaded mock server


class _MockHandler(BaseHTTPRequestHandler):
    behavior = "echo"
    canned: dict = {}
    last_request: dict = {}

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        _MockHandler.last_request = json.loads(self.rfile.read(length))
        if self.path != "/solve":
            self.send_response(404)
            self.end_headers()
            return
        if self.behavior == "garbage":
            payload = b"this is not json"
        elif self.behavior == "wrong_energy":
            body = dict(_MockHandler.canned)
            body["energy"] = body["energy"] + 1.0
            payload = json.dumps(body).encode()
        else:
            payload = json.dumps(_MockHandler.canned).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def mock_server():
    server = HTTPServer(("127.0.0.1", 0), _MockHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def _solved_model():
    rng = np.random.default_rng(31)
    model = random_model(rng, 8)
    exact = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
    return model, exact


class TestRemote:
    def test_round_trip_with_verification(self, mock_server):
        model, exact = _solved_model()
        _MockHandler.behavior = "echo"
        _MockHandler.canned = {
            "solution": exact.best_x.tolist(),
            "energy": exact.best_energy - model.constant,
        }
        req = SolveRequest(model=model, budget_ms=100.0, seed=4)
        res = solve_remote(req, mock_server)
        assert np.array_equal(res.best_x, exact.best_x)
        assert res.best_energy == exact.best_energy
        sent = _MockHandler.last_request
        assert sent["dim"] == model.dim
        assert sent["timeout_ms"] == 100
        assert sent["seed"] == 4
        rebuilt = from_triplets(model.dim, sent["terms"], sent["linear"])
        assert np.allclose(rebuilt.quadratic, model.quadratic)

    def test_wrong_energy_raises_integrity_error(self, mock_server):
        model, exact = _solved_model()
        _MockHandler.behavior = "wrong_energy"
        _MockHandler.canned = {
            "solution": exact.best_x.tolist(),
            "energy": exact.best_energy - model.constant,
        }
        with pytest.raises(EnergyMismatchError):
            solve_remote(SolveRequest(model=model, budget_ms=100.0), mock_server)

    def test_garbage_response(self, mock_server):
        model, _ = _solved_model()
        _MockHandler.behavior = "garbage"
        with pytest.raises(MalformedResponseError):
            solve_remote(SolveRequest(model=model, budget_ms=100.0), mock_server)

    def test_unreachable_endpoint_reports_attempts(self):
        model, _ = _solved_model()
        req = SolveRequest(model=model, budget_ms=10.0)
        with pytest.raises(TransportError, match="3 attempts"):
            solve_remote(req, "http://127.0.0.1:9", max_retries=2)

    def test_requires_time_budget(self):
        model, _ = _solved_model()
        with pytest.raises(ValueError, match="budget_ms"):
            solve_remote(
                SolveRequest(model=model, budget_sweeps=10), "http://127.0.0.1:9"
            )

    def test_wire_request_shape(self):
        model = QuboModel(symmetrized(np.array([[1.0, 2.0], [2.0, 0.0]])), np.array([0.5, 0.0]))
        body = wire_request(model, timeout_ms=250, seed=9)
        assert body["dim"] == 2
        assert body["terms"] == [[0, 0, 1.0], [0, 1, 4.0]]
        assert body["linear"] == [0.5, 0.0]
