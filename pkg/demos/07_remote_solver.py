#!/usr/bin/env python3
"""Routing a solve through the HTTP wire protocol.

A stand-in for an external annealing service: this demo starts a local
server that answers /solve by running the exhaustive backend, then calls
it through `solve_remote`, which re-verifies the reported energy before
trusting it. Point BBOQ_REMOTE_ENDPOINT (or --endpoint) at a real service
speaking the same JSON format to use it from the batch runner.
"""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np

from bboq import QuboModel, SolveRequest, solve_exhaustive, solve_remote
from bboq.qubo import from_triplets, symmetrized


class SolveHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        model = from_triplets(body["dim"], body["terms"], body["linear"])
        res = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
        payload = {"solution": res.best_x.tolist(), "energy": res.best_energy}
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(json.dumps(payload).encode())

    def log_message(self, *args):
        pass


server = HTTPServer(("127.0.0.1", 0), SolveHandler)
threading.Thread(target=server.serve_forever, daemon=True).start()
endpoint = f"http://127.0.0.1:{server.server_port}"
print("mock service at", endpoint)

rng = np.random.default_rng(2)
model = QuboModel(symmetrized(rng.normal(size=(12, 12))), rng.normal(size=12))

result = solve_remote(SolveRequest(model=model, budget_ms=500.0, seed=0), endpoint)
local = solve_exhaustive(SolveRequest(model=model, budget_sweeps=1))
print("remote energy:", result.best_energy)
print("local  energy:", local.best_energy)
assert result.best_energy == local.best_energy

server.shutdown()
print("ok")
