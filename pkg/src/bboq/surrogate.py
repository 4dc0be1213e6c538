"""Analytic quadratic surrogates from polynomial-kernel ridge regression.

Two kernels over encoded binary inputs drive the construction:

* the mean kernel ``k_mu(a, b) = (a.b + gamma)^2``, whose ridge fit
  ``c_hat = (K_mu + lam I)^{-1} y`` yields a surrogate that is exactly a
  QUBO: quadratic ``sum_i c_i x_i x_i^T``, linear ``2 gamma sum_i c_i x_i``,
  constant ``gamma^2 sum_i c_i``;
* the linear kernel ``k_sigma(a, b) = a.b + gamma``, whose regularized
  inverse Gram ``L`` gives a QUBO-compatible spread term
  ``k_sigma(x, x) - k_vec^T L k_vec`` (the usual square root is dropped so
  the expression stays quadratic).

The acquisition handed to a solver is ``mu - beta * sigma``. Constants are
tracked for diagnostics but omitted from the assembled models, since they
cannot change a minimizer.

Both regularized inverses are grown one sample at a time with the bordered
(block) inverse identity, costing O(n^2) per update instead of a fresh
factorization; `SurrogateState.verify` reconstructs ``L (K + lam I)`` to
check drift against the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Dataset
from .qubo import QuboModel, symmetrized


class DegenerateUpdateError(ArithmeticError):
    """Bordered update hit a non-positive Schur complement.

    With lam > 0 this is mathematically impossible, so it signals overflow
    or a corrupted state rather than a recoverable condition.
    """


@dataclass(frozen=True)
class KernelConfig:
    gamma: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


def k_mu(x1: np.ndarray, x2: np.ndarray, gamma: float) -> float:
    """Squared polynomial kernel (x1 . x2 + gamma)^2."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float((a @ b + gamma) ** 2)


def k_sigma(x1: np.ndarray, x2: np.ndarray, gamma: float) -> float:
    """Linear kernel x1 . x2 + gamma."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(a @ b + gamma)


@dataclass(frozen=True)
class SurrogateState:
    """Fitted surrogate: stored inputs, Grams, their regularized inverses, c_hat.

    Row i of every matrix corresponds to sample i of the dataset. L_mu and
    L_sigma are the inverses of (K + lam I) for the two kernels; c_hat is
    always L_mu @ y.
    """

    config: KernelConfig
    X: np.ndarray
    y: np.ndarray
    K_mu: np.ndarray
    K_sigma: np.ndarray
    L_mu: np.ndarray
    L_sigma: np.ndarray
    c_hat: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def mu_constant(self) -> float:
        """Constant dropped from the assembled mean model: gamma^2 sum(c_hat)."""
        return float(self.config.gamma**2 * np.sum(self.c_hat))

    @property
    def sigma_constant(self) -> float:
        """Constant dropped from the assembled spread model."""
        g = self.config.gamma
        return float(g - g**2 * np.sum(self.L_sigma))

    def verify(self, tol: float = 1e-8) -> float:
        """Max-abs deviation of L (K + lam I) from identity over both paths.

        Raises if the deviation exceeds `tol`.
        """
        eye = np.eye(self.n)
        lam = self.config.lam
        dev_mu = np.max(np.abs(self.L_mu @ (self.K_mu + lam * eye) - eye))
        dev_sigma = np.max(np.abs(self.L_sigma @ (self.K_sigma + lam * eye) - eye))
        dev = float(max(dev_mu, dev_sigma))
        if dev > tol:
            raise AssertionError(
                f"regularized-inverse drift {dev:.3e} exceeds tolerance {tol:.1e}"
            )
        return dev


def _as_matrix(X) -> np.ndarray:
    m = np.asarray(X, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    return np.ascontiguousarray(m)


def fit_initial(X, y, cfg: KernelConfig) -> SurrogateState:
    """Fit on an initial dataset with direct dense inverses."""
    Xm = _as_matrix(X)
    yv = np.asarray(y, dtype=np.float64).ravel()
    if Xm.shape[0] != yv.shape[0]:
        raise ValueError(
            f"{Xm.shape[0]} inputs but {yv.shape[0]} outputs"
        )
    if Xm.shape[0] < 1:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(yv)):
        raise ValueError("outputs must be finite")
    K_sigma = symmetrized(Xm @ Xm.T + cfg.gamma)
    K_mu = K_sigma**2
    eye = np.eye(Xm.shape[0])
    L_mu = symmetrized(np.linalg.inv(K_mu + cfg.lam * eye))
    L_sigma = symmetrized(np.linalg.inv(K_sigma + cfg.lam * eye))
    return SurrogateState(
        config=cfg,
        X=Xm,
        y=yv,
        K_mu=K_mu,
        K_sigma=K_sigma,
        L_mu=L_mu,
        L_sigma=L_sigma,
        c_hat=L_mu @ yv,
    )


def _bordered_inverse(L: np.ndarray, b: np.ndarray, d: float) -> np.ndarray:
    """Grow the inverse of M to that of [[M, b], [b^T, d]] given L = M^{-1}."""
    n = L.shape[0]
    u = L @ b
    s = d - float(b @ u)
    if s <= 1e-12:
        raise DegenerateUpdateError(
            f"Schur complement {s:.3e} is not safely positive"
        )
    out = np.empty((n + 1, n + 1))
    out[:n, :n] = L + np.outer(u, u) / s
    out[:n, n] = -u / s
    out[n, :n] = -u / s
    out[n, n] = 1.0 / s
    return symmetrized(out)


_PROBE_TOL = 5e-11


def _polish_inverse(L: np.ndarray, K: np.ndarray, lam: float) -> np.ndarray:
    """Replace the inverse with a direct factorization when a probe trips.

    Sequential bordered updates lose accuracy once the Gram matrix turns
    rank-deficient (n exceeding the input dimension drives its smallest
    eigenvalue down to lam): the uu^T/s term then amplifies inherited error
    through near-null directions. A deterministic random probe costs O(n^2)
    and stays ~1e-15 in the healthy regime, so the O(n^3) recovery runs only
    when actually needed and the common path keeps its O(n^2) cost.
    """
    n = L.shape[0]
    v = np.random.default_rng(n).normal(size=n)
    residual = float(np.max(np.abs(L @ (K @ v + lam * v) - v)))
    if not np.isfinite(residual) or residual / float(np.max(np.abs(v))) > _PROBE_TOL:
        L = symmetrized(np.linalg.inv(K + lam * np.eye(n)))
    return L


def append_sample(state: SurrogateState, x_new, y_new: float) -> SurrogateState:
    """Add one sample, growing both inverses via the bordered identity.

    O(n^2) in the well-conditioned regime: no refactorization. A residual
    probe guards accuracy and triggers an O(n^3) polish step only when the
    Gram matrix is nearly rank-deficient. c_hat is recomputed as L_mu @ y so
    the ridge solution holds unconditionally after every update.
    """
    x = np.asarray(x_new, dtype=np.float64).ravel()
    if x.shape[0] != state.dim:
        raise ValueError(f"input length {x.shape[0]} does not match {state.dim}")
    if not np.isfinite(y_new):
        raise ValueError("output must be finite")
    cfg = state.config
    n = state.n

    dots = state.X @ x
    self_dot = float(x @ x)
    b_sigma = dots + cfg.gamma
    b_mu = b_sigma**2
    d_sigma = self_dot + cfg.gamma + cfg.lam
    d_mu = (self_dot + cfg.gamma) ** 2 + cfg.lam

    X = np.vstack([state.X, x[None, :]])
    y = np.append(state.y, float(y_new))

    K_mu = np.empty((n + 1, n + 1))
    K_mu[:n, :n] = state.K_mu
    K_mu[:n, n] = b_mu
    K_mu[n, :n] = b_mu
    K_mu[n, n] = (self_dot + cfg.gamma) ** 2
    K_sigma = np.empty((n + 1, n + 1))
    K_sigma[:n, :n] = state.K_sigma
    K_sigma[:n, n] = b_sigma
    K_sigma[n, :n] = b_sigma
    K_sigma[n, n] = self_dot + cfg.gamma

    L_mu = _polish_inverse(
        _bordered_inverse(state.L_mu, b_mu, d_mu), K_mu, cfg.lam
    )
    L_sigma = _polish_inverse(
        _bordered_inverse(state.L_sigma, b_sigma, d_sigma), K_sigma, cfg.lam
    )

    return SurrogateState(
        config=cfg,
        X=X,
        y=y,
        K_mu=K_mu,
        K_sigma=K_sigma,
        L_mu=L_mu,
        L_sigma=L_sigma,
        c_hat=L_mu @ y,
    )


def assemble_mu(state: SurrogateState) -> QuboModel:
    """Mean-model QUBO: quadratic sum_i c_i x_i x_i^T, linear 2 gamma X^T c.

    The constant gamma^2 sum(c) is omitted (see `SurrogateState.mu_constant`).
    """
    quad = symmetrized(state.X.T @ (state.c_hat[:, None] * state.X))
    lin = 2.0 * state.config.gamma * (state.X.T @ state.c_hat)
    return QuboModel(quad, lin, 0.0)


def assemble_sigma(state: SurrogateState) -> QuboModel:
    """Spread-model QUBO: I - X^T L X quadratic, -2 gamma X^T (L 1) linear.

    The constant gamma - gamma^2 sum(L) is omitted (see
    `SurrogateState.sigma_constant`).
    """
    quad = np.eye(state.dim) - symmetrized(state.X.T @ state.L_sigma @ state.X)
    row_weights = state.L_sigma @ np.ones(state.n)
    lin = -2.0 * state.config.gamma * (state.X.T @ row_weights)
    return QuboModel(symmetrized(quad), lin, 0.0)


def acquisition(state: SurrogateState, beta: float) -> QuboModel:
    """Lower-confidence-bound acquisition mu - beta * sigma as one QUBO."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    mu = assemble_mu(state)
    if beta == 0.0:
        return mu
    sigma = assemble_sigma(state)
    return QuboModel(
        mu.quadratic - beta * sigma.quadratic,
        mu.linear - beta * sigma.linear,
        0.0,
    )


def predict_mu(state: SurrogateState, x) -> float:
    """Mean-model prediction at x, constant included.

    Computed through the kernel expansion sum_j c_j k_mu(x_j, x), which is
    identical to evaluating the assembled quadratic plus its dropped
    constant (the equality is property-tested).
    """
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.shape[0] != state.dim:
        raise ValueError(f"input length {xv.shape[0]} does not match {state.dim}")
    return float(((state.X @ xv + state.config.gamma) ** 2) @ state.c_hat)


def predict_mu_training(state: SurrogateState) -> np.ndarray:
    """Mean-model predictions at every stored training input."""
    return state.K_mu @ state.c_hat


def training_correlation(state: SurrogateState, dataset: Dataset) -> float | None:
    """Pearson correlation between stored targets and training predictions.

    Returns None when either side is constant (correlation undefined). A
    healthy surrogate stays clearly positive across cycles.
    """
    if state.n < 2:
        raise ValueError("correlation needs at least two samples")
    preds = predict_mu_training(state)
    targets = dataset.y_model_vector() if dataset is not None else state.y
    if targets.shape[0] != state.n:
        raise ValueError("dataset size does not match surrogate state")
    if state.n == 2:
        dp = preds[1] - preds[0]
        dt = targets[1] - targets[0]
        if dp == 0.0 or dt == 0.0:
            return None
        return 1.0 if (dp > 0) == (dt > 0) else -1.0
    pc = preds - preds.mean()
    tc = targets - targets.mean()
    denom = float(np.sqrt((pc @ pc) * (tc @ tc)))
    if denom == 0.0 or not np.isfinite(denom):
        return None
    rho = float(pc @ tc / denom)
    return float(np.clip(rho, -1.0, 1.0))
